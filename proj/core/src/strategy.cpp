#include "ccfr/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ccfr {

std::int32_t DecisionLayout::max_actions() const {
  std::int32_t m = 0;
  for (auto c : action_count) m = std::max(m, c);
  return m;
}

DecisionLayout DecisionLayout::from_successors(
    std::vector<std::int32_t> action_counts,
    const std::vector<std::vector<std::pair<std::int32_t, double>>>& successors) {
  DecisionLayout l;
  const auto n = static_cast<std::int32_t>(action_counts.size());
  l.action_count = std::move(action_counts);
  l.first_sequence.resize(static_cast<std::size_t>(n));
  l.infoset_of_sequence.push_back(-1);
  for (std::int32_t i = 0; i < n; ++i) {
    if (l.action_count[static_cast<std::size_t>(i)] <= 0) throw GameError("infoset without actions");
    l.first_sequence[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(l.infoset_of_sequence.size());
    for (std::int32_t a = 0; a < l.action_count[static_cast<std::size_t>(i)]; ++a) l.infoset_of_sequence.push_back(i);
  }
  const auto num_seq = l.infoset_of_sequence.size();
  if (successors.size() != num_seq) throw GameError("successor list size does not match sequence count");

  l.successor_begin.reserve(num_seq + 1);
  l.successor_begin.push_back(0);
  for (const auto& list : successors) {
    for (const auto& [infoset, weight] : list) {
      if (infoset < 0 || infoset >= n) throw GameError("successor infoset out of range");
      if (!(weight >= 0.0)) throw GameError("negative successor weight");
      l.successor_infoset.push_back(infoset);
      l.successor_weight.push_back(weight);
    }
    l.successor_begin.push_back(static_cast<std::int32_t>(l.successor_infoset.size()));
  }

  // Kahn's algorithm on the infoset graph, then reversed.
  std::vector<std::int32_t> indegree(static_cast<std::size_t>(n), 0);
  for (std::size_t s = 1; s < num_seq; ++s) {
    for (auto k = l.successor_begin[s]; k < l.successor_begin[s + 1]; ++k) {
      ++indegree[static_cast<std::size_t>(l.successor_infoset[static_cast<std::size_t>(k)])];
    }
  }
  std::vector<std::int32_t> order;
  order.reserve(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) {
    if (indegree[static_cast<std::size_t>(i)] == 0) order.push_back(i);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    const auto i = static_cast<std::size_t>(order[head]);
    const auto first = l.first_sequence[i];
    for (auto s = first; s < first + l.action_count[i]; ++s) {
      for (auto k = l.successor_begin[static_cast<std::size_t>(s)]; k < l.successor_begin[static_cast<std::size_t>(s) + 1]; ++k) {
        const auto next = l.successor_infoset[static_cast<std::size_t>(k)];
        if (--indegree[static_cast<std::size_t>(next)] == 0) order.push_back(next);
      }
    }
  }
  if (static_cast<std::int32_t>(order.size()) != n) throw GameError("decision layout contains a cycle");
  l.bottom_up.assign(order.rbegin(), order.rend());
  return l;
}

double ValidationReport::max_violation() const {
  return std::max({empty_sequence_violation, nonnegativity_violation, flow_violation});
}

BehavioralStrategy uniform_strategy(const DecisionLayout& layout, Player owner) {
  BehavioralStrategy s;
  s.owner = owner;
  s.probs.assign(static_cast<std::size_t>(layout.num_sequences()), 1.0);
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    const auto n = layout.action_count[static_cast<std::size_t>(i)];
    const auto first = layout.first_sequence[static_cast<std::size_t>(i)];
    for (auto a = 0; a < n; ++a) s.probs[static_cast<std::size_t>(first + a)] = 1.0 / n;
  }
  return s;
}

void normalize_or_uniform(const DecisionLayout& layout, std::span<double> probs) {
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    const auto n = layout.action_count[static_cast<std::size_t>(i)];
    const auto first = static_cast<std::size_t>(layout.first_sequence[static_cast<std::size_t>(i)]);
    double total = 0.0;
    for (auto a = 0; a < n; ++a) total += probs[first + static_cast<std::size_t>(a)];
    for (auto a = 0; a < n; ++a) {
      auto& p = probs[first + static_cast<std::size_t>(a)];
      p = total > 0.0 ? p / total : 1.0 / n;
    }
  }
}

void realization(const DecisionLayout& layout, std::span<const double> behavioral, std::span<double> x) {
  const auto num_inf = static_cast<std::size_t>(layout.num_infosets());
  std::vector<double> inflow(num_inf, 0.0);
  x[0] = 1.0;
  for (auto k = layout.successor_begin[0]; k < layout.successor_begin[1]; ++k) {
    inflow[static_cast<std::size_t>(layout.successor_infoset[static_cast<std::size_t>(k)])] +=
        layout.successor_weight[static_cast<std::size_t>(k)];
  }
  for (auto it = layout.bottom_up.rbegin(); it != layout.bottom_up.rend(); ++it) {
    const auto i = static_cast<std::size_t>(*it);
    const auto first = layout.first_sequence[i];
    for (auto s = first; s < first + layout.action_count[i]; ++s) {
      const auto su = static_cast<std::size_t>(s);
      const double xs = inflow[i] * behavioral[su];
      x[su] = xs;
      for (auto k = layout.successor_begin[su]; k < layout.successor_begin[su + 1]; ++k) {
        inflow[static_cast<std::size_t>(layout.successor_infoset[static_cast<std::size_t>(k)])] +=
            layout.successor_weight[static_cast<std::size_t>(k)] * xs;
      }
    }
  }
}

SequenceFormStrategy realization(const DecisionLayout& layout, const BehavioralStrategy& behavioral) {
  SequenceFormStrategy out;
  out.owner = behavioral.owner;
  out.x.assign(static_cast<std::size_t>(layout.num_sequences()), 0.0);
  realization(layout, behavioral.probs, out.x);
  return out;
}

namespace {

std::vector<double> inflows(const DecisionLayout& layout, std::span<const double> x) {
  std::vector<double> inflow(static_cast<std::size_t>(layout.num_infosets()), 0.0);
  for (std::int32_t s = 0; s < layout.num_sequences(); ++s) {
    const auto su = static_cast<std::size_t>(s);
    for (auto k = layout.successor_begin[su]; k < layout.successor_begin[su + 1]; ++k) {
      inflow[static_cast<std::size_t>(layout.successor_infoset[static_cast<std::size_t>(k)])] +=
          layout.successor_weight[static_cast<std::size_t>(k)] * x[su];
    }
  }
  return inflow;
}

}  // namespace

BehavioralStrategy behavioral_from_realization(const DecisionLayout& layout, const SequenceFormStrategy& x) {
  BehavioralStrategy b;
  b.owner = x.owner;
  b.probs.assign(static_cast<std::size_t>(layout.num_sequences()), 1.0);
  const auto inflow = inflows(layout, x.x);
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const auto n = layout.action_count[iu];
    const auto first = static_cast<std::size_t>(layout.first_sequence[iu]);
    for (auto a = 0; a < n; ++a) {
      const auto s = first + static_cast<std::size_t>(a);
      b.probs[s] = inflow[iu] > 0.0 ? x.x[s] / inflow[iu] : 1.0 / n;
    }
  }
  return b;
}

ValidationReport validate(const DecisionLayout& layout, std::span<const double> x) {
  ValidationReport r;
  if (x.size() != static_cast<std::size_t>(layout.num_sequences())) {
    r.empty_sequence_violation = std::numeric_limits<double>::infinity();
    return r;
  }
  r.empty_sequence_violation = std::abs(x[0] - 1.0);
  for (double v : x) r.nonnegativity_violation = std::max(r.nonnegativity_violation, -v);
  const auto inflow = inflows(layout, x);
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const auto first = static_cast<std::size_t>(layout.first_sequence[iu]);
    double total = 0.0;
    for (auto a = 0; a < layout.action_count[iu]; ++a) total += x[first + static_cast<std::size_t>(a)];
    const double gap = std::abs(total - inflow[iu]);
    if (gap > r.flow_violation) {
      r.flow_violation = gap;
      r.worst_infoset = i;
    }
  }
  return r;
}

void bottom_up_values(const DecisionLayout& layout, std::span<const double> immediate,
                      std::span<const double> behavioral, std::span<const double> tilt, Aggregate aggregate,
                      ValuePass& out, std::vector<std::int32_t>* argmax) {
  const auto num_seq = static_cast<std::size_t>(layout.num_sequences());
  out.action.resize(num_seq);
  out.infoset.resize(static_cast<std::size_t>(layout.num_infosets()));
  if (argmax) argmax->assign(static_cast<std::size_t>(layout.num_infosets()), 0);
  const bool tilted = !tilt.empty();

  for (const auto i : layout.bottom_up) {
    const auto iu = static_cast<std::size_t>(i);
    const auto first = layout.first_sequence[iu];
    const auto n = layout.action_count[iu];
    double value = aggregate == Aggregate::Mix ? 0.0 : -std::numeric_limits<double>::infinity();
    for (auto a = 0; a < n; ++a) {
      const auto s = static_cast<std::size_t>(first + a);
      double v = immediate[s];
      for (auto k = layout.successor_begin[s]; k < layout.successor_begin[s + 1]; ++k) {
        v += layout.successor_weight[static_cast<std::size_t>(k)] *
             out.infoset[static_cast<std::size_t>(layout.successor_infoset[static_cast<std::size_t>(k)])];
      }
      if (tilted) v -= tilt[s];
      out.action[s] = v;
      if (aggregate == Aggregate::Mix) {
        value += behavioral[s] * v;
      } else if (v > value) {
        value = v;
        if (argmax) (*argmax)[iu] = a;
      }
    }
    out.infoset[iu] = value;
  }
  double root = immediate[0];
  for (auto k = layout.successor_begin[0]; k < layout.successor_begin[1]; ++k) {
    root += layout.successor_weight[static_cast<std::size_t>(k)] *
            out.infoset[static_cast<std::size_t>(layout.successor_infoset[static_cast<std::size_t>(k)])];
  }
  out.action[0] = root;
  out.root = root;
}

double expected_value(const StrategicGame& game, Player p, const Profile& profile) {
  const auto& layout = game.layout(p);
  std::vector<double> q(static_cast<std::size_t>(layout.num_sequences()));
  game.immediate_values(p, profile[opponent(p)].probs, q);
  ValuePass pass;
  bottom_up_values(layout, q, profile[p].probs, {}, Aggregate::Mix, pass);
  return pass.root;
}

}  // namespace ccfr
