#include "ccfr/regret.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ccfr/format.hpp"

namespace ccfr {

void regret_match(std::span<const double> regrets, std::span<double> out) {
  if (regrets.empty()) throw std::invalid_argument("regret_match needs at least one action");
  double positive = 0.0;
  for (double r : regrets) positive += r > 0.0 ? r : 0.0;
  const auto n = regrets.size();
  if (positive > 0.0) {
    for (std::size_t a = 0; a < n; ++a) out[a] = regrets[a] > 0.0 ? regrets[a] / positive : 0.0;
  } else {
    for (std::size_t a = 0; a < n; ++a) out[a] = 1.0 / static_cast<double>(n);
  }
}

std::vector<double> regret_match(std::span<const double> regrets) {
  std::vector<double> out(regrets.size());
  regret_match(regrets, out);
  return out;
}

CfrState make_cfr_state(const StrategicGame& game) {
  CfrState state;
  for (Player p : {Player::One, Player::Two}) {
    const auto& layout = game.layout(p);
    auto& ps = state[p];
    const auto n = static_cast<std::size_t>(layout.num_sequences());
    ps.table.regret.assign(n, 0.0);
    ps.table.strategy_sum.assign(n, 0.0);
    ps.table.iterations = 0;
    ps.current = uniform_strategy(layout, p);
    ps.current_sequence = realization(layout, ps.current);
    ps.average.owner = p;
    ps.average.x.assign(n, 0.0);
    ps.immediate.assign(n, 0.0);
  }
  return state;
}

void cfr_iterate(const StrategicGame& game, CfrState& state, Player p, std::span<const double> opponent_behavioral,
                 std::span<const double> tilt) {
  auto& ps = state[p];
  const auto& layout = game.layout(p);
  game.immediate_values(p, opponent_behavioral, ps.immediate);
  bottom_up_values(layout, ps.immediate, ps.current.probs, tilt, Aggregate::Mix, ps.pass);

  auto& regret = ps.table.regret;
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const auto first = static_cast<std::size_t>(layout.first_sequence[iu]);
    const auto n = static_cast<std::size_t>(layout.action_count[iu]);
    for (std::size_t s = first; s < first + n; ++s) regret[s] += ps.pass.action[s] - ps.pass.infoset[iu];
    regret_match(std::span<const double>(regret).subspan(first, n), std::span<double>(ps.current.probs).subspan(first, n));
  }

  realization(layout, ps.current.probs, ps.current_sequence.x);
  auto& t = ps.table.iterations;
  ++t;
  const double inv = 1.0 / static_cast<double>(t);
  auto& avg = ps.average.x;
  const auto& x = ps.current_sequence.x;
  for (std::size_t s = 0; s < x.size(); ++s) {
    ps.table.strategy_sum[s] += x[s];
    avg[s] += (x[s] - avg[s]) * inv;
  }
}

void cfr_step(const StrategicGame& game, CfrState& state) {
  cfr_iterate(game, state, Player::Two, state[Player::One].current.probs);
  cfr_iterate(game, state, Player::One, state[Player::Two].current.probs);
}

SequenceFormStrategy average_strategy(const CfrState& state, Player p) {
  if (state[p].table.iterations == 0) throw std::logic_error("average strategy requested before any iteration");
  return state[p].average;
}

BehavioralStrategy average_behavioral(const StrategicGame& game, const CfrState& state, Player p) {
  if (state[p].table.iterations == 0) throw std::logic_error("average strategy requested before any iteration");
  return behavioral_from_realization(game.layout(p), SequenceFormStrategy{p, state[p].table.strategy_sum});
}

Profile average_profile(const StrategicGame& game, const CfrState& state) {
  return {behavioral_from_realization(game.layout(Player::One), average_strategy(state, Player::One)),
          behavioral_from_realization(game.layout(Player::Two), average_strategy(state, Player::Two))};
}

namespace {

double walk(const TreeGame& game, const Profile& profile, NodeId node, Player perspective, InfosetId forced,
            int forced_action) {
  const auto& tree = game.tree();
  const Node& n = tree.node(node);
  switch (n.kind) {
    case NodeKind::Terminal:
      return tree.utility(node, perspective);
    case NodeKind::Chance: {
      double v = 0.0;
      for (std::size_t c = 0; c < n.children.size(); ++c) {
        v += n.chance_probs[c] * walk(game, profile, n.children[c], perspective, forced, forced_action);
      }
      return v;
    }
    case NodeKind::Decision:
      break;
  }
  if (n.infoset == forced && forced_action >= 0) {
    return walk(game, profile, n.children[static_cast<std::size_t>(forced_action)], perspective, forced, forced_action);
  }
  const auto& idx = game.index(n.player);
  const auto& probs = profile[n.player].probs;
  double v = 0.0;
  for (std::size_t a = 0; a < n.children.size(); ++a) {
    const double p = probs[static_cast<std::size_t>(idx.sequence(n.infoset, static_cast<int>(a)))];
    if (p != 0.0) v += p * walk(game, profile, n.children[a], perspective, forced, forced_action);
  }
  return v;
}

}  // namespace

double counterfactual_value(const TreeGame& game, const Profile& profile, InfosetId infoset, std::optional<int> action) {
  const auto& tree = game.tree();
  if (infoset < 0 || static_cast<std::size_t>(infoset) >= tree.num_infosets()) throw GameError("unknown infoset");
  const auto& info = tree.infoset(infoset);
  if (action && (*action < 0 || *action >= info.num_actions())) throw GameError("action index out of range");
  const Player i = info.player;
  double total = 0.0;
  for (NodeId h : info.members) {
    const auto r = reach_probability(game, profile, h);
    const double others = r.chance * r.player[static_cast<std::size_t>(index_of(opponent(i)))];
    total += others * walk(game, profile, h, i, infoset, action.value_or(-1));
  }
  return total;
}

BestResponse exact_best_response(const StrategicGame& game, std::span<const double> opponent_behavioral, Player p) {
  if (!game.supports_exact_best_response(p)) {
    throw GameError("exact best response unavailable for player " + to_string(p) + "; use approximate_best_response");
  }
  const auto& layout = game.layout(p);
  std::vector<double> q(static_cast<std::size_t>(layout.num_sequences()));
  game.immediate_values(p, opponent_behavioral, q);
  ValuePass pass;
  std::vector<std::int32_t> argmax;
  bottom_up_values(layout, q, {}, {}, Aggregate::Max, pass, &argmax);
  BestResponse br;
  br.value = pass.root;
  br.strategy.owner = p;
  br.strategy.probs.assign(q.size(), 1.0);
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const auto first = static_cast<std::size_t>(layout.first_sequence[iu]);
    for (std::int32_t a = 0; a < layout.action_count[iu]; ++a) {
      br.strategy.probs[first + static_cast<std::size_t>(a)] = a == argmax[iu] ? 1.0 : 0.0;
    }
  }
  return br;
}

double exploitability(const StrategicGame& game, const Profile& profile) {
  const double br1 = exact_best_response(game, profile.second.probs, Player::One).value;
  const double br2 = exact_best_response(game, profile.first.probs, Player::Two).value;
  return 0.5 * (br1 + br2);
}

BestResponse approximate_best_response(const StrategicGame& game, std::span<const double> opponent_behavioral,
                                       Player p, std::int64_t iterations) {
  CfrState state = make_cfr_state(game);
  const auto& layout = game.layout(p);
  std::vector<double> q(static_cast<std::size_t>(layout.num_sequences()));
  game.immediate_values(p, opponent_behavioral, q);
  const auto value_of = [&q](const std::vector<double>& x) {
    double v = 0.0;
    for (std::size_t s = 0; s < x.size(); ++s) v += q[s] * x[s];
    return v;
  };

  BestResponse best;
  best.value = -std::numeric_limits<double>::infinity();
  best.strategy = state[p].current;
  if (iterations <= 0) {
    best.value = value_of(state[p].current_sequence.x);
    return best;
  }
  const std::int64_t every = std::max<std::int64_t>(1, iterations / 100);
  for (std::int64_t t = 1; t <= iterations; ++t) {
    cfr_iterate(game, state, p, opponent_behavioral);
    if (t % every == 0 || t == iterations) {
      const double v = value_of(state[p].average.x);
      if (v > best.value) {
        best.value = v;
        best.strategy = behavioral_from_realization(layout, state[p].average);
      }
    }
  }
  return best;
}

std::vector<std::int64_t> checkpoint_schedule(std::int64_t last) {
  std::vector<std::int64_t> out;
  for (std::int64_t decade = 1; decade <= last; decade *= 10) {
    for (std::int64_t m : {1, 2, 5}) {
      if (m * decade < last) out.push_back(m * decade);
    }
  }
  if (last >= 1) out.push_back(last);
  return out;
}

CfrRun run_cfr(const StrategicGame& game, std::int64_t iterations, std::span<const std::int64_t> checkpoints) {
  CfrRun run{make_cfr_state(game), {}};
  const auto start = std::chrono::steady_clock::now();
  std::size_t next = 0;
  for (std::int64_t t = 1; t <= iterations; ++t) {
    cfr_step(game, run.state);
    while (next < checkpoints.size() && checkpoints[next] < t) ++next;
    if (next < checkpoints.size() && checkpoints[next] == t) {
      const Profile avg = average_profile(game, run.state);
      ConvergenceRow row;
      row.iteration = t;
      row.exploitability = exploitability(game, avg);
      row.value = expected_value(game, Player::One, avg);
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      run.rows.push_back(row);
    }
  }
  return run;
}

void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows) {
  out << "iteration,exploitability[utility],value_p1[utility],wall_time[s]\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << format_number(r.exploitability) << ',' << format_number(r.value) << ','
        << format_number(r.seconds) << '\n';
  }
}

}  // namespace ccfr
