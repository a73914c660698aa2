#include "ccfr/opponent_model.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace ccfr {

namespace {

/// Who acts in each public state and where each action leads.
struct PublicTree {
  std::vector<int> actor;                          // -1 when nobody decides
  std::vector<std::vector<std::int32_t>> child;    // per action
  std::vector<std::vector<char>> fold;             // per action

  explicit PublicTree(const PokerGame& poker) {
    const auto n = poker.public_states().size();
    actor.assign(n, -1);
    child.assign(n, {});
    fold.assign(n, {});
    const auto& tree = poker.tree();
    for (NodeId id = 0; id < static_cast<NodeId>(tree.num_nodes()); ++id) {
      const Node& node = tree.node(id);
      if (node.kind != NodeKind::Decision) continue;
      const auto s = static_cast<std::size_t>(poker.node_info(id).public_state);
      if (actor[s] >= 0) continue;
      actor[s] = index_of(node.player);
      for (std::size_t a = 0; a < node.children.size(); ++a) {
        child[s].push_back(poker.node_info(node.children[a]).public_state);
        fold[s].push_back(poker.is_fold_action(node.infoset, static_cast<int>(a)) ? 1 : 0);
      }
    }
  }

  double probe_probability(std::size_t s, std::size_t a) const {
    if (fold[s][a]) return 0.0;
    int options = 0;
    for (char f : fold[s]) options += f ? 0 : 1;
    return 1.0 / options;
  }
};

int sample(std::mt19937_64& rng, std::span<const double> probs) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

std::string rank_name(const PokerGame& poker, int r) { return poker.rules().rank_names.at(static_cast<std::size_t>(r)); }

/// Builds the statistics; `log` may be null, in which case counts stay 0 and
/// our reach uses the probe's probabilities.
std::vector<ReachStatistic> collect(const PokerGame& poker, Player probe, const ObservationLog* log,
                                    ReachEstimate reach) {
  const PublicTree pt(poker);
  const auto& states = poker.public_states();
  const auto num_states = states.size();
  const int ranks = poker.num_ranks();
  const Player opp = opponent(probe);
  const auto& game = poker.game();
  const auto& tree = poker.tree();
  const auto& idx = game.index(opp);

  // Games per (own rank, public state) prefix and per (own, opp, terminal state).
  std::vector<std::int64_t> passed(static_cast<std::size_t>(ranks) * num_states, 0);
  std::map<std::tuple<int, int, std::int32_t>, std::int64_t> showdowns;
  if (log) {
    for (const auto& r : log->records) {
      for (auto s = r.public_state; s >= 0; s = states[static_cast<std::size_t>(s)].parent) {
        ++passed[static_cast<std::size_t>(r.own) * num_states + static_cast<std::size_t>(s)];
      }
      if (r.opponent >= 0) ++showdowns[{r.own, r.opponent, r.public_state}];
    }
  }
  const auto count = [&](int own, std::size_t s) { return passed[static_cast<std::size_t>(own) * num_states + s]; };

  // Our reach of (own, s): known and estimated.
  std::vector<double> known(static_cast<std::size_t>(ranks) * num_states, 0.0);
  std::vector<double> estimated(known.size(), 0.0);
  for (int own = 0; own < ranks; ++own) {
    const auto base = static_cast<std::size_t>(own) * num_states;
    known[base] = estimated[base] = 1.0;
    // Parents precede children in the public state list.
    for (std::size_t c = 1; c < num_states; ++c) {
      const auto s = static_cast<std::size_t>(states[c].parent);
      double k = 1.0;
      double e = 1.0;
      if (pt.actor[s] == index_of(probe)) {
        std::size_t a = 0;
        while (static_cast<std::size_t>(pt.child[s][a]) != c) ++a;
        k = e = pt.probe_probability(s, a);
        if (reach == ReachEstimate::Empirical && count(own, s) > 0) {
          e = static_cast<double>(count(own, c)) / static_cast<double>(count(own, s));
        }
      }
      known[base + c] = known[base + s] * k;
      estimated[base + c] = estimated[base + s] * e;
    }
  }
  const auto& ours = reach == ReachEstimate::Empirical ? estimated : known;

  struct Acc {
    std::map<std::int32_t, double> coef;
    std::map<std::int32_t, double> structural;
  };
  std::map<std::pair<int, std::int32_t>, Acc> inner;
  std::map<std::tuple<int, int, std::int32_t>, Acc> term;
  for (NodeId id = 0; id < static_cast<NodeId>(tree.num_nodes()); ++id) {
    const auto& info = poker.node_info(id);
    const bool entry = poker.is_entry(id);
    const bool show = info.terminal == TerminalKind::Showdown;
    if (!entry && !show) continue;
    const int own = info.hand[static_cast<std::size_t>(index_of(probe))];
    const auto s = static_cast<std::size_t>(info.public_state);
    const auto k = static_cast<std::size_t>(own) * num_states + s;
    const std::int32_t seq = idx.last_sequence(id);
    const double pc = game.chance_reach(id);
    if (entry) {
      auto& acc = inner[{own, info.public_state}];
      acc.coef[seq] += pc * ours[k];
      acc.structural[seq] += pc * known[k];
    }
    if (show) {
      const int other = info.hand[static_cast<std::size_t>(index_of(opp))];
      auto& acc = term[{own, other, info.public_state}];
      acc.coef[seq] += pc * ours[k];
      acc.structural[seq] += pc * known[k];
    }
  }

  const auto informative = [](const Acc& acc) {
    for (const auto& [seq, v] : acc.structural) {
      if (seq != 0 && v != 0.0) return true;
    }
    return false;
  };
  std::vector<ReachStatistic> out;
  for (const auto& [key, acc] : inner) {
    if (!informative(acc)) continue;
    ReachStatistic st;
    st.label = rank_name(poker, key.first) + "|" + states[static_cast<std::size_t>(key.second)].label;
    st.coefficients.assign(acc.coef.begin(), acc.coef.end());
    st.count = count(key.first, static_cast<std::size_t>(key.second));
    out.push_back(std::move(st));
  }
  for (const auto& [key, acc] : term) {
    if (!informative(acc)) continue;
    const auto& [own, other, s] = key;
    ReachStatistic st;
    st.label = rank_name(poker, own) + "-" + rank_name(poker, other) + "|" + states[static_cast<std::size_t>(s)].label;
    st.showdown = true;
    st.coefficients.assign(acc.coef.begin(), acc.coef.end());
    const auto it = showdowns.find(key);
    st.count = it == showdowns.end() ? 0 : it->second;
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace

double probe_probability(const PokerGame& poker, InfosetId infoset, int action) {
  const auto& is = poker.tree().infoset(infoset);
  if (poker.is_fold_action(infoset, action)) return 0.0;
  int options = 0;
  for (int a = 0; a < is.num_actions(); ++a) options += poker.is_fold_action(infoset, a) ? 0 : 1;
  return 1.0 / options;
}

BehavioralStrategy probe_strategy(const PokerGame& poker, Player p) {
  const auto& game = poker.game();
  BehavioralStrategy b = uniform_strategy(game.layout(p), p);
  for (InfosetId g : poker.tree().infosets_of(p)) {
    for (int a = 0; a < poker.tree().infoset(g).num_actions(); ++a) {
      b.probs[static_cast<std::size_t>(game.index(p).sequence(g, a))] = probe_probability(poker, g, a);
    }
  }
  return b;
}

ObservationLog simulate_observations(const PokerGame& poker, const Profile& target, Player probe, std::int64_t n,
                                     std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("need at least one game");
  const auto& game = poker.game();
  const auto& tree = poker.tree();
  const BehavioralStrategy probe_beh = probe_strategy(poker, probe);
  ObservationLog log;
  log.probe = probe;
  log.game_hash = game.hash();
  log.records.reserve(static_cast<std::size_t>(n));
  std::mt19937_64 rng(seed);
  std::vector<double> probs;
  for (std::int64_t g = 0; g < n; ++g) {
    NodeId id = tree.root();
    while (tree.node(id).kind != NodeKind::Terminal) {
      const Node& node = tree.node(id);
      if (node.kind == NodeKind::Chance) {
        id = node.children[static_cast<std::size_t>(sample(rng, node.chance_probs))];
        continue;
      }
      const auto& beh = node.player == probe ? probe_beh : target[node.player];
      const auto& idx = game.index(node.player);
      probs.assign(node.children.size(), 0.0);
      for (std::size_t a = 0; a < probs.size(); ++a) {
        probs[a] = beh.probs[static_cast<std::size_t>(idx.sequence(node.infoset, static_cast<int>(a)))];
      }
      id = node.children[static_cast<std::size_t>(sample(rng, probs))];
    }
    const auto& info = poker.node_info(id);
    ObservationRecord r;
    r.own = info.hand[static_cast<std::size_t>(index_of(probe))];
    r.public_state = info.public_state;
    if (info.terminal == TerminalKind::Showdown) r.opponent = info.hand[static_cast<std::size_t>(index_of(opponent(probe)))];
    log.records.push_back(r);
  }
  return log;
}

void write_observation_log(std::ostream& out, const ObservationLog& log) {
  out << "# ccfr observation log v1\n";
  out << "# game: " << log.game_hash << "\n";
  out << "# probe_player: " << (index_of(log.probe) + 1) << "\n";
  out << "# probe: " << log.probe_description << "\n";
  out << "# records: " << log.records.size() << "\n";
  out << "# columns: own_rank public_state opponent_rank(-1 unless showdown)\n";
  for (const auto& r : log.records) out << r.own << ' ' << r.public_state << ' ' << r.opponent << '\n';
}

ObservationLog read_observation_log(std::istream& in) {
  ObservationLog log;
  std::string line;
  std::int64_t expected = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2);
      const std::string value = line.substr(std::min(line.size(), colon + 2));
      if (key == "game") log.game_hash = value;
      else if (key == "probe_player") log.probe = player_from_number(std::stoi(value));
      else if (key == "probe") log.probe_description = value;
      else if (key == "records") expected = std::stoll(value);
      continue;
    }
    std::istringstream fields(line);
    ObservationRecord r;
    if (!(fields >> r.own >> r.public_state >> r.opponent)) throw std::runtime_error("malformed observation record: " + line);
    log.records.push_back(r);
  }
  if (expected >= 0 && expected != log.size()) {
    throw std::runtime_error("observation log has " + std::to_string(log.size()) + " records, header says " +
                             std::to_string(expected));
  }
  return log;
}

std::vector<ReachStatistic> reach_statistics(const PokerGame& poker, const ObservationLog& log, ReachEstimate reach) {
  return collect(poker, log.probe, &log, reach);
}

ConstraintSet build_opponent_constraints(const ObservationLog& log, const PokerGame& poker,
                                         const OpponentModelOptions& options, std::vector<IntervalBound>* intervals) {
  if (log.records.empty()) throw std::invalid_argument("observation log is empty");
  const auto dim = poker.game().index(opponent(log.probe)).size();
  ConstraintSet set;
  for (auto& st : collect(poker, log.probe, &log, options.reach)) {
    auto bound = wilson_interval(st.count, log.size(), options.confidence);
    bound.statistic = st.label;
    set.emplace(LinearConstraint::at_least(dim, st.coefficients, bound.lower, st.label + ">=L"));
    set.emplace(LinearConstraint::at_most(dim, std::move(st.coefficients), bound.upper, st.label + "<=U"));
    if (intervals) intervals->push_back(std::move(bound));
  }
  return set;
}

ConstraintSet exact_opponent_constraints(const PokerGame& poker, const Profile& target, Player probe) {
  const Player opp = opponent(probe);
  const auto& game = poker.game();
  const auto x = seq_of(game, target[opp]);
  const auto dim = game.index(opp).size();
  ConstraintSet set;
  for (auto& st : collect(poker, probe, nullptr, ReachEstimate::Known)) {
    double v = 0.0;
    for (const auto& [s, a] : st.coefficients) v += a * x.x[static_cast<std::size_t>(s)];
    set.emplace(LinearConstraint::at_least(dim, st.coefficients, v, st.label + ">=exact"));
    set.emplace(LinearConstraint::at_most(dim, std::move(st.coefficients), v, st.label + "<=exact"));
  }
  return set;
}

CounterProfile robust_counter_profile(const PokerGame& poker, const ConstraintSet (&constraints)[2],
                                      const CcfrConfig& config) {
  CounterProfile out;
  for (Player us : {Player::One, Player::Two}) {
    CcfrConfig cfg = config;
    cfg.constrained = opponent(us);
    auto& r = out.seat[index_of(us)];
    const auto& cs = constraints[index_of(us)];
    r = cfg.beta_doubling ? beta_doubling_solve(poker.game(), cs, cfg) : solve(poker.game(), cs, cfg);
    out.profile[us] = r.average[us];
  }
  return out;
}

double value_against(const PokerGame& poker, const Profile& ours, const Profile& target) {
  const auto& game = poker.game();
  const double first = expected_value(game, Player::One, Profile{ours.first, target.second});
  const double second = expected_value(game, Player::Two, Profile{target.first, ours.second});
  return 0.5 * (first + second);
}

double best_response_value(const PokerGame& poker, const Profile& target) {
  const auto& game = poker.game();
  const double first = exact_best_response(game, target.second.probs, Player::One).value;
  const double second = exact_best_response(game, target.first.probs, Player::Two).value;
  return 0.5 * (first + second);
}

}  // namespace ccfr
