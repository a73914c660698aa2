#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ccfr/lp.hpp"
#include "ccfr/poker.hpp"
#include "ccfr/regret.hpp"
#include "helpers.hpp"

namespace ccfr {
namespace {

const TreeGame& kuhn() {
  static const PokerGame g = build_kuhn();
  return g.game();
}

TEST(RegretMatch, Examples) {
  EXPECT_EQ(regret_match(std::vector<double>{3, 1, 0}), (std::vector<double>{0.75, 0.25, 0.0}));
  EXPECT_EQ(regret_match(std::vector<double>{-1, -5}), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(regret_match(std::vector<double>{0, 0, 7}), (std::vector<double>{0.0, 0.0, 1.0}));
  EXPECT_THROW(regret_match(std::vector<double>{}), std::invalid_argument);
}

TEST(RegretMatch, AlwaysOnTheSimplex) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(1 + trial % 6);
    for (auto& v : r) v = n(rng);
    const auto s = regret_match(r);
    double total = 0.0;
    for (double v : s) {
      EXPECT_GE(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

// Definition-level counterfactual value: sum over histories in I of the
// opponent-and-chance reach times the expected utility below h when I plays a.
double cfv_oracle(const TreeGame& g, const Profile& prof, InfosetId I, std::optional<int> action) {
  const auto& tree = g.tree();
  const Player p = tree.infoset(I).player;
  double total = 0.0;
  for (NodeId h : tree.infoset(I).members) {
    double others = 1.0;
    for (NodeId c = h; tree.node(c).parent != kNoNode; c = tree.node(c).parent) {
      const Node& par = tree.node(tree.node(c).parent);
      const auto a = static_cast<std::size_t>(tree.node(c).parent_action);
      if (par.kind == NodeKind::Chance) {
        others *= par.chance_probs[a];
      } else if (par.player != p) {
        others *= prof[par.player].probs[static_cast<std::size_t>(g.index(par.player).sequence(par.infoset, int(a)))];
      }
    }
    std::vector<std::pair<NodeId, double>> stack;
    const Node& hn = tree.node(h);
    for (std::size_t a = 0; a < hn.children.size(); ++a) {
      double q = prof[p].probs[static_cast<std::size_t>(g.index(p).sequence(I, int(a)))];
      if (action) q = static_cast<int>(a) == *action ? 1.0 : 0.0;
      if (q > 0.0) stack.emplace_back(hn.children[a], q);
    }
    while (!stack.empty()) {
      auto [id, w] = stack.back();
      stack.pop_back();
      const Node& n = tree.node(id);
      if (n.kind == NodeKind::Terminal) {
        total += others * w * tree.utility(id, p);
        continue;
      }
      for (std::size_t a = 0; a < n.children.size(); ++a) {
        const double q = n.kind == NodeKind::Chance
                             ? n.chance_probs[a]
                             : prof[n.player].probs[static_cast<std::size_t>(g.index(n.player).sequence(n.infoset, int(a)))];
        if (q > 0.0) stack.emplace_back(n.children[a], w * q);
      }
    }
  }
  return total;
}

TEST(CounterfactualValue, MatchesDefinition) {
  const auto& g = kuhn();
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Profile prof = trial == 0 ? Profile{uniform_strategy(g.layout(Player::One), Player::One),
                                              uniform_strategy(g.layout(Player::Two), Player::Two)}
                                    : test::random_profile(g, rng);
    for (InfosetId I = 0; I < static_cast<InfosetId>(g.tree().num_infosets()); ++I) {
      const auto& info = g.tree().infoset(I);
      double mixed = 0.0;
      for (int a = 0; a < info.num_actions(); ++a) {
        const double v = counterfactual_value(g, prof, I, a);
        EXPECT_NEAR(v, cfv_oracle(g, prof, I, a), 1e-12) << info.label;
        mixed += prof[info.player].probs[static_cast<std::size_t>(g.index(info.player).sequence(I, a))] * v;
      }
      const double vI = counterfactual_value(g, prof, I);
      EXPECT_NEAR(vI, cfv_oracle(g, prof, I, std::nullopt), 1e-12);
      EXPECT_NEAR(vI, mixed, 1e-12);
    }
  }
}

TEST(CfrIterate, SingleDecisionRegrets) {
  const TreeGame g(test::single_decision({1.0, 2.0, 3.0}));
  auto state = make_cfr_state(g);
  cfr_iterate(g, state, Player::One, state[Player::Two].current.probs);
  const auto& r = state[Player::One].table.regret;
  EXPECT_NEAR(r[1], -1.0, 1e-15);
  EXPECT_NEAR(r[2], 0.0, 1e-15);
  EXPECT_NEAR(r[3], 1.0, 1e-15);
  EXPECT_EQ(state[Player::One].current.probs[3], 1.0);
}

TEST(CfrIterate, PenniesAgainstFixedOpponent) {
  const TreeGame g(test::matching_pennies());
  auto state = make_cfr_state(g);
  const std::vector<double> opp = {1.0, 0.7, 0.3};
  cfr_iterate(g, state, Player::One, opp);
  // u(heads) = 0.7 - 0.3, u(tails) = -0.4, expectation under uniform = 0.
  EXPECT_NEAR(state[Player::One].table.regret[1], 0.4, 1e-15);
  EXPECT_NEAR(state[Player::One].table.regret[2], -0.4, 1e-15);
}

TEST(CfrIterate, ZeroUtilityStaysUniform) {
  GameTreeBuilder b;
  const std::vector<std::string> ab = {"a", "b"};
  const NodeId root = b.add_decision(kNoNode, Player::One, "I", ab);
  for (int i = 0; i < 2; ++i) {
    const NodeId n = b.add_decision(root, Player::Two, "J", ab);
    b.add_terminal(n, 0.0);
    b.add_terminal(n, 0.0);
  }
  const TreeGame g(std::move(b).build());
  auto state = make_cfr_state(g);
  for (int t = 0; t < 50; ++t) cfr_step(g, state);
  for (Player p : {Player::One, Player::Two}) {
    EXPECT_EQ(state[p].current.probs[1], 0.5);
    EXPECT_EQ(state[p].current.probs[2], 0.5);
  }
}

TEST(AverageStrategy, FirstIterationAndValidity) {
  const auto& g = kuhn();
  auto state = make_cfr_state(g);
  EXPECT_THROW(average_strategy(state, Player::One), std::logic_error);
  cfr_step(g, state);
  for (Player p : {Player::One, Player::Two}) {
    EXPECT_EQ(average_strategy(state, p).x, state[p].current_sequence.x);
  }
  for (int t = 0; t < 200; ++t) {
    cfr_step(g, state);
    for (Player p : {Player::One, Player::Two}) EXPECT_TRUE(validate(g, average_strategy(state, p)).ok(1e-12));
  }
}

TEST(AverageStrategy, BehavioralAccountingsAgree) {
  const auto& g = kuhn();
  auto state = make_cfr_state(g);
  for (int t = 0; t < 500; ++t) cfr_step(g, state);
  for (Player p : {Player::One, Player::Two}) {
    const auto from_sums = average_behavioral(g, state, p);
    const auto from_seq = behavioral_of(g, average_strategy(state, p));
    for (std::size_t s = 1; s < from_sums.probs.size(); ++s) EXPECT_NEAR(from_sums.probs[s], from_seq.probs[s], 1e-10);
  }
}

double pure_best_response(const TreeGame& g, const BehavioralStrategy& opp, Player p) {
  double best = -1e300;
  for (const auto& s : test::pure_strategies(g.layout(p), p)) {
    Profile prof;
    prof[p] = s;
    prof[opponent(p)] = opp;
    best = std::max(best, expected_value(g, p, prof));
  }
  return best;
}

TEST(BestResponse, MatchesPureEnumeration) {
  const auto& g = kuhn();
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    const Profile prof = trial == 0 ? Profile{uniform_strategy(g.layout(Player::One), Player::One),
                                              uniform_strategy(g.layout(Player::Two), Player::Two)}
                                    : test::random_profile(g, rng);
    for (Player p : {Player::One, Player::Two}) {
      const auto br = exact_best_response(g, prof[opponent(p)].probs, p);
      EXPECT_NEAR(br.value, pure_best_response(g, prof[opponent(p)], p), 1e-12);
      Profile check = prof;
      check[p] = br.strategy;
      EXPECT_NEAR(expected_value(g, p, check), br.value, 1e-12);
    }
  }
}

TEST(BestResponse, ZeroGameAndImperfectRecall) {
  const TreeGame zero(test::single_decision({0.0, 0.0, 0.0}));
  EXPECT_EQ(exact_best_response(zero, uniform_strategy(zero.layout(Player::Two), Player::Two).probs, Player::One).value,
            0.0);

  GameTreeBuilder b;
  const std::vector<std::string> ab = {"a", "b"};
  const NodeId root = b.add_decision(kNoNode, Player::One, "first", ab);
  for (int i = 0; i < 2; ++i) {
    const NodeId n = b.add_decision(root, Player::One, "second", ab);
    b.add_terminal(n, i);
    b.add_terminal(n, 1 - i);
  }
  const TreeGame forgetful(std::move(b).build());
  EXPECT_THROW(exact_best_response(forgetful, std::vector<double>{1.0}, Player::One), GameError);
}

TEST(Exploitability, NashUniformAndDominated) {
  const auto& g = kuhn();
  const ConstraintSet none;
  const auto one = constrained_equilibrium(g, none, Player::One);
  const auto two = constrained_equilibrium(g, none, Player::Two);
  const Profile nash{behavioral_of(g, one.x), behavioral_of(g, two.x)};
  EXPECT_LE(exploitability(g, nash), 1e-9);
  EXPECT_NEAR(exact_best_response(g, nash.second.probs, Player::One).value, -1.0 / 18.0, 1e-9);
  EXPECT_NEAR(exact_best_response(g, nash.first.probs, Player::Two).value, 1.0 / 18.0, 1e-9);

  const Profile uniform{uniform_strategy(g.layout(Player::One), Player::One),
                        uniform_strategy(g.layout(Player::Two), Player::Two)};
  const double e = exploitability(g, uniform);
  EXPECT_GT(e, 0.0);
  EXPECT_NEAR(e,
              0.5 * (pure_best_response(g, uniform.second, Player::One) +
                     pure_best_response(g, uniform.first, Player::Two)),
              1e-12);

  // Player one checks the king and folds it to a bet.
  Profile bad = nash;
  const auto& idx = g.index(Player::One);
  for (std::int32_t s = 1; s < idx.size(); ++s) {
    const auto label = g.sequence_label(Player::One, s);
    auto& q = bad.first.probs[static_cast<std::size_t>(s)];
    if (label == "K|:check" || label == "K|cb:fold") q = 1.0;
    if (label == "K|:bet" || label == "K|cb:call") q = 0.0;
  }
  const double gain = exact_best_response(g, bad.first.probs, Player::Two).value - 1.0 / 18.0;
  EXPECT_GT(gain, 0.0);
  EXPECT_GE(exploitability(g, bad) + 1e-12, 0.5 * gain);
}

TEST(ApproximateBestResponse, CloseToExactOnKuhn) {
  const auto& g = kuhn();
  std::mt19937_64 rng(12);
  const Profile prof = test::random_profile(g, rng);
  const auto approx = approximate_best_response(g, prof.second.probs, Player::One, 100000);
  const auto exact = exact_best_response(g, prof.second.probs, Player::One);
  EXPECT_LE(approx.value, exact.value + 1e-12);
  EXPECT_NEAR(approx.value, exact.value, 0.005);
  const TreeGame zero(test::single_decision({0.0, 0.0}));
  EXPECT_EQ(approximate_best_response(zero, std::vector<double>{1.0}, Player::One, 100).value, 0.0);
}

TEST(Cfr, AverageRegretWithinRegretMatchingBound) {
  const auto& g = kuhn();
  auto state = make_cfr_state(g);
  const std::int64_t T = 2000;
  for (std::int64_t t = 0; t < T; ++t) cfr_step(g, state);
  const double du = g.utility_range();
  for (Player p : {Player::One, Player::Two}) {
    const auto& layout = g.layout(p);
    for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
      const int n = layout.action_count[static_cast<std::size_t>(i)];
      const double bound = du * std::sqrt(static_cast<double>(n)) / std::sqrt(static_cast<double>(T));
      for (int a = 0; a < n; ++a) {
        const double r = state[p].table.regret[static_cast<std::size_t>(layout.first_sequence[i] + a)] / T;
        EXPECT_LE(r, bound);
      }
    }
  }
}

TEST(Cfr, KuhnConvergesMonotonically) {
  const auto& g = kuhn();
  const auto run = run_cfr(g, 100000, checkpoint_schedule(100000));
  ASSERT_FALSE(run.rows.empty());
  for (std::size_t i = 1; i < run.rows.size(); ++i) {
    EXPECT_LE(run.rows[i].exploitability, 1.1 * run.rows[i - 1].exploitability) << run.rows[i].iteration;
  }
  EXPECT_LE(run.rows.back().exploitability, 0.002);
  EXPECT_NEAR(run.rows.back().value, -1.0 / 18.0, 1e-3);

  std::ostringstream csv;
  write_convergence_csv(csv, run.rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "iteration,exploitability[utility],value_p1[utility],wall_time[s]");
}

TEST(Cfr, CheckpointSchedule) {
  EXPECT_EQ(checkpoint_schedule(100), (std::vector<std::int64_t>{1, 2, 5, 10, 20, 50, 100}));
  EXPECT_EQ(checkpoint_schedule(30), (std::vector<std::int64_t>{1, 2, 5, 10, 20, 30}));
}

}  // namespace
}  // namespace ccfr
