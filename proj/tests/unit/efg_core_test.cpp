#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ccfr/game_io.hpp"
#include "ccfr/poker.hpp"
#include "helpers.hpp"

namespace ccfr {
namespace {

const TreeGame& kuhn() {
  static const PokerGame g = build_kuhn();
  return g.game();
}

TEST(GameTreeBuilder, RejectsBadChanceDistribution) {
  GameTreeBuilder b;
  const NodeId root = b.add_chance(kNoNode, {0.5, 0.6});
  b.add_terminal(root, 1.0);
  b.add_terminal(root, 0.0);
  EXPECT_THROW(std::move(b).build(), GameError);
}

TEST(GameTreeBuilder, RejectsMismatchedInfosetActions) {
  GameTreeBuilder b;
  const NodeId root = b.add_chance(kNoNode, {0.5, 0.5});
  const std::vector<std::string> two = {"a", "b"};
  const std::vector<std::string> three = {"a", "b", "c"};
  const NodeId l = b.add_decision(root, Player::One, "I", two);
  EXPECT_THROW(b.add_decision(root, Player::One, "I", three), GameError);
  (void)l;
}

TEST(GameTreeBuilder, DetectsImperfectRecall) {
  // Player one forgets its first action.
  GameTreeBuilder b;
  const std::vector<std::string> ab = {"a", "b"};
  const NodeId root = b.add_decision(kNoNode, Player::One, "first", ab);
  for (int i = 0; i < 2; ++i) {
    const NodeId n = b.add_decision(root, Player::One, "second", ab);
    b.add_terminal(n, i);
    b.add_terminal(n, -i);
  }
  const GameTree t = std::move(b).build();
  EXPECT_FALSE(t.perfect_recall(Player::One));
  EXPECT_TRUE(t.perfect_recall(Player::Two));
  const TreeGame g(t);
  EXPECT_THROW(seq_of(g, uniform_strategy(g.layout(Player::One), Player::One)), GameError);
}

TEST(Kuhn, Shape) {
  const auto& tree = kuhn().tree();
  EXPECT_EQ(tree.terminals().size(), 30u);
  EXPECT_EQ(tree.infosets_of(Player::One).size(), 6u);
  EXPECT_EQ(tree.infosets_of(Player::Two).size(), 6u);
  EXPECT_TRUE(tree.perfect_recall(Player::One));
  EXPECT_TRUE(tree.perfect_recall(Player::Two));
  EXPECT_DOUBLE_EQ(tree.utility_range(), 4.0);
}

TEST(SeqOf, UniformKuhn) {
  const auto& g = kuhn();
  const auto x = seq_of(g, uniform_strategy(g.layout(Player::One), Player::One));
  EXPECT_EQ(x.x[0], 1.0);
  const auto& idx = g.index(Player::One);
  for (std::int32_t s = 1; s < idx.size(); ++s) {
    const bool first_level = idx.parent_sequence(idx.infoset_of(s)) == 0;
    EXPECT_DOUBLE_EQ(x.x[static_cast<std::size_t>(s)], first_level ? 0.5 : 0.25) << g.sequence_label(Player::One, s);
  }
}

TEST(SeqOf, PureStrategiesAreZeroOne) {
  const auto& g = kuhn();
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = test::random_behavioral(g.layout(Player::Two), Player::Two, rng, true);
    const auto x = seq_of(g, b);
    for (double v : x.x) EXPECT_TRUE(v == 0.0 || v == 1.0);
    EXPECT_TRUE(validate(g, x).ok(0.0));
  }
}

// Multiplies the owner's probabilities along the path to each infoset.
TEST(SeqOf, MatchesPathProducts) {
  const auto& g = kuhn();
  const auto& tree = g.tree();
  std::mt19937_64 rng(7);
  for (Player p : {Player::One, Player::Two}) {
    const auto b = test::random_behavioral(g.layout(p), p, rng);
    const auto x = seq_of(g, b);
    const auto& idx = g.index(p);
    for (InfosetId I : tree.infosets_of(p)) {
      const NodeId h = tree.infoset(I).members.front();
      double reach = 1.0;
      for (NodeId c = h; tree.node(c).parent != kNoNode; c = tree.node(c).parent) {
        const Node& parent = tree.node(tree.node(c).parent);
        if (parent.kind == NodeKind::Decision && parent.player == p) {
          reach *= b.probs[static_cast<std::size_t>(idx.sequence(parent.infoset, tree.node(c).parent_action))];
        }
      }
      for (int a = 0; a < tree.infoset(I).num_actions(); ++a) {
        const auto s = static_cast<std::size_t>(idx.sequence(I, a));
        EXPECT_NEAR(x.x[s], reach * b.probs[s], 1e-15);
      }
    }
  }
}

TEST(BehavioralOf, RoundTrip) {
  const auto& g = kuhn();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = test::random_behavioral(g.layout(Player::One), Player::One, rng);
    const auto x = seq_of(g, b);
    const auto back = behavioral_of(g, x);
    for (std::size_t s = 1; s < b.probs.size(); ++s) EXPECT_NEAR(back.probs[s], b.probs[s], 1e-12);
    const auto again = seq_of(g, back);
    for (std::size_t s = 0; s < x.x.size(); ++s) EXPECT_NEAR(again.x[s], x.x[s], 1e-12);
  }
}

TEST(BehavioralOf, UnreachedInfosetIsUniform) {
  const auto& g = kuhn();
  // Always bet the jack: "J|cb" (after J|:check) is never reached.
  auto x = seq_of(g, uniform_strategy(g.layout(Player::One), Player::One));
  x.x[1] = 0.0;
  x.x[2] = 1.0;
  x.x[3] = x.x[4] = 0.0;
  ASSERT_EQ(g.sequence_label(Player::One, 3), "J|cb:fold");
  const auto back = behavioral_of(g, x);
  EXPECT_DOUBLE_EQ(back.probs[3], 0.5);
  EXPECT_DOUBLE_EQ(back.probs[4], 0.5);
  EXPECT_DOUBLE_EQ(back.probs[2], 1.0);
}

TEST(Validate, ReportsViolations) {
  const auto& g = kuhn();
  SequenceFormStrategy zeros{Player::One, std::vector<double>(13, 0.0)};
  EXPECT_NEAR(validate(g, zeros).empty_sequence_violation, 1.0, 1e-15);

  auto x = seq_of(g, uniform_strategy(g.layout(Player::One), Player::One));
  EXPECT_TRUE(validate(g, x).ok(0.0));
  x.x[1] += 0.1;
  EXPECT_NEAR(validate(g, x).flow_violation, 0.1, 1e-12);
}

TEST(Reach, RootAndKuhnTerminal) {
  const auto& g = kuhn();
  const Profile uniform{uniform_strategy(g.layout(Player::One), Player::One),
                        uniform_strategy(g.layout(Player::Two), Player::Two)};
  const auto r = reach_probability(g, uniform, g.tree().root());
  EXPECT_EQ(r.total, 1.0);
  EXPECT_EQ(r.chance, 1.0);

  // Deal, check, check.
  NodeId n = g.tree().root();
  while (g.tree().node(n).kind == NodeKind::Chance) n = g.tree().node(n).children.front();
  n = g.tree().node(n).children.front();
  n = g.tree().node(n).children.front();
  ASSERT_EQ(g.tree().node(n).kind, NodeKind::Terminal);
  const auto rz = reach_probability(g, uniform, n);
  EXPECT_NEAR(rz.chance, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(rz.player[0], 0.5, 1e-15);
  EXPECT_NEAR(rz.player[1], 0.5, 1e-15);
  EXPECT_NEAR(rz.total, 1.0 / 24.0, 1e-15);
}

TEST(Reach, DecomposesAndIsConstantOnInfosets) {
  const auto& g = kuhn();
  const auto& tree = g.tree();
  std::mt19937_64 rng(5);
  const Profile prof = test::random_profile(g, rng);
  for (NodeId id = 0; id < static_cast<NodeId>(tree.num_nodes()); ++id) {
    const auto r = reach_probability(g, prof, id);
    EXPECT_NEAR(r.total, r.player[0] * r.player[1] * r.chance, 1e-12);
    // Independent walk over ancestor edges.
    double walk = 1.0;
    for (NodeId c = id; tree.node(c).parent != kNoNode; c = tree.node(c).parent) {
      const Node& par = tree.node(tree.node(c).parent);
      const auto a = static_cast<std::size_t>(tree.node(c).parent_action);
      if (par.kind == NodeKind::Chance) {
        walk *= par.chance_probs[a];
      } else {
        walk *= prof[par.player].probs[static_cast<std::size_t>(
            g.index(par.player).sequence(par.infoset, static_cast<int>(a)))];
      }
    }
    EXPECT_NEAR(r.total, walk, 1e-12);
  }
  for (const auto& info : tree.infosets()) {
    const double first = reach_probability(g, prof, info.members.front()).player[index_of(info.player)];
    for (NodeId h : info.members) {
      EXPECT_NEAR(reach_probability(g, prof, h).player[index_of(info.player)], first, 1e-12);
    }
  }
}

TEST(ExpectedUtility, MatchesEnumerationAndIsBilinear) {
  const auto& g = kuhn();
  std::mt19937_64 rng(9);
  const Profile uniform{uniform_strategy(g.layout(Player::One), Player::One),
                        uniform_strategy(g.layout(Player::Two), Player::Two)};
  const auto xu = seq_of(g, uniform.first);
  const auto yu = seq_of(g, uniform.second);
  EXPECT_NEAR(expected_utility(g, xu, yu), test::enumerate_value(g.tree(), g, uniform), 1e-12);
  EXPECT_NEAR(expected_value(g, Player::One, uniform), test::enumerate_value(g.tree(), g, uniform), 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    const Profile p = test::random_profile(g, rng);
    const Profile q = test::random_profile(g, rng);
    const auto x1 = seq_of(g, p.first), x2 = seq_of(g, q.first);
    const auto y1 = seq_of(g, p.second), y2 = seq_of(g, q.second);
    EXPECT_NEAR(expected_utility(g, x1, y1), test::enumerate_value(g.tree(), g, p), 1e-12);
    EXPECT_NEAR(expected_utility(g, x1, y1, Player::Two), -expected_utility(g, x1, y1), 1e-15);
    const double th = std::uniform_real_distribution<double>(0, 1)(rng);
    SequenceFormStrategy xm{Player::One, x1.x}, ym{Player::Two, y1.x};
    for (std::size_t s = 0; s < xm.x.size(); ++s) xm.x[s] = th * x1.x[s] + (1 - th) * x2.x[s];
    for (std::size_t s = 0; s < ym.x.size(); ++s) ym.x[s] = th * y1.x[s] + (1 - th) * y2.x[s];
    EXPECT_NEAR(expected_utility(g, xm, y1), th * expected_utility(g, x1, y1) + (1 - th) * expected_utility(g, x2, y1),
                1e-12);
    EXPECT_NEAR(expected_utility(g, x1, ym), th * expected_utility(g, x1, y1) + (1 - th) * expected_utility(g, x1, y2),
                1e-12);
  }
}

TEST(ExpectedUtility, ZeroUtilityGame) {
  const TreeGame g(test::single_decision({0.0, 0.0, 0.0}));
  std::mt19937_64 rng(1);
  const Profile p = test::random_profile(g, rng);
  EXPECT_EQ(expected_utility(g, seq_of(g, p.first), seq_of(g, p.second)), 0.0);
}

TEST(GameIo, RoundTripIsExact) {
  const auto& tree = kuhn().tree();
  const std::string text = write_game_json(tree);
  const GameTree back = read_game_json(text);
  EXPECT_EQ(write_game_json(back), text);
  EXPECT_EQ(game_hash(back), game_hash(tree));

  // Utilities that are not short decimals survive bit for bit.
  GameTreeBuilder b("odd");
  const std::vector<std::string> ab = {"a", "b"};
  const NodeId root = b.add_chance(kNoNode, {1.0 / 3.0, 2.0 / 3.0});
  const NodeId d = b.add_decision(root, Player::One, "I", ab);
  b.add_terminal(d, 0.1);
  b.add_terminal(d, std::nextafter(1.0, 2.0));
  b.add_terminal(root, -1e-300);
  const GameTree odd = std::move(b).build();
  const GameTree odd2 = read_game_json(write_game_json(odd));
  for (NodeId i = 0; i < static_cast<NodeId>(odd.num_nodes()); ++i) {
    EXPECT_EQ(odd.node(i).utility, odd2.node(i).utility);
    EXPECT_EQ(odd.node(i).chance_probs, odd2.node(i).chance_probs);
  }
}

TEST(GameIo, HashIgnoresNameAndSeesUtilities) {
  const GameTree a = test::single_decision({1.0, 2.0, 3.0});
  const GameTree b = test::single_decision({1.0, 2.0, 3.5});
  EXPECT_NE(game_hash(a), game_hash(b));
  EXPECT_EQ(game_hash(a).rfind("fnv1a64:", 0), 0u);
}

TEST(GameIo, RejectsMalformed) {
  EXPECT_THROW(read_game_json("{}"), GameError);
  EXPECT_THROW(read_game_json("not json"), GameError);
}

}  // namespace
}  // namespace ccfr
