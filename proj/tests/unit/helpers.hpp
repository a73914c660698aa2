#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccfr/game_tree.hpp"
#include "ccfr/strategy.hpp"
#include "ccfr/tree_game.hpp"

namespace ccfr::test {

// Matching pennies as a two-level tree: player one picks, player two picks
// without seeing it. Player one wins 1 on a match.
inline GameTree matching_pennies() {
  GameTreeBuilder b("pennies");
  const std::vector<std::string> hs = {"heads", "tails"};
  const NodeId root = b.add_decision(kNoNode, Player::One, "p1", hs);
  for (int a = 0; a < 2; ++a) {
    const NodeId n = b.add_decision(root, Player::Two, "p2", hs);
    for (int c = 0; c < 2; ++c) b.add_terminal(n, a == c ? 1.0 : -1.0);
  }
  return std::move(b).build();
}

// One decision for player one over three actions, utilities given.
inline GameTree single_decision(std::vector<double> utilities) {
  GameTreeBuilder b("single");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < utilities.size(); ++i) names.push_back("a" + std::to_string(i));
  const NodeId root = b.add_decision(kNoNode, Player::One, "only", names);
  for (double u : utilities) b.add_terminal(root, u);
  return std::move(b).build();
}

inline BehavioralStrategy random_behavioral(const DecisionLayout& layout, Player owner, std::mt19937_64& rng,
                                            bool pure = false) {
  BehavioralStrategy s{owner, std::vector<double>(static_cast<std::size_t>(layout.num_sequences()), 1.0)};
  std::exponential_distribution<double> draw(1.0);
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    const auto first = static_cast<std::size_t>(layout.first_sequence[static_cast<std::size_t>(i)]);
    const auto n = static_cast<std::size_t>(layout.action_count[static_cast<std::size_t>(i)]);
    if (pure) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      const std::size_t k = pick(rng);
      for (std::size_t a = 0; a < n; ++a) s.probs[first + a] = a == k ? 1.0 : 0.0;
      continue;
    }
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) total += (s.probs[first + a] = draw(rng));
    for (std::size_t a = 0; a < n; ++a) s.probs[first + a] /= total;
  }
  return s;
}

inline Profile random_profile(const StrategicGame& game, std::mt19937_64& rng) {
  return {random_behavioral(game.layout(Player::One), Player::One, rng),
          random_behavioral(game.layout(Player::Two), Player::Two, rng)};
}

// Walks every root-to-terminal path of a tree and sums reach times utility.
inline double enumerate_value(const GameTree& tree, const TreeGame& game, const Profile& profile) {
  double total = 0.0;
  std::vector<std::pair<NodeId, double>> stack = {{tree.root(), 1.0}};
  while (!stack.empty()) {
    auto [id, p] = stack.back();
    stack.pop_back();
    const Node& n = tree.node(id);
    if (n.kind == NodeKind::Terminal) {
      total += p * n.utility;
      continue;
    }
    for (std::size_t a = 0; a < n.children.size(); ++a) {
      double q = 0.0;
      if (n.kind == NodeKind::Chance) {
        q = n.chance_probs[a];
      } else {
        const auto& idx = game.index(n.player);
        q = profile[n.player].probs[static_cast<std::size_t>(idx.sequence(n.infoset, static_cast<int>(a)))];
      }
      if (q > 0.0) stack.emplace_back(n.children[a], p * q);
    }
  }
  return total;
}

// Every pure strategy of a player in a tree game, as behavioral vectors.
inline std::vector<BehavioralStrategy> pure_strategies(const DecisionLayout& layout, Player owner) {
  std::vector<BehavioralStrategy> out;
  const std::int32_t n = layout.num_infosets();
  std::vector<std::int32_t> choice(static_cast<std::size_t>(n), 0);
  for (;;) {
    BehavioralStrategy s{owner, std::vector<double>(static_cast<std::size_t>(layout.num_sequences()), 0.0)};
    s.probs[0] = 1.0;
    for (std::int32_t i = 0; i < n; ++i) {
      s.probs[static_cast<std::size_t>(layout.first_sequence[static_cast<std::size_t>(i)] +
                                       choice[static_cast<std::size_t>(i)])] = 1.0;
    }
    out.push_back(std::move(s));
    std::int32_t i = 0;
    for (; i < n; ++i) {
      auto& c = choice[static_cast<std::size_t>(i)];
      if (++c < layout.action_count[static_cast<std::size_t>(i)]) break;
      c = 0;
    }
    if (i == n) break;
  }
  return out;
}

inline std::int32_t sequence_by_label(const StrategicGame& game, Player p, const std::string& label) {
  for (std::int32_t s = 1; s < game.layout(p).num_sequences(); ++s) {
    if (game.sequence_label(p, s) == label) return s;
  }
  throw std::runtime_error("no sequence " + label);
}

}  // namespace ccfr::test
