#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ccfr {

enum class Player : std::uint8_t { One = 0, Two = 1 };

constexpr Player opponent(Player p) { return p == Player::One ? Player::Two : Player::One; }
constexpr int index_of(Player p) { return static_cast<int>(p); }
/// +1 for player one, -1 for player two. Utilities are stored for player one only.
constexpr double perspective_sign(Player p) { return p == Player::One ? 1.0 : -1.0; }
std::string to_string(Player p);
Player player_from_number(int number);

enum class NodeKind : std::uint8_t { Decision, Chance, Terminal };

using NodeId = std::int32_t;
using InfosetId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// Thrown for malformed games and strategies.
class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Node {
  NodeKind kind = NodeKind::Terminal;
  Player player = Player::One;  // decision nodes only
  InfosetId infoset = -1;       // decision nodes only
  NodeId parent = kNoNode;
  std::int32_t parent_action = -1;
  std::vector<NodeId> children;
  std::vector<double> chance_probs;  // chance nodes only
  double utility = 0.0;              // terminal nodes only, player one's payoff
};

struct Infoset {
  Player player = Player::One;
  std::int32_t local_index = -1;  // position within the owner's infoset list
  std::string label;
  std::vector<std::string> actions;
  std::vector<NodeId> members;

  int num_actions() const { return static_cast<int>(actions.size()); }
};

/// Immutable two-player zero-sum game tree stored as an index arena.
///
/// Node ids are assigned parent-first, so increasing id order is a valid
/// topological order. Only player one's utility is stored.
class GameTree {
 public:
  NodeId root() const { return 0; }
  std::size_t num_nodes() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::span<const Node> nodes() const { return nodes_; }

  std::size_t num_infosets() const { return infosets_.size(); }
  const Infoset& infoset(InfosetId id) const { return infosets_.at(static_cast<std::size_t>(id)); }
  std::span<const Infoset> infosets() const { return infosets_; }
  /// Global ids of the player's infosets, ordered by local index.
  std::span<const InfosetId> infosets_of(Player p) const { return player_infosets_[index_of(p)]; }
  std::optional<InfosetId> find_infoset(Player p, std::string_view label) const;

  std::span<const NodeId> terminals() const { return terminals_; }
  std::span<const NodeId> topological_order() const { return topological_; }

  bool perfect_recall(Player p) const { return perfect_recall_[index_of(p)]; }
  double utility(NodeId terminal, Player perspective) const {
    return perspective_sign(perspective) * node(terminal).utility;
  }
  double max_utility() const { return max_utility_; }
  double min_utility() const { return min_utility_; }
  double utility_range() const { return max_utility_ - min_utility_; }

  const std::string& name() const { return name_; }

 private:
  friend class GameTreeBuilder;
  GameTree() = default;

  std::string name_;
  std::vector<Node> nodes_;
  std::vector<Infoset> infosets_;
  std::vector<InfosetId> player_infosets_[2];
  std::vector<NodeId> terminals_;
  std::vector<NodeId> topological_;
  bool perfect_recall_[2] = {true, true};
  double max_utility_ = 0.0;
  double min_utility_ = 0.0;
};

/// Incremental construction of a GameTree. Children are attached to their
/// parent in action order; the first node added (with parent kNoNode) is the root.
class GameTreeBuilder {
 public:
  explicit GameTreeBuilder(std::string name = "game");

  NodeId add_chance(NodeId parent, std::vector<double> probabilities);
  NodeId add_decision(NodeId parent, Player player, std::string_view infoset_label,
                      std::span<const std::string> actions);
  NodeId add_terminal(NodeId parent, double utility_player_one);

  std::size_t num_nodes() const { return tree_.nodes_.size(); }

  /// Validates structure, chance distributions and infoset consistency, and
  /// computes the perfect-recall flags. Throws GameError on malformed input.
  GameTree build() &&;

 private:
  NodeId attach(NodeId parent, Node node);

  GameTree tree_;
  std::unordered_map<std::string, InfosetId> infoset_lookup_[2];
};

}  // namespace ccfr
