#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ccfr/tree_game.hpp"

namespace ccfr {

/// Betting and deck parameters of a limit poker variant with one private card
/// per player and an optional single public card dealt before the second round.
struct PokerRules {
  std::string name = "poker";
  std::vector<std::string> rank_names = {"J", "Q", "K"};
  int suits = 1;
  double ante = 1.0;
  std::vector<double> bet_sizes = {1.0};  // one entry per betting round
  int max_bets_per_round = 1;             // bet + raises
};

PokerRules kuhn_rules();
PokerRules leduc_rules();

enum class TerminalKind : std::uint8_t { None, Fold, Showdown };

/// Card-level annotations of one node. Ranks are indices into rank_names, -1
/// while undealt.
struct PokerNodeInfo {
  std::array<int, 2> hand = {-1, -1};
  int board = -1;
  std::int32_t public_state = 0;
  TerminalKind terminal = TerminalKind::None;
};

/// Public histories: betting actions of every round plus the board rank.
struct PublicState {
  std::string label;       // e.g. "cb/K:b"; empty at the root
  std::int32_t parent = -1;
  bool terminal = false;
  TerminalKind kind = TerminalKind::None;
};

/// A poker game tree with the annotations needed to simulate partial observations.
///
/// Cards are dealt per suit, but infosets are keyed by rank (or by abstraction
/// bucket), so strategies live at rank level.
class PokerGame {
 public:
  PokerGame(PokerRules rules, std::shared_ptr<const TreeGame> game, std::vector<PokerNodeInfo> nodes,
            std::vector<PublicState> public_states);

  const PokerRules& rules() const { return rules_; }
  const TreeGame& game() const { return *game_; }
  std::shared_ptr<const TreeGame> game_ptr() const { return game_; }
  const GameTree& tree() const { return game_->tree(); }
  const PokerNodeInfo& node_info(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::span<const PublicState> public_states() const { return public_states_; }
  int num_ranks() const { return static_cast<int>(rules_.rank_names.size()); }

  /// True when `public_state` extends (or equals) `prefix`.
  bool public_prefix(std::int32_t prefix, std::int32_t public_state) const;
  /// Nodes where the public history first equals the state with both private cards
  /// dealt: the children of chance nodes and the targets of public actions.
  bool is_entry(NodeId id) const;
  bool is_fold_action(InfosetId infoset, int action) const;

 private:
  PokerRules rules_;
  std::shared_ptr<const TreeGame> game_;
  std::vector<PokerNodeInfo> nodes_;
  std::vector<PublicState> public_states_;
};

/// Maps a dealt private card (and board, when dealt) to an infoset key.
/// The default keys by exact rank.
struct CardAbstraction {
  std::string name = "none";
  /// Preflop key per rank.
  std::vector<std::string> preflop;
  /// Postflop key given (rank, board rank); appended to the preflop key.
  std::vector<std::vector<std::string>> postflop;
};

CardAbstraction identity_abstraction(const PokerRules& rules);
/// "JQ.K/pair.nopair": J and Q share a preflop bucket, postflop hands are pair
/// or no pair. Throws GameError for other names.
CardAbstraction named_abstraction(const std::string& name, const PokerRules& rules);

PokerGame build_poker(const PokerRules& rules, const CardAbstraction& abstraction);
PokerGame build_kuhn();
PokerGame build_leduc();

struct AbstractedPoker {
  PokerGame full;
  PokerGame abstract;
  /// For each full-game infoset of each player, the abstract infoset it maps to.
  std::array<std::vector<InfosetId>, 2> infoset_map;
};

AbstractedPoker build_abstraction(const PokerRules& rules, const std::string& name);

/// Lifts an abstract behavioral strategy to the full game (each full infoset
/// copies its abstract infoset's distribution).
BehavioralStrategy lift_strategy(const AbstractedPoker& a, const BehavioralStrategy& abstract_strategy);

}  // namespace ccfr
