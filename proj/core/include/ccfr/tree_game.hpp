#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccfr/game_tree.hpp"
#include "ccfr/strategy.hpp"

namespace ccfr {

/// Dense numbering of one player's sequences in a game tree.
///
/// Sequence 0 is the empty sequence. The actions of the infoset with local
/// index i occupy a contiguous block, in local-index order.
class SequenceIndex {
 public:
  SequenceIndex() = default;
  SequenceIndex(const GameTree& tree, Player p);

  Player player() const { return player_; }
  std::int32_t size() const { return static_cast<std::int32_t>(infoset_of_.size()); }

  std::int32_t sequence(InfosetId global, int action) const;
  std::int32_t first_sequence(InfosetId global) const;
  /// The sequence entering the infoset (taken from its first member node).
  std::int32_t parent_sequence(InfosetId global) const;
  /// Global infoset id of a sequence, -1 for the empty sequence.
  InfosetId infoset_of(std::int32_t seq) const { return infoset_of_.at(static_cast<std::size_t>(seq)); }
  int action_of(std::int32_t seq) const { return action_of_.at(static_cast<std::size_t>(seq)); }
  /// Infosets whose parent sequence is `seq`, by ascending local index.
  std::span<const InfosetId> infosets_after(std::int32_t seq) const;
  /// The player's last sequence on the path from the root to `node`.
  std::int32_t last_sequence(NodeId node) const { return last_.at(static_cast<std::size_t>(node)); }

 private:
  Player player_ = Player::One;
  std::vector<InfosetId> infoset_of_;
  std::vector<int> action_of_;
  std::vector<std::int32_t> first_of_local_;
  std::vector<std::int32_t> parent_of_local_;
  std::vector<std::int32_t> local_of_global_;
  std::vector<std::int32_t> after_begin_;
  std::vector<InfosetId> after_;
  std::vector<std::int32_t> last_;
};

/// Aggregated payoff-matrix entry: sum over terminals z with the given last
/// sequences of chance reach times player one's utility.
struct PayoffEntry {
  std::int32_t seq1 = 0;
  std::int32_t seq2 = 0;
  double value = 0.0;
};

/// StrategicGame view of a game tree via its sparse sequence-form payoff matrix.
class TreeGame final : public StrategicGame {
 public:
  explicit TreeGame(GameTree tree);

  const GameTree& tree() const { return tree_; }
  const SequenceIndex& index(Player p) const { return index_[index_of(p)]; }
  std::span<const PayoffEntry> payoff_entries() const { return payoff_; }
  double chance_reach(NodeId node) const { return chance_reach_.at(static_cast<std::size_t>(node)); }
  /// Local infoset index (the layout's infoset numbering) of a global infoset id.
  std::int32_t layout_infoset(InfosetId global) const { return tree_.infoset(global).local_index; }

  const DecisionLayout& layout(Player p) const override { return layout_[index_of(p)]; }
  void immediate_values(Player p, std::span<const double> opponent_behavioral,
                        std::span<double> out) const override;
  bool perfect_recall(Player p) const override { return tree_.perfect_recall(p); }
  double utility_range() const override { return tree_.utility_range(); }
  std::string name() const override { return tree_.name(); }
  std::string hash() const override { return hash_; }
  std::string sequence_label(Player p, std::int32_t sequence) const override;

 private:
  GameTree tree_;
  std::array<SequenceIndex, 2> index_;
  std::array<DecisionLayout, 2> layout_;
  std::vector<PayoffEntry> payoff_;
  std::vector<double> chance_reach_;
  std::string hash_;
};

/// SEQ(sigma): entry (I,a) is the owner's reach of I times sigma(I,a).
/// Throws GameError for imperfect-recall owners and for distributions that are
/// negative or do not sum to 1 within 1e-12.
SequenceFormStrategy seq_of(const TreeGame& game, const BehavioralStrategy& behavioral);

/// Inverse of seq_of; uniform at infosets with zero inflow.
BehavioralStrategy behavioral_of(const TreeGame& game, const SequenceFormStrategy& x);

struct ReachProbability {
  double total = 1.0;
  std::array<double, 2> player = {1.0, 1.0};
  double chance = 1.0;
};

ReachProbability reach_probability(const TreeGame& game, const Profile& profile, NodeId node);

/// sum_z pi_c(z) x[z] y[z] u(z) from the perspective player's point of view.
double expected_utility(const TreeGame& game, const SequenceFormStrategy& x, const SequenceFormStrategy& y,
                        Player perspective = Player::One);

ValidationReport validate(const TreeGame& game, const SequenceFormStrategy& x);

}  // namespace ccfr
