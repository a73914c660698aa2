#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccfr/game_tree.hpp"

namespace ccfr {

/// One player's decision structure as seen by the regret minimizers.
///
/// Sequences are numbered densely: index 0 is the empty sequence, and the
/// actions of infoset I occupy [first_sequence[I], first_sequence[I] + action_count[I]).
/// Every sequence s lists the infosets the player may face next after playing s,
/// each with a nonnegative weight: 1 for perfect-recall trees (chance and opponent
/// reach live in the immediate values), transition probabilities for
/// state-based games. Inflow into an infoset is sum over predecessors of weight * x[s].
struct DecisionLayout {
  std::vector<std::int32_t> first_sequence;
  std::vector<std::int32_t> action_count;
  /// Infoset order with every successor before its predecessors.
  std::vector<std::int32_t> bottom_up;
  std::vector<std::int32_t> infoset_of_sequence;  // -1 for the empty sequence
  std::vector<std::int32_t> successor_begin;      // CSR offsets, size num_sequences() + 1
  std::vector<std::int32_t> successor_infoset;
  std::vector<double> successor_weight;

  std::int32_t num_infosets() const { return static_cast<std::int32_t>(first_sequence.size()); }
  std::int32_t num_sequences() const { return static_cast<std::int32_t>(infoset_of_sequence.size()); }
  std::int32_t max_actions() const;

  /// Fills the derived arrays from per-infoset action counts and per-sequence
  /// successor lists, and computes a bottom-up order. Throws GameError on cycles.
  static DecisionLayout from_successors(std::vector<std::int32_t> action_counts,
                                        const std::vector<std::vector<std::pair<std::int32_t, double>>>& successors);
};

/// Per-sequence action probabilities: entry s holds sigma(I, a) for s = (I, a).
/// Entry 0 is unused and kept at 1.
struct BehavioralStrategy {
  Player owner = Player::One;
  std::vector<double> probs;
};

/// Realization-plan vector over the owner's sequences; x[0] is the empty sequence.
struct SequenceFormStrategy {
  Player owner = Player::One;
  std::vector<double> x;
};

struct Profile {
  BehavioralStrategy first;
  BehavioralStrategy second;

  const BehavioralStrategy& operator[](Player p) const { return p == Player::One ? first : second; }
  BehavioralStrategy& operator[](Player p) { return p == Player::One ? first : second; }
};

struct ValidationReport {
  double empty_sequence_violation = 0.0;
  double nonnegativity_violation = 0.0;
  double flow_violation = 0.0;
  std::int32_t worst_infoset = -1;  // infoset with the largest flow violation

  double max_violation() const;
  bool ok(double tolerance = 1e-9) const { return max_violation() <= tolerance; }
};

/// Game interface consumed by the CFR and CCFR solvers.
class StrategicGame {
 public:
  virtual ~StrategicGame() = default;

  virtual const DecisionLayout& layout(Player p) const = 0;

  /// Values accrued by player p directly after each of its sequences, before its
  /// next decision, given the opponent's behavioral strategy, from p's perspective.
  /// Entry 0 holds the value accrued before p's first decision.
  virtual void immediate_values(Player p, std::span<const double> opponent_behavioral,
                                std::span<double> out) const = 0;

  virtual bool perfect_recall(Player p) const = 0;
  /// True when a bottom-up maximization yields a best response over all of p's strategies.
  virtual bool supports_exact_best_response(Player p) const { return perfect_recall(p); }

  virtual double utility_range() const = 0;
  virtual std::string name() const = 0;
  virtual std::string hash() const = 0;
  virtual std::string sequence_label(Player p, std::int32_t sequence) const = 0;
};

BehavioralStrategy uniform_strategy(const DecisionLayout& layout, Player owner);
void normalize_or_uniform(const DecisionLayout& layout, std::span<double> probs);

/// Realization plan of a behavioral strategy (forward pass over the layout).
void realization(const DecisionLayout& layout, std::span<const double> behavioral, std::span<double> x);
SequenceFormStrategy realization(const DecisionLayout& layout, const BehavioralStrategy& behavioral);

/// sigma(I,a) = x(I,a) / inflow(I); uniform where the inflow is zero.
BehavioralStrategy behavioral_from_realization(const DecisionLayout& layout, const SequenceFormStrategy& x);

/// Checks x[empty] = 1, x >= 0 and sum_a x(I,a) = inflow(I) for every infoset.
ValidationReport validate(const DecisionLayout& layout, std::span<const double> x);

enum class Aggregate { Mix, Max };

struct ValuePass {
  std::vector<double> action;   // per sequence
  std::vector<double> infoset;  // per infoset
  double root = 0.0;
};

/// Bottom-up counterfactual value recursion:
///   action(I,a) = immediate(I,a) + sum_succ w * infoset(I') - tilt(I,a)
///   infoset(I)  = sum_a sigma(I,a) action(I,a)   (Mix)  or  max_a action(I,a) (Max)
///   root        = immediate(empty) + sum_succ(empty) w * infoset(I')
/// An empty tilt span means no tilt. For Max, `argmax` (if non-null) receives the
/// lowest maximizing action per infoset.
void bottom_up_values(const DecisionLayout& layout, std::span<const double> immediate,
                      std::span<const double> behavioral, std::span<const double> tilt, Aggregate aggregate,
                      ValuePass& out, std::vector<std::int32_t>* argmax = nullptr);

/// u_p(sigma_p, sigma_-p) evaluated through the layout recursion.
double expected_value(const StrategicGame& game, Player p, const Profile& profile);

}  // namespace ccfr
