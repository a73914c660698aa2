#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ccfr/strategy.hpp"
#include "ccfr/tree_game.hpp"

namespace ccfr {

/// Proportional to the positive part; uniform when no entry is positive.
/// Throws std::invalid_argument on an empty list.
std::vector<double> regret_match(std::span<const double> regrets);
void regret_match(std::span<const double> regrets, std::span<double> out);

struct RegretTable {
  std::vector<double> regret;        // cumulative R(I,a), per sequence
  std::vector<double> strategy_sum;  // sum_t pi_i(I) sigma^t(I,a), per sequence
  std::int64_t iterations = 0;
};

struct PlayerState {
  RegretTable table;
  BehavioralStrategy current;
  SequenceFormStrategy current_sequence;
  /// Running mean of the sequence forms of the strategies produced so far.
  SequenceFormStrategy average;

  // Scratch buffers reused across iterations.
  std::vector<double> immediate;
  ValuePass pass;
};

struct CfrState {
  std::array<PlayerState, 2> players;

  PlayerState& operator[](Player p) { return players[static_cast<std::size_t>(index_of(p))]; }
  const PlayerState& operator[](Player p) const { return players[static_cast<std::size_t>(index_of(p))]; }
  Profile current_profile() const { return {players[0].current, players[1].current}; }
};

/// Uniform current strategies, zero regrets, no iterations.
CfrState make_cfr_state(const StrategicGame& game);

/// One regret-matching update for player p against a fixed opponent strategy.
/// Accumulates r(I,a) = v(I,a) - v(I), where v are the (optionally tilted)
/// counterfactual values of p's current strategy, then regret-matches a new
/// current strategy and folds its sequence form into the running average.
void cfr_iterate(const StrategicGame& game, CfrState& state, Player p, std::span<const double> opponent_behavioral,
                 std::span<const double> tilt = {});

/// One alternating CFR iteration: player two from (sigma1^{t-1}, sigma2^{t-1}),
/// then player one against the new sigma2^t.
void cfr_step(const StrategicGame& game, CfrState& state);

/// The running sequence-form mean. Throws std::logic_error before the first iteration.
SequenceFormStrategy average_strategy(const CfrState& state, Player p);
/// Average behavioral strategy normalised from the cumulative strategy sums.
BehavioralStrategy average_behavioral(const StrategicGame& game, const CfrState& state, Player p);
/// Behavioral form of both running averages.
Profile average_profile(const StrategicGame& game, const CfrState& state);

/// Definition-level counterfactual value for the owner of `infoset`, by walking
/// every member history. With `action`, the owner plays it at the infoset.
double counterfactual_value(const TreeGame& game, const Profile& profile, InfosetId infoset,
                            std::optional<int> action = std::nullopt);

struct BestResponse {
  double value = 0.0;  // from the responder's perspective
  BehavioralStrategy strategy;
};

/// Bottom-up maximisation with ties toward the lowest action index.
/// Throws GameError when the game cannot provide an exact best response for p.
BestResponse exact_best_response(const StrategicGame& game, std::span<const double> opponent_behavioral, Player p);

/// max_x u(x, y) - min_y u(x, y), halved. Nonnegative, zero exactly at a Nash profile.
double exploitability(const StrategicGame& game, const Profile& profile);

/// Regret matching for the responder alone; the value is the best value of the
/// responder's average strategy seen at periodic evaluations.
BestResponse approximate_best_response(const StrategicGame& game, std::span<const double> opponent_behavioral,
                                       Player p, std::int64_t iterations);

/// 1, 2, 5, 10, 20, 50, ... up to and including `last`.
std::vector<std::int64_t> checkpoint_schedule(std::int64_t last);

struct ConvergenceRow {
  std::int64_t iteration = 0;
  double exploitability = 0.0;
  double value = 0.0;  // player one's value of the average profile
  double seconds = 0.0;
};

struct CfrRun {
  CfrState state;
  std::vector<ConvergenceRow> rows;
};

/// Plain CFR for `iterations` alternating steps, evaluating the average profile
/// at each checkpoint.
CfrRun run_cfr(const StrategicGame& game, std::int64_t iterations, std::span<const std::int64_t> checkpoints);

void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows);

}  // namespace ccfr
