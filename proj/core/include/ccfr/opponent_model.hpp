#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ccfr/ccfr.hpp"
#include "ccfr/constraints.hpp"
#include "ccfr/poker.hpp"

namespace ccfr {

/// One observed game from the probe player's seat.
struct ObservationRecord {
  int own = -1;                  // our rank
  std::int32_t public_state = 0; // terminal public state
  int opponent = -1;             // opponent rank at showdowns, -1 otherwise
};

struct ObservationLog {
  Player probe = Player::One;
  std::string game_hash;
  std::string probe_description = "uniform over non-fold actions";
  std::vector<ObservationRecord> records;

  std::int64_t size() const { return static_cast<std::int64_t>(records.size()); }
};

/// Plays n games with `probe` choosing uniformly among its non-fold actions and
/// the opponent following `target`. Chance is sampled at card level. The
/// opponent's rank is recorded only when the game ends in a showdown.
ObservationLog simulate_observations(const PokerGame& poker, const Profile& target, Player probe, std::int64_t n,
                                     std::uint64_t seed);

/// Header lines start with '#'; then one "own public_state opponent" line per game.
void write_observation_log(std::ostream& out, const ObservationLog& log);
ObservationLog read_observation_log(std::istream& in);

/// The probe's probability of action `a` at one of its infosets.
double probe_probability(const PokerGame& poker, InfosetId infoset, int action);
/// Behavioral form of the probe strategy for player p.
BehavioralStrategy probe_strategy(const PokerGame& poker, Player p);

enum class ReachEstimate {
  Empirical,  // our own reach estimated from action frequencies in the log
  Known,      // the probe's exact probabilities
};

struct OpponentModelOptions {
  double confidence = 0.95;
  ReachEstimate reach = ReachEstimate::Empirical;
};

/// Per-statistic coefficient vectors over the opponent's sequences before the
/// interval is applied. `count` is the number of logged games realizing it.
struct ReachStatistic {
  std::string label;
  bool showdown = false;
  std::vector<std::pair<std::int32_t, double>> coefficients;
  std::int64_t count = 0;
};

/// Two kinds of statistic, both linear in the opponent's sequence form:
///   (own rank, public state)            Pr[dealt the rank and the state occurs]
///   (own rank, opponent rank, showdown) Pr[that showdown is reached]
/// Statistics whose coefficients vanish or touch only the empty sequence are
/// omitted; they do not depend on the opponent.
std::vector<ReachStatistic> reach_statistics(const PokerGame& poker, const ObservationLog& log,
                                             ReachEstimate reach = ReachEstimate::Empirical);

/// Wilson bounds on every statistic, each turned into a lower and an upper
/// linear constraint. Throws std::invalid_argument for an empty log.
ConstraintSet build_opponent_constraints(const ObservationLog& log, const PokerGame& poker,
                                         const OpponentModelOptions& options = {},
                                         std::vector<IntervalBound>* intervals = nullptr);

/// The infinite-data limit: every statistic pinned to its exact value under the
/// target and the probe (L = U).
ConstraintSet exact_opponent_constraints(const PokerGame& poker, const Profile& target, Player probe);

struct CounterProfile {
  Profile profile;         // our strategy from the run in each seat
  CcfrResult seat[2];      // seat[0]: we are player one, the opponent player two
};

/// Runs solve once per seat with the modeled opponent as the constrained player.
/// constraints[s] constrains the opponent when we sit in seat s.
CounterProfile robust_counter_profile(const PokerGame& poker, const ConstraintSet (&constraints)[2],
                                      const CcfrConfig& config);

/// Our value averaged over both seats: 0.5 (u1(ours1, target2) + u2(target1, ours2)).
double value_against(const PokerGame& poker, const Profile& ours, const Profile& target);
/// Same average for exact best responses to the target.
double best_response_value(const PokerGame& poker, const Profile& target);

}  // namespace ccfr
