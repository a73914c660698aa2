#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccfr/constraints.hpp"
#include "ccfr/regret.hpp"
#include "ccfr/tree_game.hpp"

namespace ccfr {

enum class StepRule { Constant, Decaying, Corollary };

std::string to_string(StepRule rule);
StepRule step_rule_from_string(const std::string& name);

struct CcfrConfig {
  std::int64_t iterations = 1000;
  /// Multiplier bound; negative selects 100 * utility range.
  double beta = -1.0;
  /// When false the multipliers are only floored at zero.
  bool clamp = true;
  StepRule step_rule = StepRule::Constant;
  /// alpha for Constant, c in c / sqrt(t) for Decaying; unused for Corollary.
  double step = 1.0;
  Player constrained = Player::One;
  bool beta_doubling = false;
  double doubling_threshold = 0.9;
  int doubling_cap = 10;
  /// Iterations at which diagnostics are recorded; empty selects 1, 2, 5, 10, ...
  std::vector<std::int64_t> checkpoints;
  /// Compute best-response exploitability at checkpoints.
  bool exploitability = true;
  /// Keep every (lambda^t, f(x^t)) pair in the result.
  bool record_history = false;
  /// Seeds the sampled bound-constant estimates for nonlinear constraints.
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument for T < 1, alpha <= 0, or a threshold outside (0, 1).
void validate(const CcfrConfig& config);

/// The beta actually used: config.beta, 100 * range when negative, +inf when unclamped.
double effective_beta(const CcfrConfig& config, double utility_range);

struct LambdaRecord {
  std::vector<double> lambda;
  std::vector<double> violation;
};

/// Multipliers in [0, beta]^k with running sums for the mean and the regret.
struct LagrangeState {
  std::vector<double> lambda;
  double beta = 0.0;
  std::int64_t updates = 0;
  std::vector<double> lambda_sum;     // sum_t lambda^t
  std::int64_t pairs = 0;
  std::vector<double> violation_sum;  // sum_t f_i(x^t)
  double weighted_sum = 0.0;          // sum_t sum_i lambda_i^t f_i(x^t)

  std::vector<double> mean() const;
  /// max over lambda* in [0, beta]^k of (1/T) sum_t sum_i (lambda*_i - lambda_i^t) f_i(x^t).
  double regret() const;
};

LagrangeState make_lagrange_state(std::size_t k, double beta, std::span<const double> initial = {});

/// lambda_i <- clamp(lambda_i + alpha f_i, 0, beta); folds the new lambda into the mean.
void lambda_update(LagrangeState& state, std::span<const double> violations, double alpha);
/// Accumulates the pair (current lambda, f(x^t)) used by regret().
void record_pair(LagrangeState& state, std::span<const double> violations);

/// Exact lambda regret of a history: per coordinate the best fixed lambda* is
/// beta when sum_t f_i > 0 and 0 otherwise. Throws on an empty history.
double measure_lambda_regret(std::span<const LambdaRecord> history, double beta);

double step_size(const CcfrConfig& config, std::int64_t t, double beta, double g_bound);

/// c(I,a) = sum_i lambda_i d f_i(x) / d x(I,a) for every sequence.
std::vector<double> tilt_vector(const ConstraintSet& constraints, std::span<const double> lambda,
                                std::span<const double> x);
double tilt(const ConstraintSet& constraints, std::span<const double> lambda, std::span<const double> x,
            std::int32_t sequence);

/// One constrained regret update: the plain update with action values reduced by
/// the tilt at x, the sequence form the tilt is linearised around.
void ccfr_iterate(const StrategicGame& game, CfrState& state, Player constrained,
                  std::span<const double> opponent_behavioral, const ConstraintSet& constraints,
                  std::span<const double> lambda, std::span<const double> x);

/// Tilted value written out as a sum over descendants rather than a recursion:
///   v(I,a) - c(I,a) - sum over descendant (I',a') of pi_i(Ia -> I'a') c(I',a')
/// and without `action` the sigma-weighted analogue at I. The tilt is taken at
/// SEQ of the owner's strategy. Test oracle for ccfr_iterate.
double tilted_values_closed_form(const TreeGame& game, const Profile& profile, std::span<const double> lambda,
                                 const ConstraintSet& constraints, InfosetId infoset,
                                 std::optional<int> action = std::nullopt);

struct BoundReport {
  double delta_u = 0.0;
  std::size_t k = 0;
  std::int32_t actions = 0;              // max fan-out over both players
  std::int32_t actions_constrained = 0;  // max fan-out of the constrained player
  double f_bound = 0.0;                  // F = max ||grad f_i||_1
  double g_bound = 0.0;                  // G = max |f_i(x)|
  bool exact_f_g = true;                 // false when sampled
  double m = 0.0;                        // max over both players
  double m_constrained = 0.0;
};

/// Delta_u, |A|, M by bottom-up maximisation of expected infoset visits, and F, G
/// (exact for linear constraints, otherwise sampled at random pure and mixed
/// strategies).
BoundReport compute_bound_constants(const StrategicGame& game, const ConstraintSet& constraints, Player constrained,
                                    std::uint64_t seed = 0, int samples = 1000);

/// max over pure strategies of the expected number of visited infosets.
double max_infoset_visits(const DecisionLayout& layout);

struct TheoremBounds {
  double thm1 = 0.0;  // exploitability gap
  double thm2 = 0.0;  // violation of each constraint
  std::vector<double> thm3;  // per constraint, needs lambda*; +inf where beta <= lambda*_i
  std::vector<double> corollary_violation;
  double corollary_exploitability = 0.0;
};

TheoremBounds theorem_bounds(const BoundReport& report, std::int64_t t, double beta, double lambda_regret,
                             std::span<const double> lambda_star = {});

struct Checkpoint {
  std::int64_t iteration = 0;
  std::vector<double> violations;  // f_i of the average strategy
  double positive_violation = 0.0;
  double exploitability = 0.0;     // 0.5 (max_x u(x, ybar) - min_y u(xbar, y))
  double value = 0.0;              // player one's value of the average profile
  std::vector<double> lambda;
  std::vector<double> lambda_mean;
  double lambda_regret = 0.0;
  double thm1 = 0.0;
  double thm2 = 0.0;
  double seconds = 0.0;
};

struct DoublingStep {
  double beta = 0.0;
  double max_mean_lambda = 0.0;
  bool doubled = false;
};

struct CcfrResult {
  CfrState state;
  LagrangeState lagrange;
  Profile average;  // behavioral form of the running sequence-form means
  std::array<SequenceFormStrategy, 2> average_sequence;
  std::vector<Checkpoint> diagnostics;
  BoundReport bounds;
  double beta = 0.0;
  double corollary_step = 0.0;
  std::vector<DoublingStep> doubling;
  bool doubling_cap_hit = false;
  std::vector<LambdaRecord> history;
};

/// Called after every iteration with the iteration number and solver state.
using IterationObserver = std::function<void(std::int64_t, const CfrState&, const LagrangeState&)>;

/// Algorithm loop: the unconstrained player updates against sigma_c^{t-1}, the
/// multipliers take a step on f(x_c^{t-1}), then the constrained player updates
/// against the new opponent strategy with tilted values.
CcfrResult solve(const StrategicGame& game, const ConstraintSet& constraints, const CcfrConfig& config,
                 const IterationObserver& observer = {}, std::span<const double> initial_lambda = {});

/// Repeats solve, doubling beta (from at least 1) while some mean multiplier is
/// within the threshold of beta. Multipliers are warm-started, regrets reset.
CcfrResult beta_doubling_solve(const StrategicGame& game, const ConstraintSet& constraints, const CcfrConfig& config);

}  // namespace ccfr
