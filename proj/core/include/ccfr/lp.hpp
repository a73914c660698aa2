#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ccfr/constraints.hpp"
#include "ccfr/tree_game.hpp"

namespace ccfr {

enum class RowSense { LessEqual, Equal, GreaterEqual };

struct LpRow {
  std::string name;
  std::vector<std::pair<std::int32_t, double>> coefficients;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

/// maximize objective . z subject to rows, z_j >= 0 unless free[j].
struct LinearProgram {
  std::vector<std::string> variable_names;
  std::vector<double> objective;
  std::vector<bool> free;
  std::vector<LpRow> rows;

  std::int32_t num_variables() const { return static_cast<std::int32_t>(objective.size()); }
  std::int32_t add_variable(std::string name, double cost = 0.0, bool is_free = false);
  std::size_t add_row(LpRow row);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, PivotLimit };

std::string to_string(LpStatus status);

struct SimplexOptions {
  double pivot_tolerance = 1e-9;
  double feasibility_tolerance = 1e-9;
  std::int64_t max_pivots = 10'000'000;
  /// Consecutive degenerate pivots before pricing falls back to Bland's rule.
  int degenerate_switch = 200;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> primal;
  /// One per row, signed for maximisation: >= 0 on binding <= rows, <= 0 on >= rows.
  std::vector<double> duals;
  std::int64_t pivots = 0;
  double primal_residual = 0.0;        // worst row or bound violation
  double complementary_residual = 0.0; // worst |dual * slack|
};

/// Two-phase dense tableau simplex, Bland's rule against cycling. Deterministic.
LpResult simplex_solve(const LinearProgram& lp, const SimplexOptions& options = {});

/// CPLEX LP text format (Maximize / Subject To / Bounds / End).
void write_lp(std::ostream& out, const LinearProgram& lp, const std::string& comment = {});

class ScaleGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sequence-form LP of max_x min_y x'Ay for the constrained player, with the
/// inner minimisation replaced by its dual, plus extra linear rows on x.
/// Variables: the constrained player's sequences, then one free value per
/// opponent infoset preceded by the root value.
struct SequenceLp {
  Player player = Player::One;
  std::int32_t num_x = 0;
  std::int32_t num_v = 0;
  LinearProgram program;
  std::vector<std::size_t> extra_rows;
};

/// Throws std::invalid_argument for nonlinear constraints or wrong dimensions
/// and GameError for imperfect recall.
SequenceLp build_sequence_lp(const TreeGame& game, const ConstraintSet& extra, Player constrained = Player::One);

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  SequenceFormStrategy x;
  double value = 0.0;          // from the constrained player's perspective
  std::vector<double> lambda;  // duals of the extra rows
  std::int64_t pivots = 0;
  double primal_residual = 0.0;
  double complementary_residual = 0.0;
  double seconds = 0.0;
};

LpSolution solve_sequence_lp(const SequenceLp& lp, const SimplexOptions& options = {});

inline constexpr std::int32_t kLpSequenceGuard = 5000;

/// Exact constrained optimum. Refuses (ScaleGuardError, with the sizes) when a
/// player has more than `guard` sequences unless `override_guard`.
LpSolution constrained_equilibrium(const TreeGame& game, const ConstraintSet& constraints,
                                   Player constrained = Player::One, bool override_guard = false,
                                   std::int32_t guard = kLpSequenceGuard);

/// max over feasible x of u_c(x, y) for a fixed opponent strategy.
LpSolution constrained_best_response(const TreeGame& game, const ConstraintSet& constraints, Player constrained,
                                     std::span<const double> opponent_behavioral);

}  // namespace ccfr
