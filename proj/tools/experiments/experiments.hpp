#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "ccfr/ccfr.hpp"
#include "ccfr/lp.hpp"
#include "ccfr/transit.hpp"
#include "experiments/config.hpp"

namespace ccfr::experiments {

struct LoadedGame {
  std::shared_ptr<const StrategicGame> game;
  std::shared_ptr<const TreeGame> tree;        // null for transit
  std::shared_ptr<const TransitGame> transit;  // null otherwise
};

LoadedGame load_game(const GameSpec& spec);

std::int32_t resolve_sequence(const StrategicGame& game, Player p, const SequenceRef& ref);
ConstraintSet build_constraints(const std::vector<ConstraintSpec>& specs, const LoadedGame& game, Player constrained);

/// Writes through a temporary file and a rename.
void write_file(const std::filesystem::path& path, const std::string& content);

/// Per-sequence strategy table of both players preceded by the config comment.
std::string strategy_csv(const StrategicGame& game, const Profile& profile, const std::string& config_echo);

// Every run_* writes its files under config.out (skipped when empty) and
// logs progress lines to `log`.

struct SolveReport {
  CcfrResult result;
  std::optional<CfrRun> cfr;  // algorithm == cfr
  Profile average;
};
SolveReport run_solve(const ExperimentConfig& config, std::ostream& log);

struct SweepPoint {
  std::optional<double> bound;  // empty for the unconstrained reference
  double risk = 0.0;
  double exploitability = 0.0;
  double lambda_mean = 0.0;
  double value = 0.0;  // evader's value of the average profile
  double seconds = 0.0;
};
struct SweepReport {
  std::vector<SweepPoint> points;
};
/// Throws ScaleGuardError when width exceeds sweep.max_width without the override.
SweepReport run_transit_sweep(const ExperimentConfig& config, std::ostream& log);

struct LpCompareReport {
  LpStatus status = LpStatus::Infeasible;
  double ccfr_value = 0.0;  // constrained player's perspective
  double lp_value = 0.0;
  double value_gap = 0.0;
  std::vector<double> ccfr_violations;
  std::vector<double> lp_violations;
  std::vector<double> lambda_mean;
  std::vector<double> lambda_star;
  double beta = 0.0;
  bool beta_exceeds_duals = false;
  double ccfr_seconds = 0.0;
  double lp_seconds = 0.0;
};
LpCompareReport run_lp_compare(const ExperimentConfig& config, std::ostream& log);

struct OpponentRun {
  std::int64_t n = 0;
  double gamma = 0.0;
  int seed = 0;
  double value = 0.0;
  double violation[2] = {0.0, 0.0};
};
struct OpponentCurveRow {
  std::int64_t n = 0;  // 0 marks the exact-probability run
  double gamma = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};
struct OpponentReport {
  double nash_reference = 0.0;
  double best_response_reference = 0.0;
  double target_exploitability = 0.0;
  std::size_t statistics = 0;  // constraints per seat
  std::vector<OpponentRun> runs;
  std::vector<OpponentCurveRow> curve;
  std::optional<double> exact_value;
  std::map<double, double> spearman;  // per confidence, over every (n, seed) run
};
OpponentReport run_opponent_model(const ExperimentConfig& config, std::ostream& log);

struct AuditRow {
  std::int64_t iteration = 0;
  double max_violation = 0.0;
  double thm2 = 0.0;
  std::optional<double> exploitability_gap;  // constrained exploitability, when computable
  double thm1 = 0.0;
  std::vector<double> thm3;                  // needs lambda* from the LP
  std::vector<double> corollary_violation;   // corollary step rule only
  std::optional<double> corollary_exploitability;
  bool ok = true;
};
struct AuditReport {
  std::vector<AuditRow> rows;
  std::vector<double> lambda_star;
  std::size_t failures = 0;
};
AuditReport run_bound_audit(const ExperimentConfig& config, std::ostream& log);

/// Spearman rank correlation with average ranks for ties; 0 when either side is constant.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ccfr::experiments
