#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccfr/ccfr.hpp"
#include "ccfr/transit.hpp"
#include "json.hpp"

namespace ccfr::experiments {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { Solve, TransitSweep, LpCompare, OpponentModel, BoundAudit };

std::string to_string(Experiment e);
/// Accepts both "transit_sweep" and "transit-sweep".
Experiment experiment_from_string(const std::string& name);

struct GameSpec {
  std::string kind = "kuhn";  // kuhn | leduc | file | transit
  std::string path;           // kind == file
  TransitParams transit;      // kind == transit
};

/// A sequence given either by label ("Q:bet") or by index.
struct SequenceRef {
  std::string label;
  std::int32_t index = -1;
};

struct TermSpec {
  SequenceRef sequence;
  double coefficient = 1.0;
  double target = 0.0;
  double weight = 1.0;
};

struct PieceSpec {
  std::vector<TermSpec> terms;
  double offset = 0.0;
};

struct ConstraintSpec {
  std::string type = "linear";  // linear | max_of_linear | squared_distance | risk
  std::string sense = "at_most";
  std::vector<TermSpec> terms;
  double bound = 0.0;
  std::vector<PieceSpec> pieces;
  double radius = 0.0;
  std::string label;
};

struct SolverSpec {
  std::string algorithm = "ccfr";  // ccfr | cfr (solve only, requires no constraints)
  CcfrConfig config;
};

struct SweepSpec {
  std::vector<double> bounds = {0.02, 0.1, 0.5};
  bool unconstrained = true;
  int max_width = 5;
};

struct OpponentSpec {
  std::string game = "kuhn";  // kuhn | leduc
  std::string abstraction = "JQ.K/pair.nopair";
  std::int64_t target_iterations = 20000;
  std::vector<std::int64_t> observations = {100, 1000, 10000, 100000};
  std::vector<double> confidences = {0.95, 0.99};
  int seeds = 10;
  bool exact = true;
  std::string reach = "empirical";  // empirical | known
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Solve;
  GameSpec game;
  std::vector<ConstraintSpec> constraints;
  SolverSpec solver;
  SweepSpec sweep;
  OpponentSpec opponent;
  std::uint64_t seed = 0;
  bool override_scale_guard = false;
  std::filesystem::path out = "out";
};

/// Parses a JSON document (comments allowed). Unknown keys anywhere are a
/// ConfigError naming the offending path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// The effective configuration with every default filled in. The output
/// directory is left out so moving results does not change them.
nlohmann::ordered_json to_json(const ExperimentConfig& config);
std::string echo(const ExperimentConfig& config);

}  // namespace ccfr::experiments
