#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "experiments/config.hpp"
#include "experiments/experiments.hpp"

namespace ccfr::experiments {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Lines without their last CSV field (the wall time) and without comments.
std::vector<std::string> csv_without_time(const std::string& text, bool drop_comments = false) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (drop_comments && !line.empty() && line[0] == '#') continue;
    out.push_back(line.substr(0, line.rfind(',')));
  }
  return out;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ccfr_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

const char* kSmallSolve = R"({
  "experiment": "solve",
  "game": {"kind": "kuhn"},
  "constraints": [{"type": "linear", "sense": "at_least", "terms": [{"sequence": "Q|:bet"}], "bound": 0.5}],
  "solver": {"iterations": 2000, "beta": 20}
})";

TEST(ExperimentConfig, RejectsUnknownKeys) {
  try {
    parse_config(R"({"experiment": "solve", "solver": {"iterations": 10, "iteratons": 5}})");
    FAIL() << "accepted an unknown key";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("iteratons"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config(R"({"experiment": "solve", "colour": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": "solve", "constraints": [{"type": "linear", "bound": 1, "extra": 2}]})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": "transit_sweep", "constraints": []})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": "opponent_model", "game": {"kind": "kuhn"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": "fly"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": "solve", "solver": {"iterations": "many"}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
}

TEST(ExperimentConfig, EchoIsAFixedPoint) {
  for (const auto& entry : fs::directory_iterator(CCFR_SOURCE_DIR "/tools/configs")) {
    const auto cfg = load_config(entry.path());
    const auto again = parse_config(echo(cfg));
    EXPECT_EQ(echo(again), echo(cfg)) << entry.path();
    EXPECT_EQ(again.experiment, cfg.experiment);
  }
  const auto cfg = parse_config(kSmallSolve);
  EXPECT_EQ(cfg.solver.config.iterations, 2000);
  EXPECT_EQ(cfg.solver.config.beta, 20.0);
  EXPECT_EQ(experiment_from_string("transit-sweep"), Experiment::TransitSweep);
  EXPECT_EQ(to_string(Experiment::BoundAudit), "bound_audit");
}

TEST_F(TempDir, SolveOutputsAreDeterministicAndCarryTheConfig) {
  auto cfg = parse_config(kSmallSolve);
  std::ostringstream log;
  cfg.out = dir_ / "a";
  run_solve(cfg, log);
  cfg.out = dir_ / "b";
  run_solve(cfg, log);
  for (const char* f : {"result.json", "strategy.csv"}) EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  EXPECT_EQ(csv_without_time(slurp(dir_ / "a" / "diagnostics.csv")), csv_without_time(slurp(dir_ / "b" / "diagnostics.csv")));

  const auto doc = nlohmann::ordered_json::parse(slurp(dir_ / "a" / "result.json"));
  EXPECT_EQ(doc["config"], to_json(cfg));
  EXPECT_EQ(doc["format"], "ccfr-result/1");
  for (const char* f : {"diagnostics.csv", "strategy.csv"}) {
    const auto text = slurp(dir_ / "a" / f);
    EXPECT_EQ(text.rfind("# config: " + nlohmann::ordered_json::parse(echo(cfg)).dump() + "\n", 0), 0u) << f;
  }
  EXPECT_FALSE(fs::exists(dir_ / "a" / "result.json.tmp"));
}

TEST_F(TempDir, UnconstrainedCcfrMatchesPlainCfr) {
  auto cfg = parse_config(R"({"experiment": "solve", "game": {"kind": "kuhn"}, "solver": {"iterations": 5000}})");
  std::ostringstream log;
  cfg.out = dir_ / "ccfr";
  run_solve(cfg, log);
  cfg.solver.algorithm = "cfr";
  cfg.out = dir_ / "cfr";
  run_solve(cfg, log);
  EXPECT_EQ(csv_without_time(slurp(dir_ / "ccfr" / "strategy.csv"), true),
            csv_without_time(slurp(dir_ / "cfr" / "strategy.csv"), true));
  EXPECT_TRUE(fs::exists(dir_ / "cfr" / "convergence.csv"));
}

TEST(TransitSweep, ScaleGuard) {
  auto cfg = parse_config(R"({"experiment": "transit_sweep", "game": {"kind": "transit", "width": 6},
                              "sweep": {"bounds": [0.1]}, "solver": {"iterations": 1}})");
  cfg.out.clear();
  std::ostringstream log;
  EXPECT_THROW(run_transit_sweep(cfg, log), ScaleGuardError);
}

TEST_F(TempDir, SmallSweepWritesEveryPoint) {
  auto cfg = parse_config(R"({"experiment": "transit_sweep", "game": {"kind": "transit", "width": 2},
                              "sweep": {"bounds": [0.1, 0.5]}, "solver": {"iterations": 2000}})");
  cfg.out = dir_;
  std::ostringstream log;
  const auto r = run_transit_sweep(cfg, log);
  ASSERT_EQ(r.points.size(), 3u);
  EXPECT_FALSE(r.points[0].bound.has_value());
  for (const char* f : {"sweep.csv", "point_000.json", "point_002.json", "diagnostics_point_001.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
}

TEST_F(TempDir, LpCompareAndAudit) {
  auto cfg = parse_config(R"({"experiment": "lp_compare", "game": {"kind": "kuhn"},
      "constraints": [{"type": "linear", "sense": "at_least", "terms": [{"sequence": "Q|:bet"}], "bound": 0.5}],
      "solver": {"iterations": 50000}})");
  cfg.out = dir_ / "lp";
  std::ostringstream log;
  const auto r = run_lp_compare(cfg, log);
  EXPECT_EQ(r.status, LpStatus::Optimal);
  EXPECT_LE(std::abs(r.value_gap), 2e-3);
  EXPECT_TRUE(r.beta_exceeds_duals);
  for (const char* f : {"compare.json", "program.lp", "result.json"}) EXPECT_TRUE(fs::exists(cfg.out / f)) << f;

  auto audit = parse_config(R"({"experiment": "bound_audit", "game": {"kind": "kuhn"},
      "constraints": [{"type": "linear", "sense": "at_least", "terms": [{"sequence": "Q|:bet"}], "bound": 0.5}],
      "solver": {"iterations": 2000, "step_rule": "corollary", "beta": 10}})");
  audit.out = dir_ / "audit";
  const auto a = run_bound_audit(audit, log);
  EXPECT_EQ(a.failures, 0u);
  ASSERT_EQ(a.lambda_star.size(), 1u);
  EXPECT_GT(a.lambda_star[0], 0.0);
  EXPECT_FALSE(a.rows.empty());
  audit.solver.config.beta_doubling = true;
  EXPECT_THROW(run_bound_audit(audit, log), ConfigError);
}

TEST(Spearman, Examples) {
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0, 1e-15);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_EQ(spearman({1, 1, 1}, {1, 2, 3}), 0.0);
  // Ranks (1.5, 1.5, 3) and (1, 2, 3): Pearson of the ranks is sqrt(3) / 2.
  EXPECT_NEAR(spearman({5, 5, 7}, {1, 2, 3}), std::sqrt(3.0) / 2.0, 1e-12);
}

}  // namespace
}  // namespace ccfr::experiments
