// ccfr: experiment runner.
//
//   ccfr solve --config kuhn.json --out results/kuhn --seed 3
//
// Exit codes: 0 success, 1 runtime error, 2 bad config or arguments,
// 3 scale guard refused, 4 bound audit found a violation.

#include <iostream>

#include "CLI11.hpp"
#include "ccfr/lp.hpp"
#include "experiments/experiments.hpp"

namespace ex = ccfr::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Constrained CFR solver and experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool override_guard = false;

  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Run CCFR (or plain CFR) on one game and constraint set"},
      {"transit-sweep", "Risk bound sweep on the transit game"},
      {"lp-compare", "CCFR against the sequence-form LP on identical inputs"},
      {"opponent-model", "Counter-profile learning curve against a target profile"},
      {"bound-audit", "Check measured quantities against the theorem right-hand sides"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (default: out)");
    sub->add_option("--seed", seed, "Seed; overrides the config");
    sub->add_flag("--override-scale-guard", override_guard, "Run past the desk-scale guards");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  try {
    auto cfg = ex::load_config(config_path);
    const auto expected = ex::experiment_from_string(chosen->get_name());
    if (cfg.experiment != expected) {
      throw ex::ConfigError("config is for " + ex::to_string(cfg.experiment) + ", not " + chosen->get_name());
    }
    if (chosen->count("--seed") > 0) cfg.seed = seed;
    if (override_guard) cfg.override_scale_guard = true;
    cfg.out = out_dir.empty() ? "out" : out_dir;

    switch (cfg.experiment) {
      case ex::Experiment::Solve:
        ex::run_solve(cfg, std::cerr);
        break;
      case ex::Experiment::TransitSweep:
        ex::run_transit_sweep(cfg, std::cerr);
        break;
      case ex::Experiment::LpCompare:
        ex::run_lp_compare(cfg, std::cerr);
        break;
      case ex::Experiment::OpponentModel:
        ex::run_opponent_model(cfg, std::cerr);
        break;
      case ex::Experiment::BoundAudit: {
        const auto report = ex::run_bound_audit(cfg, std::cerr);
        if (report.failures > 0) {
          std::cerr << "error: " << report.failures << " checkpoint(s) exceed a theorem bound\n";
          return 4;
        }
        break;
      }
    }
    std::cerr << "wrote " << cfg.out.string() << '\n';
  } catch (const ex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ccfr::ScaleGuardError& e) {
    std::cerr << "scale guard: " << e.what() << '\n';
    return 3;
  } catch (const ccfr::GameError& e) {
    std::cerr << "game error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
