// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ccfr/ccfr.hpp"
#include "ccfr/constraints.hpp"
#include "ccfr/lp.hpp"
#include "ccfr/poker.hpp"
#include "ccfr/regret.hpp"
#include "experiments/config.hpp"
#include "experiments/experiments.hpp"

namespace {

using namespace ccfr;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const PokerGame& kuhn() {
  static const PokerGame g = build_kuhn();
  return g;
}

std::int32_t seq(const StrategicGame& g, Player p, const std::string& label) {
  for (std::int32_t s = 1; s < g.layout(p).num_sequences(); ++s) {
    if (g.sequence_label(p, s) == label) return s;
  }
  throw std::runtime_error("no sequence " + label);
}

// The binding constraint shared by criteria 3, 6 and 7: bet the queen at least half the time.
ConstraintSet binding_constraint() {
  const auto& g = kuhn().game();
  ConstraintSet cs;
  cs.emplace(LinearConstraint::at_least(g.layout(Player::One).num_sequences(), {{seq(g, Player::One, "Q|:bet"), 1.0}},
                                        0.5, "bet-queen"));
  return cs;
}

Profile random_profile(const StrategicGame& g, std::mt19937_64& rng) {
  Profile prof;
  std::exponential_distribution<double> draw(1.0);
  for (Player p : {Player::One, Player::Two}) {
    const auto& layout = g.layout(p);
    prof[p] = uniform_strategy(layout, p);
    for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
      const auto first = static_cast<std::size_t>(layout.first_sequence[static_cast<std::size_t>(i)]);
      const auto n = static_cast<std::size_t>(layout.action_count[static_cast<std::size_t>(i)]);
      double total = 0.0;
      for (std::size_t a = 0; a < n; ++a) total += (prof[p].probs[first + a] = draw(rng));
      for (std::size_t a = 0; a < n; ++a) prof[p].probs[first + a] /= total;
    }
  }
  return prof;
}

class Acceptance {
 public:
  Acceptance(std::string source_dir, std::string opponent_game)
      : source_(std::move(source_dir)), opponent_game_(std::move(opponent_game)) {}

  Outcome run(int criterion) {
    switch (criterion) {
      case 1: return unconstrained();
      case 2: return reduction();
      case 3: return constrained_vs_lp();
      case 4: return transit_sweep();
      case 5: return tilted_values();
      case 6: return violation_bound();
      case 7: return dual_beta();
      case 8: return infeasible();
      case 9: return wilson_coverage();
      case 10: return opponent_model();
      case 11: return subgradients();
    }
    return {false, "no such criterion"};
  }

 private:
  std::string config_path(const std::string& name) const { return source_ + "/tools/configs/" + name; }

  Outcome unconstrained() {
    const auto start = Clock::now();
    const auto& g = kuhn().game();
    const auto run = run_cfr(g, 1000000, std::vector<std::int64_t>{1000000});
    const double secs = seconds_since(start);
    const auto lp = constrained_equilibrium(g, ConstraintSet{});
    const double expl = run.rows.back().exploitability;
    const double gap = std::abs(run.rows.back().value - lp.value);
    return {expl <= 1e-3 && gap <= 1e-3 && secs < 60.0,
            "exploitability " + fmt("%.3g", expl) + " (<= 0.001), |value - lp| " + fmt("%.3g", gap) + " (<= 0.001), " +
                fmt("%.1f", secs) + " s (< 60)"};
  }

  Outcome reduction() {
    std::size_t compared = 0;
    bool equal = true;
    for (const PokerGame& poker : {build_kuhn(), build_leduc()}) {
      const auto& g = poker.game();
      const std::int64_t T = g.layout(Player::One).num_sequences() > 100 ? 300 : 10000;  // Leduc, Kuhn
      auto reference = make_cfr_state(g);
      CcfrConfig config;
      config.iterations = T;
      config.exploitability = false;
      config.seed = 7;
      config.checkpoints = {T};
      solve(g, ConstraintSet{}, config, [&](std::int64_t, const CfrState& s, const LagrangeState&) {
        cfr_step(g, reference);
        for (Player p : {Player::One, Player::Two}) {
          equal = equal && s[p].current.probs == reference[p].current.probs &&
                  s[p].current_sequence.x == reference[p].current_sequence.x;
        }
        ++compared;
      });
    }
    return {equal && compared == 10300,
            std::to_string(compared) + " iterations on Kuhn and Leduc, strategies " + (equal ? "identical" : "differ")};
  }

  const CcfrResult& criterion3_run() {
    if (!c3_) {
      const auto start = Clock::now();
      CcfrConfig config;
      config.iterations = 1000000;
      c3_ = solve(kuhn().game(), binding_constraint(), config);
      c3_seconds_ = seconds_since(start);
    }
    return *c3_;
  }

  Outcome constrained_vs_lp() {
    const auto& r = criterion3_run();
    const auto lp = constrained_equilibrium(kuhn().game(), binding_constraint());
    const auto& last = r.diagnostics.back();
    const double violation = std::max(0.0, last.violations[0]);
    const double gap = std::abs(last.value - lp.value);
    return {lp.status == LpStatus::Optimal && violation <= 1e-3 && gap <= 5e-3 && c3_seconds_ < 300.0,
            "violation " + fmt("%.3g", violation) + " (<= 0.001), |value - lp| " + fmt("%.3g", gap) + " (<= 0.005), " +
                fmt("%.1f", c3_seconds_) + " s (< 300)"};
  }

  Outcome violation_bound() {
    const auto& r = criterion3_run();
    std::size_t bad = 0;
    double worst = -1e300;
    for (const auto& cp : r.diagnostics) {
      for (double f : cp.violations) {
        if (f > cp.thm2) ++bad;
        worst = std::max(worst, f - cp.thm2);
      }
    }
    return {bad == 0 && !r.diagnostics.empty(),
            std::to_string(r.diagnostics.size()) + " checkpoints, " + std::to_string(bad) +
                " above the bound, max f - rhs " + fmt("%.3g", worst)};
  }

  Outcome dual_beta() {
    const auto& g = kuhn().game();
    const auto cs = binding_constraint();
    const auto lp = constrained_equilibrium(g, cs);
    const double lmax = *std::max_element(lp.lambda.begin(), lp.lambda.end());
    CcfrConfig config;
    config.iterations = 1000000;
    config.beta = 2.0 * (lmax + 1.0);
    config.checkpoints = {config.iterations};
    config.exploitability = false;
    const auto r = solve(g, cs, config);
    const double violation = std::max(0.0, r.diagnostics.back().violations[0]);
    const double floor = g.utility_range() / config.beta;
    return {violation <= 2e-3, "lambda* " + fmt("%.4g", lmax) + ", beta " + fmt("%.4g", config.beta) + ", violation " +
                                   fmt("%.3g", violation) + " (<= 0.002) vs du/beta " + fmt("%.3g", floor)};
  }

  Outcome transit_sweep() {
    auto cfg = experiments::load_config(config_path("transit_sweep.json"));
    cfg.out.clear();
    std::ostringstream log;
    const auto start = Clock::now();
    const auto report = experiments::run_transit_sweep(cfg, log);
    const double secs = seconds_since(start);
    std::vector<const experiments::SweepPoint*> bounded;
    const experiments::SweepPoint* free = nullptr;
    for (const auto& p : report.points) {
      if (p.bound) bounded.push_back(&p);
      else free = &p;
    }
    std::sort(bounded.begin(), bounded.end(), [](auto* a, auto* b) { return *a->bound < *b->bound; });
    bool ok = bounded.size() == 3 && secs < 600.0;
    double worst_risk = 0.0, worst_rise = -1e300;
    for (std::size_t i = 0; i < bounded.size(); ++i) {
      worst_risk = std::max(worst_risk, std::abs(bounded[i]->risk - *bounded[i]->bound));
      if (i > 0) worst_rise = std::max(worst_rise, bounded[i]->exploitability - bounded[i - 1]->exploitability);
    }
    if (free && !bounded.empty()) worst_rise = std::max(worst_rise, free->exploitability - bounded.back()->exploitability);
    ok = ok && worst_risk <= 1e-3 && worst_rise <= 5e-3;
    std::string expl;
    for (auto* p : bounded) expl += fmt("%.4g", p->exploitability) + " ";
    return {ok, "max |risk - b| " + fmt("%.3g", worst_risk) + " (<= 0.001), exploitability " + expl +
                    "largest rise " + fmt("%.3g", worst_rise) + " (<= 0.005), " + fmt("%.1f", secs) + " s (< 600)"};
  }

  Outcome tilted_values() {
    const auto& g = kuhn().game();
    const auto n = g.layout(Player::One).num_sequences();
    ConstraintSet cs;
    cs.emplace(LinearConstraint::at_least(n, {{seq(g, Player::One, "Q|:bet"), 1.0}}, 0.5));
    cs.emplace(SquaredDistanceConstraint(
        n, {{seq(g, Player::One, "J|:bet"), 0.1, 1.0}, {seq(g, Player::One, "K|cb:call"), 0.9, 3.0}}, 0.2));
    cs.emplace(MaxOfLinearConstraint({LinearConstraint(n, {{seq(g, Player::One, "K|:check"), 1.0}}, 0.4),
                                      LinearConstraint(n, {{seq(g, Player::One, "J|cb:call"), 2.0}}, 0.1)}));
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    double rec = 0.0, tele = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
      const Profile prof = random_profile(g, rng);
      const std::vector<double> lambda = {u(rng), u(rng), u(rng)};
      auto state = make_cfr_state(g);
      auto& ps = state[Player::One];
      ps.current = prof.first;
      ps.current_sequence = realization(g.layout(Player::One), prof.first);
      const auto x = ps.current_sequence.x;
      ccfr_iterate(g, state, Player::One, prof.second.probs, cs, lambda, x);
      for (InfosetId I : g.tree().infosets_of(Player::One)) {
        const auto first = static_cast<std::size_t>(g.index(Player::One).first_sequence(I));
        const auto li = static_cast<std::size_t>(g.layout(Player::One).infoset_of_sequence[first]);
        rec = std::max(rec, std::abs(ps.pass.infoset[li] - tilted_values_closed_form(g, prof, lambda, cs, I)));
        for (int a = 0; a < g.tree().infoset(I).num_actions(); ++a) {
          rec = std::max(rec, std::abs(ps.pass.action[first + static_cast<std::size_t>(a)] -
                                       tilted_values_closed_form(g, prof, lambda, cs, I, a)));
        }
      }
      const auto c = tilt_vector(cs, lambda, x);
      double cx = 0.0;
      for (std::size_t s = 0; s < x.size(); ++s) cx += c[s] * x[s];
      tele = std::max(tele, std::abs(ps.pass.root - (expected_value(g, Player::One, prof) - cx)));
    }
    return {rec <= 1e-10 && tele <= 1e-10,
            "100 draws, recursion vs closed form " + fmt("%.3g", rec) + ", telescoping " + fmt("%.3g", tele) + " (<= 1e-10)"};
  }

  Outcome infeasible() {
    const auto& g = kuhn().game();
    const auto n = g.layout(Player::One).num_sequences();
    const auto q = seq(g, Player::One, "Q|:bet");
    ConstraintSet cs;
    cs.emplace(LinearConstraint::at_most(n, {{q, 1.0}}, 0.2));
    cs.emplace(LinearConstraint::at_least(n, {{q, 1.0}}, 0.5));
    CcfrConfig config;
    config.iterations = 1000000;
    config.checkpoints = {config.iterations};
    config.exploitability = false;
    const auto r = solve(g, cs, config);
    const double total = r.diagnostics.back().positive_violation;
    const double tol = 0.01 + g.utility_range() / r.beta;
    return {std::abs(total - 0.3) <= tol, "sum of positive violations " + fmt("%.5f", total) + ", f* 0.3, tolerance " +
                                              fmt("%.3g", tol) + " (beta " + fmt("%.4g", r.beta) + ")"};
  }

  Outcome wilson_coverage() {
    std::mt19937_64 rng(20240601);
    bool ok = true;
    std::string detail;
    for (double p : {0.1, 0.5, 0.9}) {
      std::binomial_distribution<int> draw(100, p);
      int covered = 0;
      for (int d = 0; d < 10000; ++d) {
        const auto iv = wilson_interval(draw(rng), 100, 0.95);
        covered += iv.lower <= p && p <= iv.upper;
      }
      const double rate = covered / 10000.0;
      ok = ok && rate >= 0.93;
      detail += "p=" + fmt("%.1f", p) + ": " + fmt("%.4f", rate) + " ";
    }
    return {ok, detail + "(>= 0.93)"};
  }

  Outcome opponent_model() {
    auto cfg = experiments::load_config(config_path("opponent_" + opponent_game_ + ".json"));
    cfg.out.clear();
    std::ostringstream log;
    const auto start = Clock::now();
    const auto r = experiments::run_opponent_model(cfg, log);
    const double secs = seconds_since(start);
    const double limit = opponent_game_ == "leduc" ? 1800.0 : 180.0;

    bool trend = !r.spearman.empty();
    std::string rho;
    for (auto [gamma, s] : r.spearman) {
      trend = trend && s > 0.0;
      rho += fmt("%.2f", gamma) + ":" + fmt("%.3f", s) + " ";
    }
    std::size_t checked = 0, below = 0;
    double worst = 1e300;
    for (const auto& run : r.runs) {
      if (std::abs(run.gamma - 0.99) > 1e-12 || run.n < 200) continue;
      ++checked;
      below += run.value < r.nash_reference;
      worst = std::min(worst, run.value);
    }
    const double exact_gap = r.exact_value ? std::abs(*r.exact_value - r.best_response_reference) : 1e300;
    const bool ok = trend && checked > 0 && below == 0 && exact_gap <= 0.01 && secs < limit;
    return {ok, opponent_game_ + ": spearman " + rho + "(> 0), gamma 0.99 n >= 200: " + std::to_string(below) + "/" +
                    std::to_string(checked) + " below nash " + fmt("%.4f", r.nash_reference) + " (min value " +
                    fmt("%.4f", worst) + "), exact vs best response " + fmt("%.3g", exact_gap) + " (<= 0.01), " +
                    fmt("%.1f", secs) + " s (< " + fmt("%.0f", limit) + ")"};
  }

  Outcome subgradients() {
    const auto& g = kuhn().game();
    const auto n = g.layout(Player::One).num_sequences();
    std::vector<std::shared_ptr<const Constraint>> shipped;
    shipped.push_back(std::make_shared<LinearConstraint>(
        LinearConstraint::at_most(n, {{seq(g, Player::One, "Q|:bet"), 1.0}, {seq(g, Player::One, "J|cb:call"), -2.0}}, 0.1)));
    shipped.push_back(std::make_shared<MaxOfLinearConstraint>(std::vector<LinearConstraint>{
        LinearConstraint(n, {{seq(g, Player::One, "K|:check"), 1.0}}, 0.4),
        LinearConstraint(n, {{seq(g, Player::One, "J|cb:call"), 2.0}, {seq(g, Player::One, "Q|:bet"), -1.0}}, 0.1),
        LinearConstraint(n, {{seq(g, Player::One, "K|cb:fold"), -1.5}}, -0.2)}));
    shipped.push_back(std::make_shared<SquaredDistanceConstraint>(
        n, std::vector<SquaredDistanceConstraint::Term>{{seq(g, Player::One, "J|:bet"), 0.1, 1.0},
                                                        {seq(g, Player::One, "K|cb:call"), 0.9, 3.0}},
        0.2));
    const TransitGame transit(TransitParams{.width = 2});
    const auto risk = std::make_shared<LinearConstraint>(build_risk_constraint(transit, 0.1));

    std::mt19937_64 rng(99);
    const double h = 1e-6;
    double worst = 0.0;
    std::size_t checks = 0;
    auto audit = [&](const Constraint& c, const StrategicGame& game, Player p) {
      for (int point = 0; point < 100; ++point) {
        Profile prof = random_profile(game, rng);
        auto x = realization(game.layout(p), prof[p]).x;
        std::vector<double> grad(x.size());
        c.subgradient(x, grad);
        for (std::size_t s = 0; s < x.size(); ++s) {
          auto up = x, down = x;
          up[s] += h;
          down[s] -= h;
          worst = std::max(worst, std::abs((c.value(up) - c.value(down)) / (2 * h) - grad[s]));
        }
        ++checks;
      }
    };
    for (const auto& c : shipped) audit(*c, g, Player::One);
    audit(*risk, transit, Player::Two);
    return {worst <= 1e-6, std::to_string(checks) + " points over 4 constraint kinds, max |fd - g| " + fmt("%.3g", worst) +
                               " (<= 1e-6)"};
  }

  std::string source_;
  std::string opponent_game_;
  std::optional<CcfrResult> c3_;
  double c3_seconds_ = 0.0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ccfr acceptance checks"};
  std::vector<int> only;
  std::string source = CCFR_SOURCE_DIR;
  std::string opponent = "kuhn";
  app.add_option("--criterion", only, "Run only these criteria (1-11)")->check(CLI::Range(1, 11));
  app.add_option("--opponent-game", opponent, "Game for the opponent-model criterion")
      ->check(CLI::IsMember({"kuhn", "leduc"}));
  app.add_option("--source-dir", source, "Repository root (for the shipped configs)");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected(only.begin(), only.end());
  if (selected.empty()) {
    for (int i = 1; i <= 11; ++i) selected.insert(i);
  }
  Acceptance acceptance(source, opponent);
  int failures = 0;
  for (int c : selected) {
    Outcome o;
    try {
      o = acceptance.run(c);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
