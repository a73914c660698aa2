#include "experiments/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ccfr/format.hpp"
#include "ccfr/game_io.hpp"
#include "ccfr/opponent_model.hpp"
#include "ccfr/poker.hpp"
#include "ccfr/results.hpp"

namespace ccfr::experiments {

using nlohmann::ordered_json;

namespace {

constexpr double kSlack = 1e-9;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

ordered_json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::vector<std::pair<std::int32_t, double>> coefficients(const std::vector<TermSpec>& terms,
                                                          const StrategicGame& game, Player p) {
  std::vector<std::pair<std::int32_t, double>> a;
  for (const auto& t : terms) a.emplace_back(resolve_sequence(game, p, t.sequence), t.coefficient);
  return a;
}

std::string label_or(const std::string& label, const std::string& fallback) {
  return label.empty() ? fallback : label;
}

CcfrResult run_ccfr(const StrategicGame& game, const ConstraintSet& constraints, const CcfrConfig& config,
                    const IterationObserver& observer = {}) {
  if (config.beta_doubling) return beta_doubling_solve(game, constraints, config);
  return solve(game, constraints, config, observer);
}

std::string point_tag(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

void write_solve_files(const std::filesystem::path& dir, const std::string& stem, const StrategicGame& game,
                       const ConstraintSet& constraints, const CcfrConfig& config, const CcfrResult& result,
                       const std::string& echo_text) {
  std::ostringstream json, csv;
  write_result_json(json, game, constraints, config, result, echo_text);
  write_diagnostics_csv(csv, constraints, result, echo_text);
  write_file(dir / ((stem.empty() ? "result" : stem) + ".json"), json.str());
  write_file(dir / (stem.empty() ? "diagnostics.csv" : "diagnostics_" + stem + ".csv"), csv.str());
}

}  // namespace

LoadedGame load_game(const GameSpec& spec) {
  LoadedGame g;
  if (spec.kind == "kuhn") {
    g.tree = build_kuhn().game_ptr();
  } else if (spec.kind == "leduc") {
    g.tree = build_leduc().game_ptr();
  } else if (spec.kind == "file") {
    g.tree = std::make_shared<const TreeGame>(ccfr::load_game(spec.path));
  } else if (spec.kind == "transit") {
    g.transit = std::make_shared<const TransitGame>(spec.transit);
  } else {
    throw ConfigError("unknown game '" + spec.kind + "'");
  }
  if (g.tree) {
    g.game = g.tree;
  } else {
    g.game = g.transit;
  }
  return g;
}

std::int32_t resolve_sequence(const StrategicGame& game, Player p, const SequenceRef& ref) {
  const std::int32_t n = game.layout(p).num_sequences();
  if (ref.label.empty()) {
    if (ref.index >= n) {
      throw ConfigError("sequence index " + std::to_string(ref.index) + " out of range (player " + to_string(p) +
                        " has " + std::to_string(n) + ")");
    }
    return ref.index;
  }
  for (std::int32_t s = 0; s < n; ++s) {
    if (game.sequence_label(p, s) == ref.label) return s;
  }
  throw ConfigError("no sequence labelled '" + ref.label + "' for player " + to_string(p));
}

ConstraintSet build_constraints(const std::vector<ConstraintSpec>& specs, const LoadedGame& game, Player constrained) {
  ConstraintSet set;
  const auto& g = *game.game;
  const std::int32_t dim = g.layout(constrained).num_sequences();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const std::string fallback = "c" + std::to_string(i);
    if (s.type == "linear") {
      auto a = coefficients(s.terms, g, constrained);
      if (s.sense == "at_most") {
        set.emplace(LinearConstraint::at_most(dim, std::move(a), s.bound, label_or(s.label, fallback)));
      } else {
        set.emplace(LinearConstraint::at_least(dim, std::move(a), s.bound, label_or(s.label, fallback)));
      }
    } else if (s.type == "max_of_linear") {
      std::vector<LinearConstraint> pieces;
      for (const auto& p : s.pieces) pieces.emplace_back(dim, coefficients(p.terms, g, constrained), p.offset);
      set.emplace(MaxOfLinearConstraint(std::move(pieces), label_or(s.label, fallback)));
    } else if (s.type == "squared_distance") {
      std::vector<SquaredDistanceConstraint::Term> terms;
      for (const auto& t : s.terms) {
        terms.push_back({resolve_sequence(g, constrained, t.sequence), t.target, t.weight});
      }
      set.emplace(SquaredDistanceConstraint(dim, std::move(terms), s.radius, label_or(s.label, fallback)));
    } else if (s.type == "risk") {
      if (!game.transit || constrained != Player::Two) {
        throw ConfigError("risk constraints need the transit game with solver.constrained = 2");
      }
      set.emplace(build_risk_constraint(*game.transit, s.bound));
    } else {
      throw ConfigError("unknown constraint type '" + s.type + "'");
    }
  }
  return set;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string strategy_csv(const StrategicGame& game, const Profile& profile, const std::string& config_echo) {
  std::ostringstream out;
  out << config_comment(config_echo) << '\n';
  out << "player,sequence,probability[prob]\n";
  for (Player p : {Player::One, Player::Two}) {
    for (std::int32_t s = 1; s < game.layout(p).num_sequences(); ++s) {
      out << (index_of(p) + 1) << ',' << game.sequence_label(p, s) << ','
          << format_exact(profile[p].probs[static_cast<std::size_t>(s)]) << '\n';
    }
  }
  return out.str();
}

SolveReport run_solve(const ExperimentConfig& cfg, std::ostream& log) {
  const auto g = load_game(cfg.game);
  const auto& game = *g.game;
  CcfrConfig config = cfg.solver.config;
  config.seed = cfg.seed;
  const auto constraints = build_constraints(cfg.constraints, g, config.constrained);
  const std::string e = echo(cfg);
  const bool write = !cfg.out.empty();

  SolveReport report;
  if (cfg.solver.algorithm == "cfr") {
    if (!constraints.empty()) throw ConfigError("solver.algorithm cfr does not take constraints");
    const auto checkpoints = config.checkpoints.empty() ? checkpoint_schedule(config.iterations) : config.checkpoints;
    report.cfr = run_cfr(game, config.iterations, checkpoints);
    report.average = average_profile(game, report.cfr->state);
    if (write) {
      std::ostringstream csv;
      csv << config_comment(e) << '\n';
      write_convergence_csv(csv, report.cfr->rows);
      write_file(cfg.out / "convergence.csv", csv.str());
    }
    if (!report.cfr->rows.empty()) {
      log << "cfr " << game.name() << " T=" << config.iterations
          << " exploitability=" << format_number(report.cfr->rows.back().exploitability) << '\n';
    }
  } else {
    report.result = run_ccfr(game, constraints, config);
    report.average = report.result.average;
    if (write) write_solve_files(cfg.out, "", game, constraints, config, report.result, e);
    if (!report.result.diagnostics.empty()) {
      const auto& last = report.result.diagnostics.back();
      log << "ccfr " << game.name() << " T=" << config.iterations << " k=" << constraints.size()
          << " exploitability=" << format_number(last.exploitability)
          << " positive_violation=" << format_number(last.positive_violation) << '\n';
    }
  }
  if (write) write_file(cfg.out / "strategy.csv", strategy_csv(game, report.average, e));
  return report;
}

SweepReport run_transit_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  const auto& params = cfg.game.transit;
  if (params.width > cfg.sweep.max_width && !cfg.override_scale_guard) {
    throw ScaleGuardError("transit width " + std::to_string(params.width) + " exceeds the desk-scale guard of " +
                          std::to_string(cfg.sweep.max_width) + "; pass --override-scale-guard to run it anyway");
  }
  const auto g = load_game(cfg.game);
  const auto& transit = *g.transit;
  CcfrConfig config = cfg.solver.config;
  config.seed = cfg.seed;
  const std::string e = echo(cfg);
  const bool write = !cfg.out.empty();

  std::vector<std::optional<double>> bounds;
  if (cfg.sweep.unconstrained) bounds.push_back(std::nullopt);
  for (double b : cfg.sweep.bounds) bounds.push_back(b);

  SweepReport report;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    ConstraintSet constraints;
    if (bounds[i]) constraints.emplace(build_risk_constraint(transit, *bounds[i]));
    const auto start = std::chrono::steady_clock::now();
    const auto result = run_ccfr(transit, constraints, config);
    SweepPoint p;
    p.bound = bounds[i];
    const auto& x = result.average_sequence[1].x;
    p.risk = transit.risk(x);
    p.exploitability = exploitability(transit, result.average);
    if (!constraints.empty()) p.lambda_mean = result.lagrange.mean().at(0);
    p.value = expected_value(transit, Player::One, result.average);
    p.seconds = seconds_since(start);
    if (write) write_solve_files(cfg.out, "point_" + point_tag(i), transit, constraints, config, result, e);
    log << "transit w=" << params.width << " bound=" << (p.bound ? format_number(*p.bound) : "none")
        << " risk=" << format_number(p.risk) << " exploitability=" << format_number(p.exploitability) << '\n';
    report.points.push_back(p);
  }

  if (write) {
    std::ostringstream csv;
    csv << config_comment(e) << '\n';
    csv << "bound[prob],risk[prob],risk_minus_bound[prob],exploitability[utility],lambda_mean[utility],"
           "value_evader[utility],wall_time[s]\n";
    for (const auto& p : report.points) {
      csv << (p.bound ? format_number(*p.bound) : "none") << ',' << format_number(p.risk) << ','
          << (p.bound ? format_number(p.risk - *p.bound) : "") << ',' << format_number(p.exploitability) << ','
          << format_number(p.lambda_mean) << ',' << format_number(p.value) << ',' << format_number(p.seconds)
          << '\n';
    }
    write_file(cfg.out / "sweep.csv", csv.str());
  }
  return report;
}

LpCompareReport run_lp_compare(const ExperimentConfig& cfg, std::ostream& log) {
  const auto g = load_game(cfg.game);
  if (!g.tree) throw ConfigError("lp_compare needs a game tree (kuhn, leduc or file)");
  const auto& game = *g.tree;
  CcfrConfig config = cfg.solver.config;
  config.seed = cfg.seed;
  const Player c = config.constrained;
  const auto constraints = build_constraints(cfg.constraints, g, c);
  if (!constraints.all_linear()) throw ConfigError("lp_compare needs linear constraints");
  const std::string e = echo(cfg);

  LpCompareReport r;
  auto start = std::chrono::steady_clock::now();
  const auto lp = constrained_equilibrium(game, constraints, c, cfg.override_scale_guard);
  r.lp_seconds = seconds_since(start);
  r.status = lp.status;

  start = std::chrono::steady_clock::now();
  const auto result = run_ccfr(game, constraints, config);
  r.ccfr_seconds = seconds_since(start);

  r.ccfr_value = expected_value(game, c, result.average);
  r.lp_value = lp.value;
  r.value_gap = std::abs(r.ccfr_value - r.lp_value);
  r.ccfr_violations = constraints.values(result.average_sequence[static_cast<std::size_t>(index_of(c))].x);
  if (lp.status == LpStatus::Optimal) r.lp_violations = constraints.values(lp.x.x);
  r.lambda_mean = result.lagrange.mean();
  r.lambda_star = lp.lambda;
  r.beta = result.beta;
  const double max_star = r.lambda_star.empty() ? 0.0 : *std::max_element(r.lambda_star.begin(), r.lambda_star.end());
  r.beta_exceeds_duals = r.beta > max_star;

  if (!cfg.out.empty()) {
    auto arr = [](const std::vector<double>& v) {
      auto a = ordered_json::array();
      for (double x : v) a.push_back(number(x));
      return a;
    };
    ordered_json doc;
    doc["format"] = "ccfr-lp-compare/1";
    doc["config"] = to_json(cfg);
    doc["game"] = {{"name", game.name()}, {"hash", game.hash()}};
    doc["lp_status"] = to_string(r.status);
    doc["lp_pivots"] = lp.pivots;
    doc["ccfr_value"] = number(r.ccfr_value);
    doc["lp_value"] = number(r.lp_value);
    doc["value_gap"] = number(r.value_gap);
    doc["ccfr_violations"] = arr(r.ccfr_violations);
    doc["lp_violations"] = arr(r.lp_violations);
    doc["lambda_mean"] = arr(r.lambda_mean);
    doc["lambda_star"] = arr(r.lambda_star);
    doc["beta"] = number(r.beta);
    doc["beta_exceeds_duals"] = r.beta_exceeds_duals;
    doc["wall_time_s"] = {{"ccfr", r.ccfr_seconds}, {"lp", r.lp_seconds}};
    write_file(cfg.out / "compare.json", doc.dump(2) + "\n");
    write_solve_files(cfg.out, "", game, constraints, config, result, e);
    std::ostringstream lp_text;
    write_lp(lp_text, build_sequence_lp(game, constraints, c).program, "config: " + e);
    write_file(cfg.out / "program.lp", lp_text.str());
  }
  log << "lp_compare " << game.name() << " ccfr=" << format_number(r.ccfr_value)
      << " lp=" << format_number(r.lp_value) << " gap=" << format_number(r.value_gap) << '\n';
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  if (a.size() != b.size() || a.size() < 2) return 0.0;
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

OpponentReport run_opponent_model(const ExperimentConfig& cfg, std::ostream& log) {
  const auto& o = cfg.opponent;
  const auto rules = o.game == "leduc" ? leduc_rules() : kuhn_rules();
  const auto ab = build_abstraction(rules, o.abstraction);
  const auto& poker = ab.full;
  const auto& game = poker.game();
  CcfrConfig config = cfg.solver.config;
  config.seed = cfg.seed;
  const std::string e = echo(cfg);

  const auto target_run = run_cfr(ab.abstract.game(), o.target_iterations, std::vector<std::int64_t>{});
  const auto abstract_profile = average_profile(ab.abstract.game(), target_run.state);
  const Profile target{lift_strategy(ab, abstract_profile.first), lift_strategy(ab, abstract_profile.second)};

  OpponentReport r;
  r.target_exploitability = exploitability(game, target);
  r.best_response_reference = best_response_value(poker, target);
  {
    const ConstraintSet none;
    const auto one = constrained_equilibrium(game, none, Player::One, cfg.override_scale_guard);
    const auto two = constrained_equilibrium(game, none, Player::Two, cfg.override_scale_guard);
    const Profile nash{behavioral_of(game, one.x), behavioral_of(game, two.x)};
    r.nash_reference = value_against(poker, nash, target);
  }
  log << "opponent_model " << o.game << " target exploitability=" << format_number(r.target_exploitability)
      << " nash=" << format_number(r.nash_reference) << " best_response=" << format_number(r.best_response_reference)
      << '\n';

  const ReachEstimate reach = o.reach == "known" ? ReachEstimate::Known : ReachEstimate::Empirical;
  for (std::int64_t n : o.observations) {
    for (int s = 0; s < o.seeds; ++s) {
      ObservationLog logs[2];
      for (Player p : {Player::One, Player::Two}) {
        const std::uint64_t seed = splitmix(cfg.seed ^ splitmix(static_cast<std::uint64_t>(n) * 0x100000001ULL +
                                                                static_cast<std::uint64_t>(s) * 2 +
                                                                static_cast<std::uint64_t>(index_of(p))));
        logs[index_of(p)] = simulate_observations(poker, target, p, n, seed);
      }
      for (double gamma : o.confidences) {
        ConstraintSet cs[2] = {build_opponent_constraints(logs[0], poker, {gamma, reach}),
                               build_opponent_constraints(logs[1], poker, {gamma, reach})};
        r.statistics = cs[0].size();
        const auto cp = robust_counter_profile(poker, cs, config);
        OpponentRun run;
        run.n = n;
        run.gamma = gamma;
        run.seed = s;
        run.value = value_against(poker, cp.profile, target);
        for (int seat = 0; seat < 2; ++seat) {
          if (!cp.seat[seat].diagnostics.empty()) {
            run.violation[seat] = cp.seat[seat].diagnostics.back().positive_violation;
          }
        }
        r.runs.push_back(run);
      }
    }
    log << "  n=" << n << " done\n";
  }

  for (double gamma : o.confidences) {
    std::vector<double> ns, values;
    for (std::int64_t n : o.observations) {
      OpponentCurveRow row;
      row.n = n;
      row.gamma = gamma;
      row.min = std::numeric_limits<double>::infinity();
      row.max = -std::numeric_limits<double>::infinity();
      int count = 0;
      for (const auto& run : r.runs) {
        if (run.n != n || run.gamma != gamma) continue;
        row.mean += run.value;
        row.min = std::min(row.min, run.value);
        row.max = std::max(row.max, run.value);
        ns.push_back(static_cast<double>(n));
        values.push_back(run.value);
        ++count;
      }
      if (count > 0) row.mean /= count;
      r.curve.push_back(row);
    }
    r.spearman[gamma] = spearman(ns, values);
  }

  if (o.exact) {
    ConstraintSet cs[2] = {exact_opponent_constraints(poker, target, Player::One),
                           exact_opponent_constraints(poker, target, Player::Two)};
    const auto cp = robust_counter_profile(poker, cs, config);
    r.exact_value = value_against(poker, cp.profile, target);
    r.curve.push_back({0, 1.0, *r.exact_value, *r.exact_value, *r.exact_value});
    log << "  exact value=" << format_number(*r.exact_value) << '\n';
  }

  if (!cfg.out.empty()) {
    std::ostringstream runs;
    runs << config_comment(e) << '\n';
    runs << "observations[games],confidence[prob],seed,value[utility],violation_seat1[prob],violation_seat2[prob]\n";
    for (const auto& run : r.runs) {
      runs << run.n << ',' << format_number(run.gamma) << ',' << run.seed << ',' << format_number(run.value) << ','
           << format_number(run.violation[0]) << ',' << format_number(run.violation[1]) << '\n';
    }
    write_file(cfg.out / "runs.csv", runs.str());

    std::ostringstream curve;
    curve << config_comment(e) << '\n';
    curve << "observations[games],confidence[prob],mean_value[utility],min_value[utility],max_value[utility],"
             "nash_reference[utility],best_response_reference[utility]\n";
    for (const auto& row : r.curve) {
      curve << (row.n == 0 ? std::string("inf") : std::to_string(row.n)) << ','
            << (row.n == 0 ? std::string("exact") : format_number(row.gamma)) << ',' << format_number(row.mean)
            << ',' << format_number(row.min) << ',' << format_number(row.max) << ','
            << format_number(r.nash_reference) << ',' << format_number(r.best_response_reference) << '\n';
    }
    write_file(cfg.out / "curve.csv", curve.str());

    ordered_json doc;
    doc["format"] = "ccfr-opponent-model/1";
    doc["config"] = to_json(cfg);
    doc["game"] = {{"name", game.name()}, {"hash", game.hash()}};
    doc["statistics_per_seat"] = r.statistics;
    doc["target_exploitability"] = number(r.target_exploitability);
    doc["nash_reference"] = number(r.nash_reference);
    doc["best_response_reference"] = number(r.best_response_reference);
    auto sp = ordered_json::array();
    for (const auto& [gamma, rho] : r.spearman) sp.push_back({{"confidence", gamma}, {"spearman", number(rho)}});
    doc["spearman"] = sp;
    doc["exact_value"] = r.exact_value ? number(*r.exact_value) : ordered_json();
    write_file(cfg.out / "summary.json", doc.dump(2) + "\n");
  }
  return r;
}

AuditReport run_bound_audit(const ExperimentConfig& cfg, std::ostream& log) {
  const auto g = load_game(cfg.game);
  const auto& game = *g.game;
  CcfrConfig config = cfg.solver.config;
  config.seed = cfg.seed;
  if (config.beta_doubling) throw ConfigError("bound_audit runs a single solve; disable beta_doubling");
  const Player c = config.constrained;
  const Player u = opponent(c);
  const auto constraints = build_constraints(cfg.constraints, g, c);
  const std::string e = echo(cfg);

  AuditReport report;
  const bool linear_tree = g.tree && constraints.all_linear();
  bool feasible = true;
  if (linear_tree && !constraints.empty()) {
    const auto lp = constrained_equilibrium(*g.tree, constraints, c, cfg.override_scale_guard);
    if (lp.status == LpStatus::Optimal) {
      report.lambda_star = lp.lambda;
    } else {
      feasible = false;
    }
  }
  const bool gap_available = constraints.empty() || (linear_tree && feasible);

  const auto checkpoints = config.checkpoints.empty() ? checkpoint_schedule(config.iterations) : config.checkpoints;
  std::map<std::int64_t, double> gaps;
  IterationObserver observer;
  if (gap_available) {
    observer = [&](std::int64_t t, const CfrState& state, const LagrangeState&) {
      if (!std::binary_search(checkpoints.begin(), checkpoints.end(), t)) return;
      const Profile avg = average_profile(game, state);
      double best = 0.0;
      if (constraints.empty()) {
        best = exact_best_response(game, avg[u].probs, c).value;
      } else {
        best = constrained_best_response(*g.tree, constraints, c, avg[u].probs).value;
      }
      gaps[t] = best + exact_best_response(game, avg[c].probs, u).value;
    };
  }
  const auto result = solve(game, constraints, config, observer);

  for (const auto& cp : result.diagnostics) {
    AuditRow row;
    row.iteration = cp.iteration;
    row.max_violation = cp.violations.empty() ? 0.0 : *std::max_element(cp.violations.begin(), cp.violations.end());
    const auto tb = theorem_bounds(result.bounds, cp.iteration, result.beta, cp.lambda_regret, report.lambda_star);
    row.thm1 = tb.thm1;
    row.thm2 = tb.thm2;
    if (!cp.violations.empty() && row.max_violation > row.thm2 + kSlack) row.ok = false;
    if (auto it = gaps.find(cp.iteration); it != gaps.end()) {
      row.exploitability_gap = it->second;
      if (it->second > row.thm1 + kSlack) row.ok = false;
    }
    if (!report.lambda_star.empty()) {
      row.thm3 = tb.thm3;
      for (std::size_t i = 0; i < cp.violations.size(); ++i) {
        if (cp.violations[i] > row.thm3[i] + kSlack) row.ok = false;
      }
      if (config.step_rule == StepRule::Corollary) {
        row.corollary_violation = tb.corollary_violation;
        row.corollary_exploitability = tb.corollary_exploitability;
        for (std::size_t i = 0; i < cp.violations.size(); ++i) {
          if (cp.violations[i] > row.corollary_violation[i] + kSlack) row.ok = false;
        }
        if (row.exploitability_gap && *row.exploitability_gap > tb.corollary_exploitability + kSlack) row.ok = false;
      }
    }
    if (!row.ok) ++report.failures;
    report.rows.push_back(std::move(row));
  }

  if (!cfg.out.empty()) {
    const std::size_t k = constraints.size();
    std::ostringstream csv;
    csv << config_comment(e) << '\n';
    csv << "iteration";
    for (std::size_t i = 0; i < k; ++i) csv << ",f" << i << "[constraint]";
    csv << ",thm2_rhs[constraint]";
    for (std::size_t i = 0; i < k; ++i) csv << ",thm3_rhs" << i << "[constraint]";
    for (std::size_t i = 0; i < k; ++i) csv << ",corollary_rhs" << i << "[constraint]";
    csv << ",exploitability_gap[utility],thm1_rhs[utility],corollary_exploitability_rhs[utility],ok\n";
    for (std::size_t r = 0; r < report.rows.size(); ++r) {
      const auto& row = report.rows[r];
      const auto& cp = result.diagnostics[r];
      csv << row.iteration;
      for (double v : cp.violations) csv << ',' << format_number(v);
      csv << ',' << format_number(row.thm2);
      for (std::size_t i = 0; i < k; ++i) csv << ',' << (row.thm3.empty() ? "" : format_number(row.thm3[i]));
      for (std::size_t i = 0; i < k; ++i) {
        csv << ',' << (row.corollary_violation.empty() ? "" : format_number(row.corollary_violation[i]));
      }
      csv << ',' << (row.exploitability_gap ? format_number(*row.exploitability_gap) : "") << ','
          << format_number(row.thm1) << ','
          << (row.corollary_exploitability ? format_number(*row.corollary_exploitability) : "") << ','
          << (row.ok ? "pass" : "FAIL") << '\n';
    }
    write_file(cfg.out / "bound_audit.csv", csv.str());
    write_solve_files(cfg.out, "", game, constraints, config, result, e);
  }
  log << "bound_audit " << game.name() << " checkpoints=" << report.rows.size() << " failures=" << report.failures
      << '\n';
  return report;
}

}  // namespace ccfr::experiments
