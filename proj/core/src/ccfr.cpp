#include "ccfr/ccfr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ccfr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(StepRule rule) {
  switch (rule) {
    case StepRule::Constant:
      return "constant";
    case StepRule::Decaying:
      return "decaying";
    case StepRule::Corollary:
      return "corollary";
  }
  return "constant";
}

StepRule step_rule_from_string(const std::string& name) {
  if (name == "constant") return StepRule::Constant;
  if (name == "decaying") return StepRule::Decaying;
  if (name == "corollary") return StepRule::Corollary;
  throw std::invalid_argument("unknown step rule '" + name + "' (constant, decaying, corollary)");
}

void validate(const CcfrConfig& config) {
  if (config.iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (config.step_rule != StepRule::Corollary && !(config.step > 0.0)) {
    throw std::invalid_argument("step size must be positive");
  }
  if (std::isnan(config.beta)) throw std::invalid_argument("beta must be a number");
  if (config.beta_doubling && !(config.doubling_threshold > 0.0 && config.doubling_threshold < 1.0)) {
    throw std::invalid_argument("doubling threshold must be in (0, 1)");
  }
  if (config.doubling_cap < 0) throw std::invalid_argument("doubling cap must be nonnegative");
}

double effective_beta(const CcfrConfig& config, double utility_range) {
  if (!config.clamp) return kInf;
  return config.beta < 0.0 ? 100.0 * utility_range : config.beta;
}

std::vector<double> LagrangeState::mean() const {
  std::vector<double> m(lambda_sum.size(), 0.0);
  if (updates == 0) return m;
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = lambda_sum[i] / static_cast<double>(updates);
  return m;
}

double LagrangeState::regret() const {
  if (pairs == 0) return 0.0;
  double best = 0.0;
  for (double s : violation_sum) {
    if (s > 0.0) best += beta * s;
  }
  return (best - weighted_sum) / static_cast<double>(pairs);
}

LagrangeState make_lagrange_state(std::size_t k, double beta, std::span<const double> initial) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  LagrangeState s;
  s.beta = beta;
  s.lambda.assign(k, 0.0);
  if (!initial.empty()) {
    if (initial.size() != k) throw std::invalid_argument("initial multipliers have the wrong length");
    for (std::size_t i = 0; i < k; ++i) s.lambda[i] = std::clamp(initial[i], 0.0, beta);
  }
  s.lambda_sum.assign(k, 0.0);
  s.violation_sum.assign(k, 0.0);
  return s;
}

void lambda_update(LagrangeState& state, std::span<const double> violations, double alpha) {
  if (violations.size() != state.lambda.size()) throw std::invalid_argument("violation vector has the wrong length");
  for (std::size_t i = 0; i < state.lambda.size(); ++i) {
    state.lambda[i] = std::clamp(state.lambda[i] + alpha * violations[i], 0.0, state.beta);
    state.lambda_sum[i] += state.lambda[i];
  }
  ++state.updates;
}

void record_pair(LagrangeState& state, std::span<const double> violations) {
  for (std::size_t i = 0; i < state.lambda.size(); ++i) {
    state.violation_sum[i] += violations[i];
    state.weighted_sum += state.lambda[i] * violations[i];
  }
  ++state.pairs;
}

double measure_lambda_regret(std::span<const LambdaRecord> history, double beta) {
  if (history.empty()) throw std::invalid_argument("lambda history is empty");
  const auto k = history.front().lambda.size();
  std::vector<double> sum(k, 0.0);
  double played = 0.0;
  for (const auto& r : history) {
    if (r.lambda.size() != k || r.violation.size() != k) throw std::invalid_argument("ragged lambda history");
    for (std::size_t i = 0; i < k; ++i) {
      sum[i] += r.violation[i];
      played += r.lambda[i] * r.violation[i];
    }
  }
  double best = 0.0;
  for (double s : sum) {
    if (s > 0.0) best += beta * s;
  }
  return (best - played) / static_cast<double>(history.size());
}

double step_size(const CcfrConfig& config, std::int64_t t, double beta, double g_bound) {
  switch (config.step_rule) {
    case StepRule::Constant:
      return config.step;
    case StepRule::Decaying:
      return config.step / std::sqrt(static_cast<double>(t));
    case StepRule::Corollary: {
      const double g = g_bound > 0.0 ? g_bound : 1.0;
      const double b = std::isfinite(beta) ? beta : 1.0;
      return b / (g * std::sqrt(static_cast<double>(config.iterations)));
    }
  }
  return config.step;
}

std::vector<double> tilt_vector(const ConstraintSet& constraints, std::span<const double> lambda,
                                std::span<const double> x) {
  std::vector<double> c(x.size(), 0.0);
  constraints.tilt(x, lambda, c);
  return c;
}

double tilt(const ConstraintSet& constraints, std::span<const double> lambda, std::span<const double> x,
            std::int32_t sequence) {
  return tilt_vector(constraints, lambda, x).at(static_cast<std::size_t>(sequence));
}

void ccfr_iterate(const StrategicGame& game, CfrState& state, Player constrained,
                  std::span<const double> opponent_behavioral, const ConstraintSet& constraints,
                  std::span<const double> lambda, std::span<const double> x) {
  if (constraints.empty()) {
    cfr_iterate(game, state, constrained, opponent_behavioral);
    return;
  }
  const auto c = tilt_vector(constraints, lambda, x);
  cfr_iterate(game, state, constrained, opponent_behavioral, c);
}

double tilted_values_closed_form(const TreeGame& game, const Profile& profile, std::span<const double> lambda,
                                 const ConstraintSet& constraints, InfosetId infoset, std::optional<int> action) {
  const auto& tree = game.tree();
  const Player i = tree.infoset(infoset).player;
  const auto& idx = game.index(i);
  const auto& sigma = profile[i].probs;
  const auto x = seq_of(game, profile[i]);
  const auto c = tilt_vector(constraints, lambda, x.x);

  // Own reach from just after `from` (a sequence of `infoset`) down to I'.
  // With no `from`, any action at `infoset` counts and its probability is included.
  const auto path_weight = [&](InfosetId target, std::optional<std::int32_t> from) {
    double w = 1.0;
    std::int32_t s = idx.parent_sequence(target);
    while (s != 0) {
      if (idx.infoset_of(s) == infoset) {
        if (!from) return w * sigma[static_cast<std::size_t>(s)];
        return s == *from ? w : 0.0;
      }
      w *= sigma[static_cast<std::size_t>(s)];
      s = idx.parent_sequence(idx.infoset_of(s));
    }
    return 0.0;
  };
  const auto tilt_mass = [&](InfosetId g) {
    double m = 0.0;
    for (int a = 0; a < tree.infoset(g).num_actions(); ++a) {
      const auto s = static_cast<std::size_t>(idx.sequence(g, a));
      m += sigma[s] * c[s];
    }
    return m;
  };

  const double v = counterfactual_value(game, profile, infoset, action);
  double below = 0.0;
  std::optional<std::int32_t> from;
  if (action) from = idx.sequence(infoset, *action);
  for (InfosetId g : tree.infosets_of(i)) {
    if (g == infoset) continue;
    const double w = path_weight(g, from);
    if (w != 0.0) below += w * tilt_mass(g);
  }
  if (action) return v - c[static_cast<std::size_t>(*from)] - below;
  return v - tilt_mass(infoset) - below;
}

double max_infoset_visits(const DecisionLayout& layout) {
  std::vector<double> ones(static_cast<std::size_t>(layout.num_sequences()), 1.0);
  ones[0] = 0.0;
  ValuePass pass;
  bottom_up_values(layout, ones, {}, {}, Aggregate::Max, pass);
  return pass.root;
}

namespace {

double linear_max(const DecisionLayout& layout, const LinearConstraint& f, double sign) {
  std::vector<double> q(static_cast<std::size_t>(layout.num_sequences()), 0.0);
  for (const auto& [s, a] : f.coefficients()) {
    if (s == 0) continue;
    q[static_cast<std::size_t>(s)] = sign * a;
  }
  double empty = 0.0;
  for (const auto& [s, a] : f.coefficients()) {
    if (s == 0) empty = sign * a;
  }
  ValuePass pass;
  bottom_up_values(layout, q, {}, {}, Aggregate::Max, pass);
  return pass.root + empty;
}

}  // namespace

BoundReport compute_bound_constants(const StrategicGame& game, const ConstraintSet& constraints, Player constrained,
                                    std::uint64_t seed, int samples) {
  BoundReport r;
  r.delta_u = game.utility_range();
  r.k = constraints.size();
  const auto& lc = game.layout(constrained);
  const auto& lo = game.layout(opponent(constrained));
  r.actions_constrained = lc.max_actions();
  r.actions = std::max(lc.max_actions(), lo.max_actions());
  r.m_constrained = max_infoset_visits(lc);
  r.m = std::max(r.m_constrained, max_infoset_visits(lo));

  std::vector<std::vector<double>> points;
  const auto sample_points = [&]() {
    if (!points.empty()) return;
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    const auto n = static_cast<std::size_t>(lc.num_sequences());
    for (int j = 0; j < 2 * samples; ++j) {
      BehavioralStrategy b = uniform_strategy(lc, constrained);
      const bool pure = j % 2 == 0;
      for (std::int32_t i = 0; i < lc.num_infosets(); ++i) {
        const auto first = static_cast<std::size_t>(lc.first_sequence[static_cast<std::size_t>(i)]);
        const auto na = static_cast<std::size_t>(lc.action_count[static_cast<std::size_t>(i)]);
        if (pure) {
          const auto pick = std::uniform_int_distribution<std::size_t>(0, na - 1)(rng);
          for (std::size_t a = 0; a < na; ++a) b.probs[first + a] = a == pick ? 1.0 : 0.0;
        } else {
          double total = 0.0;
          for (std::size_t a = 0; a < na; ++a) total += b.probs[first + a] = expo(rng);
          for (std::size_t a = 0; a < na; ++a) b.probs[first + a] /= total;
        }
      }
      std::vector<double> x(n);
      realization(lc, b.probs, x);
      points.push_back(std::move(x));
    }
  };

  for (const auto& c : constraints.items()) {
    if (const auto* lin = dynamic_cast<const LinearConstraint*>(c.get())) {
      r.f_bound = std::max(r.f_bound, lin->l1_norm());
      const double hi = linear_max(lc, *lin, 1.0) - lin->offset();
      const double lo_v = -linear_max(lc, *lin, -1.0) - lin->offset();
      r.g_bound = std::max({r.g_bound, std::abs(hi), std::abs(lo_v)});
    } else {
      r.exact_f_g = false;
      sample_points();
      std::vector<double> g(static_cast<std::size_t>(lc.num_sequences()));
      for (const auto& x : points) {
        r.g_bound = std::max(r.g_bound, std::abs(c->value(x)));
        c->subgradient(x, g);
        double norm = 0.0;
        for (double v : g) norm += std::abs(v);
        r.f_bound = std::max(r.f_bound, norm);
      }
    }
  }
  return r;
}

TheoremBounds theorem_bounds(const BoundReport& report, std::int64_t t, double beta, double lambda_regret,
                             std::span<const double> lambda_star) {
  TheoremBounds b;
  const double sqrt_t = std::sqrt(static_cast<double>(t));
  const double k = static_cast<double>(report.k);
  const double du = report.delta_u;
  const double a_all = std::sqrt(static_cast<double>(report.actions));
  const double a_c = std::sqrt(static_cast<double>(report.actions_constrained));
  const double kbf = k > 0 ? k * beta * report.f_bound : 0.0;

  b.thm1 = 4.0 * (du + kbf) * report.m * a_all / sqrt_t + 2.0 * lambda_regret;
  if (beta > 0.0 && std::isfinite(beta)) {
    b.thm2 = lambda_regret / beta + (du + 2.0 * kbf) * report.m_constrained * a_c / (beta * sqrt_t) + du / beta;
  } else {
    b.thm2 = kInf;
  }
  const double gterm = std::isfinite(beta) ? beta * report.g_bound : kInf;
  for (double ls : lambda_star) {
    const double gap = beta - ls;
    if (gap > 0.0 && std::isfinite(beta)) {
      b.thm3.push_back(lambda_regret / gap + 2.0 * (du + kbf) * report.m * a_all / (gap * sqrt_t));
      b.corollary_violation.push_back((gterm + 2.0 * (du + kbf) * report.m * a_all) / (gap * sqrt_t));
    } else {
      b.thm3.push_back(kInf);
      b.corollary_violation.push_back(kInf);
    }
  }
  b.corollary_exploitability = (4.0 * (du + kbf) * report.m * a_all + 2.0 * gterm) / sqrt_t;
  return b;
}

CcfrResult solve(const StrategicGame& game, const ConstraintSet& constraints, const CcfrConfig& config,
                 const IterationObserver& observer, std::span<const double> initial_lambda) {
  validate(config);
  const Player c = config.constrained;
  const Player u = opponent(c);
  const auto& layout_c = game.layout(c);
  constraints.check_dimension(layout_c.num_sequences());
  const std::size_t k = constraints.size();

  CcfrResult result;
  result.beta = effective_beta(config, game.utility_range());
  result.bounds = compute_bound_constants(game, constraints, c, config.seed);
  CcfrConfig corollary = config;
  corollary.step_rule = StepRule::Corollary;
  result.corollary_step = step_size(corollary, 1, result.beta, result.bounds.g_bound);
  result.state = make_cfr_state(game);
  result.lagrange = make_lagrange_state(k, result.beta, initial_lambda);
  auto& state = result.state;
  auto& lag = result.lagrange;

  const auto checkpoints = config.checkpoints.empty() ? checkpoint_schedule(config.iterations) : config.checkpoints;
  std::size_t next = 0;
  const auto start = std::chrono::steady_clock::now();

  std::vector<double> f(k, 0.0);
  std::vector<double> tilt_buf(static_cast<std::size_t>(layout_c.num_sequences()), 0.0);
  constraints.values(state[c].current_sequence.x, f);

  for (std::int64_t t = 1; t <= config.iterations; ++t) {
    cfr_iterate(game, state, u, state[c].current.probs);
    if (k > 0) {
      lambda_update(lag, f, step_size(config, t, result.beta, result.bounds.g_bound));
      constraints.tilt(state[c].current_sequence.x, lag.lambda, tilt_buf);
      cfr_iterate(game, state, c, state[u].current.probs, tilt_buf);
      constraints.values(state[c].current_sequence.x, f);
      record_pair(lag, f);
      if (config.record_history) result.history.push_back({lag.lambda, f});
    } else {
      cfr_iterate(game, state, c, state[u].current.probs);
    }
    if (observer) observer(t, state, lag);

    while (next < checkpoints.size() && checkpoints[next] < t) ++next;
    if (next < checkpoints.size() && checkpoints[next] == t) {
      Checkpoint cp;
      cp.iteration = t;
      const Profile avg = average_profile(game, state);
      cp.violations = constraints.values(state[c].average.x);
      cp.positive_violation = total_positive_violation(cp.violations);
      if (config.exploitability) cp.exploitability = exploitability(game, avg);
      cp.value = expected_value(game, Player::One, avg);
      cp.lambda = lag.lambda;
      cp.lambda_mean = lag.mean();
      cp.lambda_regret = lag.regret();
      const auto tb = theorem_bounds(result.bounds, t, result.beta, cp.lambda_regret);
      cp.thm1 = tb.thm1;
      cp.thm2 = tb.thm2;
      cp.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.diagnostics.push_back(std::move(cp));
    }
  }

  result.average = average_profile(game, state);
  result.average_sequence = {state[Player::One].average, state[Player::Two].average};
  return result;
}

CcfrResult beta_doubling_solve(const StrategicGame& game, const ConstraintSet& constraints, const CcfrConfig& config) {
  validate(config);
  CcfrConfig cfg = config;
  cfg.clamp = true;
  double beta = effective_beta(config, game.utility_range());
  std::vector<double> warm;
  std::vector<DoublingStep> trace;
  for (int doublings = 0;; ++doublings) {
    cfg.beta = beta;
    CcfrResult r = solve(game, constraints, cfg, {}, warm);
    const auto mean = r.lagrange.mean();
    double max_mean = 0.0;
    bool close = false;
    for (double m : mean) {
      max_mean = std::max(max_mean, m);
      if (m >= config.doubling_threshold * beta) close = true;
    }
    const bool again = close && doublings < config.doubling_cap;
    trace.push_back({beta, max_mean, again});
    if (!again) {
      r.doubling = std::move(trace);
      r.doubling_cap_hit = close;
      return r;
    }
    beta = std::max(1.0, 2.0 * beta);
    warm = r.lagrange.lambda;
  }
}

}  // namespace ccfr
