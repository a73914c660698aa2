#include "ccfr/results.hpp"

#include <cmath>
#include <ostream>

#include "ccfr/format.hpp"
#include "json.hpp"

namespace ccfr {

namespace {

using nlohmann::ordered_json;

ordered_json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

ordered_json numbers(std::span<const double> v) {
  auto a = ordered_json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

ordered_json strategy_json(const StrategicGame& game, Player p, const CcfrResult& result) {
  const auto& beh = result.average[p].probs;
  const auto& x = result.average_sequence[static_cast<std::size_t>(index_of(p))].x;
  auto rows = ordered_json::array();
  for (std::int32_t s = 1; s < game.layout(p).num_sequences(); ++s) {
    rows.push_back({{"sequence", game.sequence_label(p, s)},
                    {"probability", number(beh[static_cast<std::size_t>(s)])},
                    {"realization", number(x[static_cast<std::size_t>(s)])}});
  }
  return rows;
}

}  // namespace

std::string config_comment(const std::string& config_echo) {
  return "# config: " + ordered_json::parse(config_echo).dump();
}

void write_result_json(std::ostream& out, const StrategicGame& game, const ConstraintSet& constraints,
                       const CcfrConfig& config, const CcfrResult& result, const std::string& config_echo) {
  ordered_json doc;
  doc["format"] = "ccfr-result/1";
  doc["config"] = ordered_json::parse(config_echo);
  doc["game"] = {{"name", game.name()}, {"hash", game.hash()}};

  auto cons = ordered_json::array();
  for (const auto& c : constraints.items()) cons.push_back(c->describe());
  doc["constraints"] = cons;

  doc["solver"] = {{"iterations", config.iterations},
                   {"constrained", to_string(config.constrained)},
                   {"step_rule", to_string(config.step_rule)},
                   {"step", number(config.step)},
                   {"beta", number(result.beta)},
                   {"corollary_step", number(result.corollary_step)}};

  const auto& b = result.bounds;
  doc["bounds"] = {{"delta_u", number(b.delta_u)},
                   {"k", b.k},
                   {"actions", b.actions},
                   {"actions_constrained", b.actions_constrained},
                   {"F", number(b.f_bound)},
                   {"G", number(b.g_bound)},
                   {"F_G_exact", b.exact_f_g},
                   {"M", number(b.m)},
                   {"M_constrained", number(b.m_constrained)}};

  if (!result.doubling.empty()) {
    auto trace = ordered_json::array();
    for (const auto& d : result.doubling) {
      trace.push_back({{"beta", number(d.beta)}, {"max_mean_lambda", number(d.max_mean_lambda)}, {"doubled", d.doubled}});
    }
    doc["beta_doubling"] = {{"trace", trace}, {"cap_hit", result.doubling_cap_hit}};
  }

  auto diag = ordered_json::array();
  for (const auto& cp : result.diagnostics) {
    diag.push_back({{"iteration", cp.iteration},
                    {"violations", numbers(cp.violations)},
                    {"positive_violation", number(cp.positive_violation)},
                    {"exploitability", number(cp.exploitability)},
                    {"value_p1", number(cp.value)},
                    {"lambda", numbers(cp.lambda)},
                    {"lambda_mean", numbers(cp.lambda_mean)},
                    {"lambda_regret", number(cp.lambda_regret)},
                    {"thm1_rhs", number(cp.thm1)},
                    {"thm2_rhs", number(cp.thm2)}});
  }
  doc["diagnostics"] = diag;
  doc["strategies"] = {{"player1", strategy_json(game, Player::One, result)},
                       {"player2", strategy_json(game, Player::Two, result)}};
  out << doc.dump(2) << '\n';
}

void write_diagnostics_csv(std::ostream& out, const ConstraintSet& constraints, const CcfrResult& result,
                           const std::string& config_echo) {
  const std::size_t k = constraints.size();
  out << config_comment(config_echo) << '\n';
  out << "iteration";
  for (std::size_t i = 0; i < k; ++i) out << ",f" << i << "[constraint]";
  out << ",positive_violation[constraint],exploitability[utility],value_p1[utility]";
  for (std::size_t i = 0; i < k; ++i) out << ",lambda" << i << "[utility]";
  for (std::size_t i = 0; i < k; ++i) out << ",lambda_mean" << i << "[utility]";
  out << ",lambda_regret[utility],thm1_rhs[utility],thm2_rhs[constraint],wall_time[s]\n";
  for (const auto& cp : result.diagnostics) {
    out << cp.iteration;
    for (double v : cp.violations) out << ',' << format_number(v);
    out << ',' << format_number(cp.positive_violation) << ',' << format_number(cp.exploitability) << ','
        << format_number(cp.value);
    for (double v : cp.lambda) out << ',' << format_number(v);
    for (double v : cp.lambda_mean) out << ',' << format_number(v);
    out << ',' << format_number(cp.lambda_regret) << ',' << format_number(cp.thm1) << ','
        << format_number(cp.thm2) << ',' << format_number(cp.seconds) << '\n';
  }
}

}  // namespace ccfr
