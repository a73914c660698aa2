#include "ccfr/lp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "ccfr/format.hpp"

namespace ccfr {

std::int32_t LinearProgram::add_variable(std::string name, double cost, bool is_free) {
  variable_names.push_back(std::move(name));
  objective.push_back(cost);
  free.push_back(is_free);
  return num_variables() - 1;
}

std::size_t LinearProgram::add_row(LpRow row) {
  for (const auto& [j, a] : row.coefficients) {
    if (j < 0 || j >= num_variables()) throw std::out_of_range("row '" + row.name + "' references a missing variable");
  }
  rows.push_back(std::move(row));
  return rows.size() - 1;
}

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::PivotLimit:
      return "pivot-limit";
  }
  return "unknown";
}

namespace {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_((rows) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return a_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  double rhs(std::size_t i) const { return at(i, n_); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }
  const std::vector<std::size_t>& basis() const { return basis_; }

  void pivot(std::size_t r, std::size_t c, std::vector<double>& cost) {
    double* pr = &a_[r * (n_ + 1)];
    const double inv = 1.0 / pr[c];
    for (std::size_t j = 0; j <= n_; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* pi = &a_[i * (n_ + 1)];
      const double f = pi[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) pi[j] -= f * pr[j];
      pi[c] = 0.0;
    }
    const double f = cost[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= n_; ++j) cost[j] -= f * pr[j];
      cost[c] = 0.0;
    }
    basis_[r] = c;
  }

  /// Reduced costs c_j - c_B B^-1 A_j, with -objective in the last slot.
  std::vector<double> reduced_costs(const std::vector<double>& c) const {
    std::vector<double> r(n_ + 1, 0.0);
    for (std::size_t j = 0; j < n_; ++j) r[j] = c[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) r[j] -= cb * at(i, j);
    }
    return r;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> a_;
  std::vector<std::size_t> basis_;
};

enum class Phase { Optimal, Unbounded, Limit };

/// Dantzig pricing; after a run of degenerate pivots, Bland's rule (lowest-index
/// improving column, ratio ties to the lowest basic index) until progress resumes.
Phase run_simplex(Tableau& t, std::vector<double>& cost, const std::vector<char>& allowed, const SimplexOptions& opt,
                  std::int64_t& pivots) {
  int degenerate = 0;
  for (;;) {
    const bool bland = degenerate >= opt.degenerate_switch;
    std::size_t enter = t.cols();
    double top = opt.feasibility_tolerance;
    for (std::size_t j = 0; j < t.cols(); ++j) {
      if (!allowed[j] || cost[j] <= top) continue;
      enter = j;
      if (bland) break;
      top = cost[j];
    }
    if (enter == t.cols()) return Phase::Optimal;
    std::size_t leave = t.rows();
    double best = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, enter);
      if (a <= opt.pivot_tolerance) continue;
      const double ratio = std::max(t.rhs(i), 0.0) / a;
      if (leave == t.rows() || ratio < best - 1e-12) {
        best = ratio;
        leave = i;
      } else if (ratio <= best + 1e-12) {
        // Ties: Bland takes the lowest basic index, otherwise the largest pivot.
        const bool better = bland ? t.basis()[i] < t.basis()[leave] : a > t.at(leave, enter);
        if (better) leave = i;
      }
    }
    if (leave == t.rows()) return Phase::Unbounded;
    if (pivots >= opt.max_pivots) return Phase::Limit;
    degenerate = best <= 1e-12 ? degenerate + 1 : 0;
    t.pivot(leave, enter, cost);
    ++pivots;
  }
}

}  // namespace

LpResult simplex_solve(const LinearProgram& lp, const SimplexOptions& opt) {
  const auto nv = static_cast<std::size_t>(lp.num_variables());
  const auto m = lp.rows.size();

  // Columns: each variable (free ones split into + and -), then one slack or
  // surplus per inequality row, then one artificial per row needing one.
  std::vector<std::size_t> pos(nv), neg(nv, SIZE_MAX);
  std::size_t cols = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    pos[j] = cols++;
    if (lp.free[j]) neg[j] = cols++;
  }
  std::vector<double> sign(m, 1.0);
  std::vector<RowSense> sense(m);
  for (std::size_t i = 0; i < m; ++i) {
    sense[i] = lp.rows[i].sense;
    if (lp.rows[i].rhs < 0.0) {
      sign[i] = -1.0;
      if (sense[i] == RowSense::LessEqual) sense[i] = RowSense::GreaterEqual;
      else if (sense[i] == RowSense::GreaterEqual) sense[i] = RowSense::LessEqual;
    }
  }
  std::vector<std::size_t> slack(m, SIZE_MAX), art(m, SIZE_MAX), unit(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (sense[i] != RowSense::Equal) slack[i] = cols++;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (sense[i] != RowSense::LessEqual) art[i] = cols++;
  }
  const std::size_t first_art = cols - static_cast<std::size_t>(std::count_if(art.begin(), art.end(), [](auto c) { return c != SIZE_MAX; }));

  Tableau t(m, cols);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [j, a] : lp.rows[i].coefficients) {
      const auto jj = static_cast<std::size_t>(j);
      t.at(i, pos[jj]) += sign[i] * a;
      if (neg[jj] != SIZE_MAX) t.at(i, neg[jj]) -= sign[i] * a;
    }
    t.rhs(i) = sign[i] * lp.rows[i].rhs;
    if (slack[i] != SIZE_MAX) t.at(i, slack[i]) = sense[i] == RowSense::LessEqual ? 1.0 : -1.0;
    if (art[i] != SIZE_MAX) t.at(i, art[i]) = 1.0;
    unit[i] = art[i] != SIZE_MAX ? art[i] : slack[i];
    t.basis()[i] = unit[i];
  }

  LpResult result;
  std::vector<char> allowed(cols, 1);

  // Phase one: maximise minus the sum of artificials.
  if (first_art < cols) {
    std::vector<double> c1(cols, 0.0);
    for (std::size_t j = first_art; j < cols; ++j) c1[j] = -1.0;
    auto cost = t.reduced_costs(c1);
    const auto phase = run_simplex(t, cost, allowed, opt, result.pivots);
    if (phase == Phase::Limit) {
      result.status = LpStatus::PivotLimit;
      return result;
    }
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] >= first_art) infeasibility += t.rhs(i);
    }
    if (infeasibility > opt.feasibility_tolerance) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive zero-valued artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] < first_art) continue;
      for (std::size_t j = 0; j < first_art; ++j) {
        if (std::abs(t.at(i, j)) > 1e-9) {
          t.pivot(i, j, cost);
          ++result.pivots;
          break;
        }
      }
    }
    for (std::size_t j = first_art; j < cols; ++j) allowed[j] = 0;
  }

  std::vector<double> c2(cols, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    c2[pos[j]] = lp.objective[j];
    if (neg[j] != SIZE_MAX) c2[neg[j]] = -lp.objective[j];
  }
  auto cost = t.reduced_costs(c2);
  const auto phase = run_simplex(t, cost, allowed, opt, result.pivots);
  if (phase == Phase::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }
  if (phase == Phase::Limit) {
    result.status = LpStatus::PivotLimit;
    return result;
  }

  std::vector<double> z(cols, 0.0);
  for (std::size_t i = 0; i < m; ++i) z[t.basis()[i]] = t.rhs(i);
  result.status = LpStatus::Optimal;
  result.primal.assign(nv, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    result.primal[j] = z[pos[j]] - (neg[j] != SIZE_MAX ? z[neg[j]] : 0.0);
    result.objective += lp.objective[j] * result.primal[j];
  }
  // y = c_B B^-1; column `unit[i]` of the tableau holds B^-1 e_i.
  result.duals.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double y = 0.0;
    for (std::size_t r = 0; r < m; ++r) y += c2[t.basis()[r]] * t.at(r, unit[i]);
    result.duals[i] = sign[i] * y;
  }
  for (std::size_t j = 0; j < nv; ++j) {
    if (!lp.free[j]) result.primal_residual = std::max(result.primal_residual, -result.primal[j]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    double lhs = 0.0;
    for (const auto& [j, a] : lp.rows[i].coefficients) lhs += a * result.primal[static_cast<std::size_t>(j)];
    const double gap = lhs - lp.rows[i].rhs;
    double viol = 0.0;
    switch (lp.rows[i].sense) {
      case RowSense::LessEqual:
        viol = std::max(gap, 0.0);
        break;
      case RowSense::GreaterEqual:
        viol = std::max(-gap, 0.0);
        break;
      case RowSense::Equal:
        viol = std::abs(gap);
        break;
    }
    result.primal_residual = std::max(result.primal_residual, viol);
    if (lp.rows[i].sense != RowSense::Equal) {
      result.complementary_residual = std::max(result.complementary_residual, std::abs(result.duals[i] * gap));
    }
  }
  return result;
}

void write_lp(std::ostream& out, const LinearProgram& lp, const std::string& comment) {
  const auto term = [&](double a, std::int32_t j, bool first) {
    std::string s;
    if (a < 0) s = first ? "-" : "- ";
    else s = first ? "" : "+ ";
    return s + format_exact(std::abs(a)) + " " + lp.variable_names[static_cast<std::size_t>(j)];
  };
  if (!comment.empty()) out << "\\ " << comment << "\n";
  out << "Maximize\n obj:";
  bool first = true;
  for (std::int32_t j = 0; j < lp.num_variables(); ++j) {
    if (lp.objective[static_cast<std::size_t>(j)] == 0.0) continue;
    out << " " << term(lp.objective[static_cast<std::size_t>(j)], j, first);
    first = false;
  }
  if (first) out << " 0 " << (lp.num_variables() > 0 ? lp.variable_names[0] : "x");
  out << "\nSubject To\n";
  for (const auto& row : lp.rows) {
    out << " " << row.name << ":";
    bool f = true;
    for (const auto& [j, a] : row.coefficients) {
      out << " " << term(a, j, f);
      f = false;
    }
    if (f) out << " 0 " << lp.variable_names[0];
    out << (row.sense == RowSense::LessEqual ? " <= " : row.sense == RowSense::Equal ? " = " : " >= ")
        << format_exact(row.rhs) << "\n";
  }
  out << "Bounds\n";
  for (std::int32_t j = 0; j < lp.num_variables(); ++j) {
    if (lp.free[static_cast<std::size_t>(j)]) out << " " << lp.variable_names[static_cast<std::size_t>(j)] << " free\n";
  }
  out << "End\n";
}

namespace {

void require_perfect_recall(const TreeGame& game) {
  for (Player p : {Player::One, Player::Two}) {
    if (!game.perfect_recall(p)) throw GameError("sequence-form LP needs perfect recall for " + to_string(p));
  }
}

/// x >= 0, x_empty = 1 and flow conservation at every infoset of p.
void add_flow_rows(LinearProgram& lp, const DecisionLayout& layout, std::int32_t offset, const std::string& prefix) {
  lp.add_row({prefix + "empty", {{offset, 1.0}}, RowSense::Equal, 1.0});
  std::vector<std::vector<std::pair<std::int32_t, double>>> rows(static_cast<std::size_t>(layout.num_infosets()));
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    const auto first = layout.first_sequence[static_cast<std::size_t>(i)];
    for (std::int32_t a = 0; a < layout.action_count[static_cast<std::size_t>(i)]; ++a) {
      rows[static_cast<std::size_t>(i)].emplace_back(offset + first + a, 1.0);
    }
  }
  for (std::int32_t s = 0; s < layout.num_sequences(); ++s) {
    const auto b = layout.successor_begin[static_cast<std::size_t>(s)];
    const auto e = layout.successor_begin[static_cast<std::size_t>(s) + 1];
    for (auto k = b; k < e; ++k) {
      rows[static_cast<std::size_t>(layout.successor_infoset[static_cast<std::size_t>(k)])].emplace_back(
          offset + s, -layout.successor_weight[static_cast<std::size_t>(k)]);
    }
  }
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    lp.add_row({prefix + "flow" + std::to_string(i), std::move(rows[static_cast<std::size_t>(i)]), RowSense::Equal, 0.0});
  }
}

std::vector<const LinearConstraint*> linear_items(const ConstraintSet& constraints, std::int32_t dim) {
  constraints.check_dimension(dim);
  std::vector<const LinearConstraint*> out;
  for (const auto& c : constraints.items()) {
    const auto* lin = dynamic_cast<const LinearConstraint*>(c.get());
    if (!lin) throw std::invalid_argument("the LP oracle accepts linear constraints only: " + c->describe());
    out.push_back(lin);
  }
  return out;
}

/// Payoff entries from the constrained player's perspective as (own seq, opp seq, value).
std::vector<PayoffEntry> oriented_payoffs(const TreeGame& game, Player constrained) {
  std::vector<PayoffEntry> out;
  for (const auto& e : game.payoff_entries()) {
    if (constrained == Player::One) out.push_back(e);
    else out.push_back({e.seq2, e.seq1, -e.value});
  }
  return out;
}

SequenceFormStrategy extract_x(const LpResult& r, Player p, std::int32_t n) {
  SequenceFormStrategy x;
  x.owner = p;
  x.x.assign(static_cast<std::size_t>(n), 0.0);
  if (r.status != LpStatus::Optimal) return x;
  for (std::int32_t s = 0; s < n; ++s) x.x[static_cast<std::size_t>(s)] = std::max(r.primal[static_cast<std::size_t>(s)], 0.0);
  return x;
}

}  // namespace

SequenceLp build_sequence_lp(const TreeGame& game, const ConstraintSet& extra, Player constrained) {
  require_perfect_recall(game);
  const Player o = opponent(constrained);
  const auto& lc = game.layout(constrained);
  const auto& lo = game.layout(o);
  const auto items = linear_items(extra, lc.num_sequences());

  SequenceLp out;
  out.player = constrained;
  out.num_x = lc.num_sequences();
  out.num_v = lo.num_infosets() + 1;
  auto& lp = out.program;
  for (std::int32_t s = 0; s < out.num_x; ++s) lp.add_variable("x" + std::to_string(s));
  const std::int32_t v0 = lp.add_variable("v0", 1.0, true);
  for (std::int32_t i = 0; i < lo.num_infosets(); ++i) lp.add_variable("v" + std::to_string(i + 1), 0.0, true);

  add_flow_rows(lp, lc, 0, "x_");

  // Dual of the opponent's best response: for every opponent sequence s,
  //   v[infoset(s)] - sum over infosets after s of v[I'] <= sum_x A[x][s] x.
  std::vector<std::vector<std::pair<std::int32_t, double>>> rows(static_cast<std::size_t>(lo.num_sequences()));
  rows[0].emplace_back(v0, 1.0);
  for (std::int32_t s = 1; s < lo.num_sequences(); ++s) {
    rows[static_cast<std::size_t>(s)].emplace_back(v0 + 1 + lo.infoset_of_sequence[static_cast<std::size_t>(s)], 1.0);
  }
  for (std::int32_t s = 0; s < lo.num_sequences(); ++s) {
    const auto b = lo.successor_begin[static_cast<std::size_t>(s)];
    const auto e = lo.successor_begin[static_cast<std::size_t>(s) + 1];
    for (auto k = b; k < e; ++k) {
      rows[static_cast<std::size_t>(s)].emplace_back(v0 + 1 + lo.successor_infoset[static_cast<std::size_t>(k)],
                                                     -lo.successor_weight[static_cast<std::size_t>(k)]);
    }
  }
  for (const auto& e : oriented_payoffs(game, constrained)) {
    rows[static_cast<std::size_t>(e.seq2)].emplace_back(e.seq1, -e.value);
  }
  for (std::int32_t s = 0; s < lo.num_sequences(); ++s) {
    lp.add_row({"br" + std::to_string(s), std::move(rows[static_cast<std::size_t>(s)]), RowSense::LessEqual, 0.0});
  }

  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& c = *items[i];
    std::vector<std::pair<std::int32_t, double>> coef(c.coefficients().begin(), c.coefficients().end());
    out.extra_rows.push_back(lp.add_row({"g" + std::to_string(i), std::move(coef), RowSense::LessEqual, c.offset()}));
  }
  return out;
}

LpSolution solve_sequence_lp(const SequenceLp& lp, const SimplexOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = simplex_solve(lp.program, options);
  LpSolution s;
  s.status = r.status;
  s.pivots = r.pivots;
  s.x = extract_x(r, lp.player, lp.num_x);
  if (r.status == LpStatus::Optimal) {
    s.value = r.objective;
    for (auto row : lp.extra_rows) s.lambda.push_back(r.duals[row]);
    s.primal_residual = r.primal_residual;
    s.complementary_residual = r.complementary_residual;
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

LpSolution constrained_equilibrium(const TreeGame& game, const ConstraintSet& constraints, Player constrained,
                                   bool override_guard, std::int32_t guard) {
  const auto n1 = game.layout(Player::One).num_sequences();
  const auto n2 = game.layout(Player::Two).num_sequences();
  if (!override_guard && std::max(n1, n2) > guard) {
    throw ScaleGuardError("LP refused: " + std::to_string(n1) + " and " + std::to_string(n2) +
                          " sequences exceed the guard of " + std::to_string(guard) +
                          " per player (override to run anyway)");
  }
  return solve_sequence_lp(build_sequence_lp(game, constraints, constrained));
}

LpSolution constrained_best_response(const TreeGame& game, const ConstraintSet& constraints, Player constrained,
                                     std::span<const double> opponent_behavioral) {
  require_perfect_recall(game);
  const auto& lc = game.layout(constrained);
  const auto items = linear_items(constraints, lc.num_sequences());
  std::vector<double> q(static_cast<std::size_t>(lc.num_sequences()));
  game.immediate_values(constrained, opponent_behavioral, q);

  LinearProgram lp;
  for (std::int32_t s = 0; s < lc.num_sequences(); ++s) lp.add_variable("x" + std::to_string(s), q[static_cast<std::size_t>(s)]);
  add_flow_rows(lp, lc, 0, "x_");
  std::vector<std::size_t> extra;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& c = *items[i];
    std::vector<std::pair<std::int32_t, double>> coef(c.coefficients().begin(), c.coefficients().end());
    extra.push_back(lp.add_row({"g" + std::to_string(i), std::move(coef), RowSense::LessEqual, c.offset()}));
  }
  const auto start = std::chrono::steady_clock::now();
  const auto r = simplex_solve(lp);
  LpSolution s;
  s.status = r.status;
  s.pivots = r.pivots;
  s.x = extract_x(r, constrained, lc.num_sequences());
  if (r.status == LpStatus::Optimal) {
    s.value = r.objective;
    for (auto row : extra) s.lambda.push_back(r.duals[row]);
    s.primal_residual = r.primal_residual;
    s.complementary_residual = r.complementary_residual;
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace ccfr
