#include "ccfr/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ccfr/format.hpp"

namespace ccfr {

void Constraint::add_scaled_subgradient(std::span<const double> x, double scale, std::span<double> out) const {
  std::vector<double> g(out.size(), 0.0);
  subgradient(x, g);
  for (std::size_t s = 0; s < out.size(); ++s) out[s] += scale * g[s];
}

LinearConstraint::LinearConstraint(std::int32_t dimension, std::vector<std::pair<std::int32_t, double>> coefficients,
                                   double offset, std::string label)
    : dimension_(dimension), offset_(offset), label_(std::move(label)) {
  std::map<std::int32_t, double> merged;
  for (const auto& [s, a] : coefficients) {
    if (s < 0 || s >= dimension) {
      throw std::out_of_range("constraint coefficient index " + std::to_string(s) + " outside [0, " +
                              std::to_string(dimension) + ")");
    }
    merged[s] += a;
  }
  for (const auto& [s, a] : merged) {
    if (a != 0.0) coefficients_.emplace_back(s, a);
  }
}

LinearConstraint LinearConstraint::at_most(std::int32_t dimension, std::vector<std::pair<std::int32_t, double>> a,
                                           double bound, std::string label) {
  return LinearConstraint(dimension, std::move(a), bound, std::move(label));
}

LinearConstraint LinearConstraint::at_least(std::int32_t dimension, std::vector<std::pair<std::int32_t, double>> a,
                                            double bound, std::string label) {
  for (auto& entry : a) entry.second = -entry.second;
  return LinearConstraint(dimension, std::move(a), -bound, std::move(label));
}

double LinearConstraint::value(std::span<const double> x) const {
  double v = -offset_;
  for (const auto& [s, a] : coefficients_) v += a * x[static_cast<std::size_t>(s)];
  return v;
}

void LinearConstraint::subgradient(std::span<const double>, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& [s, a] : coefficients_) out[static_cast<std::size_t>(s)] = a;
}

void LinearConstraint::add_scaled_subgradient(std::span<const double>, double scale, std::span<double> out) const {
  for (const auto& [s, a] : coefficients_) out[static_cast<std::size_t>(s)] += scale * a;
}

double LinearConstraint::l1_norm() const {
  double n = 0.0;
  for (const auto& entry : coefficients_) n += std::abs(entry.second);
  return n;
}

std::string LinearConstraint::describe() const {
  std::ostringstream out;
  out << (label_.empty() ? "linear" : label_) << ": ";
  bool first = true;
  for (const auto& [s, a] : coefficients_) {
    if (!first) out << " + ";
    out << format_number(a) << "*x[" << s << "]";
    first = false;
  }
  if (first) out << "0";
  out << " <= " << format_number(offset_);
  return out.str();
}

MaxOfLinearConstraint::MaxOfLinearConstraint(std::vector<LinearConstraint> pieces, std::string label)
    : pieces_(std::move(pieces)), label_(std::move(label)) {
  if (pieces_.empty()) throw std::invalid_argument("max constraint needs at least one piece");
  for (const auto& p : pieces_) {
    if (p.dimension() != pieces_.front().dimension()) throw std::invalid_argument("max constraint pieces differ in dimension");
  }
}

std::int32_t MaxOfLinearConstraint::dimension() const { return pieces_.front().dimension(); }

std::size_t MaxOfLinearConstraint::argmax(std::span<const double> x) const {
  std::size_t best = 0;
  double v = pieces_[0].value(x);
  for (std::size_t j = 1; j < pieces_.size(); ++j) {
    const double w = pieces_[j].value(x);
    if (w > v) {
      v = w;
      best = j;
    }
  }
  return best;
}

double MaxOfLinearConstraint::value(std::span<const double> x) const { return pieces_[argmax(x)].value(x); }

void MaxOfLinearConstraint::subgradient(std::span<const double> x, std::span<double> out) const {
  pieces_[argmax(x)].subgradient(x, out);
}

void MaxOfLinearConstraint::add_scaled_subgradient(std::span<const double> x, double scale,
                                                   std::span<double> out) const {
  pieces_[argmax(x)].add_scaled_subgradient(x, scale, out);
}

std::string MaxOfLinearConstraint::describe() const {
  std::string s = (label_.empty() ? std::string("max") : label_) + ": max(";
  for (std::size_t j = 0; j < pieces_.size(); ++j) s += (j ? "; " : "") + pieces_[j].describe();
  return s + ")";
}

SquaredDistanceConstraint::SquaredDistanceConstraint(std::int32_t dimension, std::vector<Term> terms, double radius,
                                                     std::string label)
    : dimension_(dimension), terms_(std::move(terms)), radius_(radius), label_(std::move(label)) {
  for (const auto& t : terms_) {
    if (t.sequence < 0 || t.sequence >= dimension) throw std::out_of_range("squared-distance index out of range");
    if (!(t.weight > 0.0)) throw std::invalid_argument("squared-distance weights must be positive");
  }
}

double SquaredDistanceConstraint::value(std::span<const double> x) const {
  double v = -radius_ * radius_;
  for (const auto& t : terms_) {
    const double d = x[static_cast<std::size_t>(t.sequence)] - t.target;
    v += t.weight * d * d;
  }
  return v;
}

void SquaredDistanceConstraint::subgradient(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  add_scaled_subgradient(x, 1.0, out);
}

void SquaredDistanceConstraint::add_scaled_subgradient(std::span<const double> x, double scale,
                                                       std::span<double> out) const {
  for (const auto& t : terms_) {
    const auto s = static_cast<std::size_t>(t.sequence);
    out[s] += scale * 2.0 * t.weight * (x[s] - t.target);
  }
}

std::string SquaredDistanceConstraint::describe() const {
  return (label_.empty() ? std::string("distance") : label_) + ": squared distance over " +
         std::to_string(terms_.size()) + " sequences <= " + format_number(radius_) + "^2";
}

ConstraintSet::ConstraintSet(std::vector<ConstraintPtr> constraints) : constraints_(std::move(constraints)) {
  for (const auto& c : constraints_) {
    if (!c) throw std::invalid_argument("null constraint");
  }
}

void ConstraintSet::add(ConstraintPtr c) {
  if (!c) throw std::invalid_argument("null constraint");
  constraints_.push_back(std::move(c));
}

bool ConstraintSet::all_linear() const {
  return std::all_of(constraints_.begin(), constraints_.end(), [](const auto& c) { return c->linear(); });
}

void ConstraintSet::values(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < constraints_.size(); ++i) out[i] = constraints_[i]->value(x);
}

std::vector<double> ConstraintSet::values(std::span<const double> x) const {
  std::vector<double> out(constraints_.size());
  values(x, out);
  return out;
}

void ConstraintSet::tilt(std::span<const double> x, std::span<const double> lambda, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    if (lambda[i] != 0.0) constraints_[i]->add_scaled_subgradient(x, lambda[i], out);
  }
}

void ConstraintSet::check_dimension(std::int32_t dimension) const {
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    if (constraints_[i]->dimension() != dimension) {
      throw std::invalid_argument("constraint " + std::to_string(i) + " has dimension " +
                                  std::to_string(constraints_[i]->dimension()) + ", expected " +
                                  std::to_string(dimension));
    }
  }
}

double total_positive_violation(std::span<const double> values) {
  double t = 0.0;
  for (double v : values) t += std::max(v, 0.0);
  return t;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile needs p in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  // Evaluate on the lower half and reflect, which makes the odd symmetry exact.
  const bool upper = p > 0.5;
  const double q = upper ? 1.0 - p : p;
  double x;
  if (q < 0.02425) {
    const double r = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  } else {
    const double r = q - 0.5;
    const double s = r * r;
    x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
        (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
  }
  if (q != 0.5) {
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - q;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
  } else {
    x = 0.0;
  }
  return upper ? -x : x;
}

IntervalBound wilson_interval(std::int64_t successes, std::int64_t n, double gamma) {
  if (n <= 0) throw std::invalid_argument("wilson_interval needs n >= 1");
  if (successes < 0 || successes > n) throw std::invalid_argument("successes outside [0, n]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("confidence must be in (0, 1)");
  const double z = normal_quantile((1.0 + gamma) / 2.0);
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half = (z / denom) * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn));
  IntervalBound out;
  out.lower = std::clamp(center - half, 0.0, 1.0);
  out.upper = std::clamp(center + half, 0.0, 1.0);
  if (successes == 0) out.lower = 0.0;
  if (successes == n) out.upper = 1.0;
  out.confidence = gamma;
  out.samples = n;
  out.successes = successes;
  return out;
}

LinearConstraint build_risk_constraint(const TransitGame& game, double bound) {
  if (!(bound >= 0.0 && bound <= 1.0)) throw std::invalid_argument("risk bound must be in [0, 1]");
  const auto coef = game.risk_coefficients();
  std::vector<std::pair<std::int32_t, double>> a;
  for (std::size_t s = 0; s < coef.size(); ++s) {
    if (coef[s] != 0.0) a.emplace_back(static_cast<std::int32_t>(s), coef[s]);
  }
  return LinearConstraint::at_most(static_cast<std::int32_t>(coef.size()), std::move(a), bound,
                                   "risk<=" + format_number(bound));
}

}  // namespace ccfr
