#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccfr/transit.hpp"

namespace ccfr {

/// Convex function f over one player's sequence-form vector; feasible when f(x) <= 0.
/// Implementations must be safe to evaluate concurrently.
class Constraint {
 public:
  virtual ~Constraint() = default;

  virtual std::int32_t dimension() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  /// Writes a subgradient at x into `out` (size dimension()).
  virtual void subgradient(std::span<const double> x, std::span<double> out) const = 0;
  /// out += scale * subgradient(x).
  virtual void add_scaled_subgradient(std::span<const double> x, double scale, std::span<double> out) const;
  virtual bool linear() const { return false; }
  virtual std::string describe() const = 0;
};

using ConstraintPtr = std::shared_ptr<const Constraint>;

/// f(x) = a . x - b with sparse a.
class LinearConstraint final : public Constraint {
 public:
  /// Duplicate indices are summed; zero coefficients dropped. Throws
  /// std::out_of_range for indices outside [0, dimension).
  LinearConstraint(std::int32_t dimension, std::vector<std::pair<std::int32_t, double>> coefficients, double offset,
                   std::string label = {});

  /// a . x <= bound
  static LinearConstraint at_most(std::int32_t dimension, std::vector<std::pair<std::int32_t, double>> a, double bound,
                                  std::string label = {});
  /// a . x >= bound, stored as -a . x + bound <= 0
  static LinearConstraint at_least(std::int32_t dimension, std::vector<std::pair<std::int32_t, double>> a, double bound,
                                   std::string label = {});

  std::int32_t dimension() const override { return dimension_; }
  double value(std::span<const double> x) const override;
  void subgradient(std::span<const double> x, std::span<double> out) const override;
  void add_scaled_subgradient(std::span<const double> x, double scale, std::span<double> out) const override;
  bool linear() const override { return true; }
  std::string describe() const override;

  std::span<const std::pair<std::int32_t, double>> coefficients() const { return coefficients_; }
  double offset() const { return offset_; }
  double l1_norm() const;
  const std::string& label() const { return label_; }

 private:
  std::int32_t dimension_;
  std::vector<std::pair<std::int32_t, double>> coefficients_;
  double offset_;
  std::string label_;
};

/// f(x) = max_j (a_j . x - b_j); the subgradient is the first attaining piece.
class MaxOfLinearConstraint final : public Constraint {
 public:
  explicit MaxOfLinearConstraint(std::vector<LinearConstraint> pieces, std::string label = {});

  std::int32_t dimension() const override;
  double value(std::span<const double> x) const override;
  void subgradient(std::span<const double> x, std::span<double> out) const override;
  void add_scaled_subgradient(std::span<const double> x, double scale, std::span<double> out) const override;
  std::string describe() const override;

 private:
  std::size_t argmax(std::span<const double> x) const;
  std::vector<LinearConstraint> pieces_;
  std::string label_;
};

/// f(x) = sum_j w_j (x[s_j] - c_j)^2 - r^2 with w_j > 0.
class SquaredDistanceConstraint final : public Constraint {
 public:
  struct Term {
    std::int32_t sequence;
    double target;
    double weight = 1.0;
  };
  SquaredDistanceConstraint(std::int32_t dimension, std::vector<Term> terms, double radius, std::string label = {});

  std::int32_t dimension() const override { return dimension_; }
  double value(std::span<const double> x) const override;
  void subgradient(std::span<const double> x, std::span<double> out) const override;
  void add_scaled_subgradient(std::span<const double> x, double scale, std::span<double> out) const override;
  std::string describe() const override;

 private:
  std::int32_t dimension_;
  std::vector<Term> terms_;
  double radius_;
  std::string label_;
};

/// Ordered constraint list over one player's sequences.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  explicit ConstraintSet(std::vector<ConstraintPtr> constraints);

  void add(ConstraintPtr c);
  template <class C>
  void emplace(C c) {
    add(std::make_shared<const C>(std::move(c)));
  }

  std::size_t size() const { return constraints_.size(); }
  bool empty() const { return constraints_.empty(); }
  const Constraint& operator[](std::size_t i) const { return *constraints_.at(i); }
  std::span<const ConstraintPtr> items() const { return constraints_; }
  bool all_linear() const;

  void values(std::span<const double> x, std::span<double> out) const;
  std::vector<double> values(std::span<const double> x) const;
  /// out = sum_i lambda_i * grad f_i(x).
  void tilt(std::span<const double> x, std::span<const double> lambda, std::span<double> out) const;
  /// Throws std::invalid_argument unless every constraint has the given dimension.
  void check_dimension(std::int32_t dimension) const;

 private:
  std::vector<ConstraintPtr> constraints_;
};

/// sum_i max(f_i, 0).
double total_positive_violation(std::span<const double> values);

/// Inverse standard normal CDF (Acklam's rational approximation followed by
/// one Halley step against erfc). Throws std::domain_error outside (0, 1).
double normal_quantile(double p);

struct IntervalBound {
  std::string statistic;
  double lower = 0.0;
  double upper = 1.0;
  double confidence = 0.95;
  std::int64_t samples = 0;
  std::int64_t successes = 0;
};

/// Wilson score interval at two-sided confidence gamma, clipped to [0, 1].
/// Throws std::invalid_argument for n = 0, successes outside [0, n] or gamma outside (0, 1).
IntervalBound wilson_interval(std::int64_t successes, std::int64_t n, double gamma);

/// risk(x) - b_r over the patroller's sequences. Throws std::invalid_argument
/// when b_r is outside [0, 1].
LinearConstraint build_risk_constraint(const TransitGame& game, double bound);

}  // namespace ccfr
