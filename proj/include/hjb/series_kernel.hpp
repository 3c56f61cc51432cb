#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hjb/model_params.hpp"

namespace hjb {

inline constexpr double kDefaultTermTol = 1e-15;
inline constexpr std::size_t kDefaultMaxTerms = 100000;

/// log a_j for j = 0..order, where a_0 = 1 and
/// a_j = a_{j-1} / (j (N + 4j - 2)).
std::vector<double> log_series_coefficients(int n_goods, std::size_t order);

/// Log-sum-exp of a span; -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> values);

/// Truncated power series of the radial value-function kernel
///
///     u(r) = sum_j a_j x^j,   x = r^4 / (4 sigma^4),
///
/// certified on [0, r_max]. The truncation order is fixed when the kernel is
/// built, so every evaluation is a pure function of r. Evaluations with
/// x <= 1 use plain Horner sums; beyond that the sums run in log space so
/// eval_log_u stays finite long after eval_u overflows.
class SeriesKernel {
 public:
  const ModelParams& params() const noexcept { return params_; }
  std::span<const double> log_coefficients() const noexcept { return log_a_; }
  std::size_t truncation_order() const noexcept { return log_a_.size() - 1; }
  double term_tol() const noexcept { return term_tol_; }
  double r_max() const noexcept { return r_max_; }

  double eval_u(double r) const;
  double eval_log_u(double r) const;
  double eval_u_prime(double r) const;
  /// ln u'(r); -inf at r = 0.
  double eval_log_u_prime(double r) const;
  /// u'(r) / u(r) without forming either factor when they would overflow.
  double log_derivative(double r) const;

  /// 2 sigma^2 (ln u(R) - ln u(r0)): expected quadratic cost accumulated
  /// under the optimal control from |y(0)| = r0 until |y| reaches R.
  double expected_optimal_cost(double r0) const;

  /// Copy with a_j multiplied by `factor`. Fault-injection hook for the
  /// verification harness; the result no longer solves the radial ODE.
  SeriesKernel with_scaled_coefficient(std::size_t j, double factor) const;

 private:
  friend SeriesKernel build_kernel(const ModelParams&, double, double, std::size_t);
  SeriesKernel(ModelParams params, std::vector<double> log_a, double term_tol, double r_max);

  void check_range(double r) const;

  ModelParams params_;
  std::vector<double> log_a_;
  std::vector<double> a_;
  double term_tol_;
  double r_max_;
};

/// Chooses the truncation order J so the first omitted term at r_max is below
/// term_tol times the partial sum. Throws PlannerError(SeriesTruncationOverflow)
/// if J would exceed max_terms, std::invalid_argument on bad arguments.
SeriesKernel build_kernel(const ModelParams& params, double term_tol, double r_max,
                          std::size_t max_terms = kDefaultMaxTerms);

/// Kernel certified on [0, params.radius()] with the default tolerance.
SeriesKernel build_kernel(const ModelParams& params);

}  // namespace hjb
