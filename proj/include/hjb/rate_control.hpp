#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hjb/model_params.hpp"
#include "hjb/series_kernel.hpp"

namespace hjb {

inline constexpr double kDefaultXSwitch = 0.5;

/// One node of the tabulated logarithmic derivative w = u'/u.
struct RiccatiNode {
  double r;
  double w;
};

/// Production-rate deviations; always rho(|y|) * y for the inventory y.
struct ControlVector {
  std::vector<double> p;
};

/// Scalar production-rate coefficient rho(r) = sigma^2 u'(r) / (r u(r)).
///
/// For x = r^4/(4 sigma^4) <= x_switch rho is summed from the quotient series
///
///     rho(r) = (r^2 / sigma^2) sum_{j>=1} c_j x^{j-1},
///
/// whose coefficients are those of (sum j a_j x^j) / (sum a_j x^j). They are
/// generated from the Riccati form of that quotient, which is free of the
/// cancellation that term-by-term division suffers for large N. Beyond x_switch the series has no known convergence
/// guarantee, so rho is read from a table of w = u'/u integrated from the
/// Riccati equation  w' = r^2/sigma^4 - w^2 - (N-1) w / r.
class RateSeries {
 public:
  const ModelParams& params() const noexcept { return params_; }
  /// c_j for j = 0..order; c_0 = 0.
  std::span<const double> coefficients() const noexcept { return c_; }
  /// Number of c_j (from j = 1) actually summed inside the trust region.
  std::size_t evaluated_terms() const noexcept { return n_eval_; }
  double x_switch() const noexcept { return x_switch_; }
  /// Certified radius (the kernel's r_max).
  double r_max() const noexcept { return r_max_; }
  std::span<const RiccatiNode> riccati_table() const noexcept { return table_; }

  /// rho(r) on [0, r_max]; rho(0) = 0.
  double rate_coeff(double r) const;
  /// Quotient-series path only; valid for x <= x_switch.
  double quotient_series_rate(double r) const;
  /// Riccati-table path only; valid between the first and last table node.
  double riccati_rate(double r) const;
  /// Interpolated w = u'/u from the Riccati table.
  double riccati_w(double r) const;

  ControlVector feedback(std::span<const double> y) const;
  /// Allocation-free form of feedback(); p.size() must equal y.size().
  void feedback_into(std::span<const double> y, std::span<double> p) const;

 private:
  friend RateSeries build_rate(const SeriesKernel&, double);
  RateSeries(ModelParams params) : params_(params) {}

  double riccati_slope(double r, double w) const noexcept;

  ModelParams params_;
  std::vector<double> c_;
  std::size_t n_eval_ = 0;
  double x_switch_ = kDefaultXSwitch;
  double r_max_ = 0.0;
  std::vector<RiccatiNode> table_;
  std::vector<double> slopes_;
};

/// Throws std::invalid_argument for x_switch <= 0 and
/// PlannerError(QuotientSeriesBreakdown) if any c_j is non-finite.
RateSeries build_rate(const SeriesKernel& kernel, double x_switch = kDefaultXSwitch);

/// sigma^2 u'/(r u) evaluated straight from the kernel sums (no quotient
/// series, no table).
double direct_rate(const SeriesKernel& kernel, double r);

/// Upper envelope sigma^2 (sqrt(M^2/r^2 + 4r^2/sigma^4) - M/r) / (2r) with
/// M = N. Written in a cancellation-free form; 0 at r = 0.
double rate_envelope(int n_goods, double sigma, double r);

/// Same curve with M = N + 2. It matches rho to leading order at the origin
/// and lies below rho everywhere: at a touching point w' = 3w/r, while the
/// curve grows no faster than r^3.
double rate_lower_envelope(int n_goods, double sigma, double r);

}  // namespace hjb
