#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hjb/model_params.hpp"
#include "hjb/series_kernel.hpp"

namespace hjb {

enum class GridOrigin { Picard, Ode, Exact4d };

const char* to_string(GridOrigin origin) noexcept;

/// Radial function sampled on a strictly increasing grid.
struct RadialGridFn {
  std::vector<double> r;
  std::vector<double> values;
  GridOrigin origin;
};

/// n evenly spaced points on [lo, hi], endpoints included.
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

struct PicardOptions {
  int k_max = 500;
  /// Stop once sup_r (u^{k+1} - u^k) < tol.
  double tol = 1e-14;
  /// Richardson estimates on successive mesh refinements must agree to this
  /// relative accuracy.
  double refine_tol = 1e-10;
  /// Each output interval is split into 2^level quadrature panels.
  int initial_level = 2;
  int max_level = 14;
};

struct PicardResult {
  RadialGridFn solution;
  /// sup over the output grid of u^{k+1} - u^k, for k = 0, 1, ...
  std::vector<double> sup_increments;
  int iterations = 0;
  int level = 0;
};

/// Successive approximation of the integral form
///
///     u^k(r) = 1 + int_0^r t^{1-N} int_0^t s^{N+1} sigma^-4 u^{k-1}(s) ds dt,
///     u^0 = 1.
///
/// The inner integral is a product trapezoid rule (u piecewise linear,
/// s^{N+1} integrated exactly), the outer one a plain trapezoid rule; two
/// mesh levels are combined by Richardson extrapolation and the mesh is
/// refined until the extrapolated values settle. Iterates are advanced
/// through their increments, which keeps the sequence nondecreasing in k
/// exactly. Throws PlannerError(PicardNotConverged) when tol is not met by
/// k_max.
PicardResult picard_solve(const ModelParams& params, std::span<const double> grid,
                          const PicardOptions& options = {});

/// Analytic ceiling on sup_{[0,R]} (u^{k+1} - u^k): (R^4/(4 sigma^4 (N+2)))^{k+1} / (k+1)!.
double picard_increment_bound(const ModelParams& params, int k);

/// Integrates u'' + (N-1)/r u' = r^2 u / sigma^4, u(0) = 1, u'(0) = 0 with
/// fixed-step RK4, starting from the two-term series near the origin and
/// doubling the step count until outputs change by less than step_tol
/// (relative). Throws PlannerError(DirectIntegrationRange) once u exceeds
/// 1e280.
RadialGridFn ode_solve(const ModelParams& params, std::span<const double> grid, double step_tol = 1e-12);

enum class ExactSolution { Growing, Decaying };

/// Closed-form four-dimensional solutions exp(+-r^2/(2 sigma^2)) / r^2 of the
/// radial equation. Returns max over the grid of
/// |u'' + (3/r) u' - (r^2/sigma^4) u| / max(1, |u|) using analytic
/// derivatives. All grid points must be positive.
double verify_exact_4d(double sigma, ExactSolution which, std::span<const double> grid);

/// Sampled closed-form solution on a positive grid.
RadialGridFn exact_4d_solution(double sigma, ExactSolution which, std::span<const double> grid);

inline constexpr double kBoundSlack = 1e-12;

struct BoundMargin {
  double r;
  std::string bound_name;
  double margin;
};

/// Per-point margins of the growth bounds on u and u', the cap rho <= 1 and
/// the envelope on rho. Margins on u and u' are relative to the bound;
/// margins on rho are absolute (rho is dimensionless and <= 1).
struct BoundReport {
  ModelParams params;
  std::vector<BoundMargin> margins;

  double min_margin() const;
  std::optional<BoundMargin> first_violation(double slack = kBoundSlack) const;
  void write_csv(std::ostream& os) const;
  void write_summary(std::ostream& os) const;
};

BoundReport evaluate_bounds(const SeriesKernel& kernel, std::span<const double> grid);

/// evaluate_bounds, then PlannerError(BoundViolation) naming the bound and r
/// of the first margin below -kBoundSlack.
BoundReport check_bounds(const SeriesKernel& kernel, std::span<const double> grid);

}  // namespace hjb
