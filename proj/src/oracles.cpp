#include "hjb/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hjb/error.hpp"
#include "hjb/rate_control.hpp"

namespace hjb {
namespace {

void require_increasing(std::span<const double> grid, bool from_zero) {
  if (grid.empty()) throw std::invalid_argument("grid is empty");
  if (from_zero && grid.front() != 0.0) throw std::invalid_argument("grid must start at 0");
  if (!from_zero && !(grid.front() > 0.0)) throw std::invalid_argument("grid points must be positive");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
}

// 1 - q^k for 0 <= q < 1 without cancellation near q = 1.
double one_minus_pow(double q, double k) {
  if (q == 0.0) return 1.0;
  return -std::expm1(k * std::log(q));
}

struct PicardLevel {
  std::vector<double> u;                       // on the output grid
  std::vector<std::vector<double>> increments;  // d_k on the output grid
  bool converged = false;
  double last_sup = 0.0;
};

PicardLevel run_picard_level(const ModelParams& p, std::span<const double> grid, int level,
                             const PicardOptions& opt) {
  const std::size_t m = std::size_t{1} << level;
  const std::size_t n_out = grid.size();
  const std::size_t n_mesh = (n_out - 1) * m + 1;
  std::vector<double> t(n_mesh);
  for (std::size_t i = 0; i + 1 < n_out; ++i)
    for (std::size_t s = 0; s < m; ++s)
      t[i * m + s] = grid[i] + (grid[i + 1] - grid[i]) * static_cast<double>(s) / static_cast<double>(m);
  t.back() = grid.back();

  // Panel weights of the scaled inner integral
  //   J(t_k) = t_k^{-(N+2)} int_0^{t_k} s^{N+1} f(s) ds
  // with f linear on each panel:
  //   J_k = q^{N+2} J_{k-1} + w_lo f_{k-1} + w_hi f_k,  q = t_{k-1}/t_k.
  const double np2 = p.n_goods() + 2.0;
  const double np3 = p.n_goods() + 3.0;
  std::vector<double> carry(n_mesh, 0.0), w_lo(n_mesh, 0.0), w_hi(n_mesh, 0.0);
  for (std::size_t k = 1; k < n_mesh; ++k) {
    const double q = t[k - 1] / t[k];
    const double m0 = one_minus_pow(q, np2) / np2;
    const double m1 = (one_minus_pow(q, np3) / np3 - q * m0) / (1.0 - q);
    carry[k] = (q == 0.0) ? 0.0 : std::exp(np2 * std::log(q));
    w_hi[k] = m1;
    w_lo[k] = m0 - m1;
  }
  const double s4 = std::pow(p.sigma(), 4);

  auto apply = [&](const std::vector<double>& f, std::vector<double>& out) {
    double inner = f[0] / np2;
    double g_prev = 0.0;
    out[0] = 0.0;
    for (std::size_t k = 1; k < n_mesh; ++k) {
      inner = carry[k] * inner + w_lo[k] * f[k - 1] + w_hi[k] * f[k];
      const double g = t[k] * t[k] * t[k] * inner / s4;
      out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (g_prev + g);
      g_prev = g;
    }
  };

  PicardLevel result;
  std::vector<double> u(n_mesh, p.alpha());
  std::vector<double> d(n_mesh, p.alpha());
  std::vector<double> next(n_mesh);
  for (int k = 1; k <= opt.k_max; ++k) {
    apply(d, next);
    d.swap(next);
    std::vector<double> d_out(n_out);
    double sup = 0.0;
    for (std::size_t i = 0; i < n_out; ++i) {
      d_out[i] = d[i * m];
      sup = std::max(sup, d_out[i]);
    }
    for (std::size_t i = 0; i < n_mesh; ++i) u[i] += d[i];
    result.increments.push_back(std::move(d_out));
    result.last_sup = sup;
    if (sup < opt.tol) {
      result.converged = true;
      break;
    }
  }
  result.u.resize(n_out);
  for (std::size_t i = 0; i < n_out; ++i) result.u[i] = u[i * m];
  return result;
}

std::vector<double> richardson(const std::vector<double>& coarse, const std::vector<double>& fine) {
  std::vector<double> out(coarse.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return out;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
  return worst;
}

}  // namespace

const char* to_string(GridOrigin origin) noexcept {
  switch (origin) {
    case GridOrigin::Picard: return "picard";
    case GridOrigin::Ode: return "ode";
    case GridOrigin::Exact4d: return "exact4d";
  }
  return "unknown";
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("uniform_grid needs at least two points");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = hi;
  return g;
}

PicardResult picard_solve(const ModelParams& params, std::span<const double> grid, const PicardOptions& opt) {
  require_increasing(grid, true);
  if (grid.size() < 2) throw std::invalid_argument("Picard grid needs at least two points");
  if (grid.back() > params.radius() * (1.0 + 1e-12)) throw std::invalid_argument("Picard grid exceeds R");
  if (opt.k_max < 1) throw std::invalid_argument("k_max must be >= 1");

  auto solve_level = [&](int level) {
    PicardLevel lv = run_picard_level(params, grid, level, opt);
    if (!lv.converged) {
      std::ostringstream os;
      os << "sup increment " << lv.last_sup << " after " << opt.k_max << " iterations (tol " << opt.tol << ")";
      throw PlannerError(ErrorKind::PicardNotConverged, os.str());
    }
    return lv;
  };

  int level = opt.initial_level;
  PicardLevel coarse = solve_level(level);
  PicardLevel fine = solve_level(level + 1);
  std::vector<double> estimate = richardson(coarse.u, fine.u);
  for (;;) {
    if (level + 2 > opt.max_level) {
      throw PlannerError(ErrorKind::PicardNotConverged, "mesh refinement limit reached before self-consistency");
    }
    PicardLevel finer = solve_level(level + 2);
    std::vector<double> next = richardson(fine.u, finer.u);
    const double change = max_rel_diff(next, estimate);
    coarse = std::move(fine);
    fine = std::move(finer);
    estimate = std::move(next);
    ++level;
    if (change < opt.refine_tol) break;
  }

  PicardResult result;
  result.level = level + 1;
  result.solution = {std::vector<double>(grid.begin(), grid.end()), estimate, GridOrigin::Picard};
  const std::size_t iters = std::max(coarse.increments.size(), fine.increments.size());
  result.iterations = static_cast<int>(iters);
  for (std::size_t k = 0; k < iters; ++k) {
    std::vector<double> dk;
    if (k < coarse.increments.size() && k < fine.increments.size())
      dk = richardson(coarse.increments[k], fine.increments[k]);
    else
      dk = (k < fine.increments.size()) ? fine.increments[k] : coarse.increments[k];
    result.sup_increments.push_back(*std::max_element(dk.begin(), dk.end()));
  }
  return result;
}

double picard_increment_bound(const ModelParams& params, int k) {
  const double radius = params.radius();
  const double base = std::pow(radius, 4) / (4.0 * std::pow(params.sigma(), 4) * (params.n_goods() + 2.0));
  const double kp1 = k + 1.0;
  return params.alpha() * std::exp(kp1 * std::log(base) - std::lgamma(kp1 + 1.0));
}

RadialGridFn ode_solve(const ModelParams& params, std::span<const double> grid, double step_tol) {
  require_increasing(grid, true);
  if (!(step_tol > 0.0)) throw std::invalid_argument("step_tol must be positive");
  const double n = params.n_goods();
  const double s = params.sigma();
  const double s4 = std::pow(s, 4);
  const double alpha = params.alpha();
  constexpr double kOverflow = 1e280;

  // Below r_eps the two-term expansion is exact to rounding.
  const double r_eps = std::min(1e-2 * s, grid.size() > 1 ? grid[1] : grid[0]);
  auto series_u = [&](double r) { return alpha * (1.0 + r * r * r * r / (4.0 * s4 * (n + 2.0))); };
  auto series_du = [&](double r) { return alpha * r * r * r / (s4 * (n + 2.0)); };

  auto rhs = [&](double r, double u, double du, double& d_u, double& d_du) {
    d_u = du;
    d_du = r * r * u / s4 - (n - 1.0) * du / r;
  };

  auto integrate = [&](double scale) {
    std::vector<double> out(grid.size());
    double r = r_eps, u = series_u(r_eps), du = series_du(r_eps);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double target = grid[i];
      if (target <= r_eps) {
        out[i] = series_u(target);
        continue;
      }
      // Step bounded by the stiff (N-1)/r term near the origin and by the
      // exp(r^2/(2 sigma^2)) growth far out.
      const double h_max = scale * std::min(r / (n + 1.0), s * s / std::max(target, s));
      const auto steps = static_cast<std::size_t>(std::ceil((target - r) / h_max));
      const double h = (target - r) / static_cast<double>(std::max<std::size_t>(steps, 1));
      for (std::size_t k = 0; k < std::max<std::size_t>(steps, 1); ++k) {
        double k1u, k1d, k2u, k2d, k3u, k3d, k4u, k4d;
        rhs(r, u, du, k1u, k1d);
        rhs(r + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1d, k2u, k2d);
        rhs(r + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2d, k3u, k3d);
        rhs(r + h, u + h * k3u, du + h * k3d, k4u, k4d);
        u += h * (k1u + 2 * k2u + 2 * k3u + k4u) / 6.0;
        du += h * (k1d + 2 * k2d + 2 * k3d + k4d) / 6.0;
        r += h;
        if (!(std::abs(u) < kOverflow)) {
          std::ostringstream os;
          os << "u exceeded " << kOverflow << " near r=" << r;
          throw PlannerError(ErrorKind::DirectIntegrationRange, os.str());
        }
      }
      r = target;
      out[i] = u;
    }
    return out;
  };

  double scale = 0.2;
  std::vector<double> prev = integrate(scale);
  for (int it = 0; it < 20; ++it) {
    scale *= 0.5;
    std::vector<double> cur = integrate(scale);
    const double change = max_rel_diff(prev, cur);
    prev = std::move(cur);
    if (change < step_tol) break;
  }
  return {std::vector<double>(grid.begin(), grid.end()), std::move(prev), GridOrigin::Ode};
}

RadialGridFn exact_4d_solution(double sigma, ExactSolution which, std::span<const double> grid) {
  require_increasing(grid, false);
  const double sgn = (which == ExactSolution::Growing) ? 1.0 : -1.0;
  RadialGridFn fn{std::vector<double>(grid.begin(), grid.end()), {}, GridOrigin::Exact4d};
  for (double r : grid) fn.values.push_back(std::exp(sgn * r * r / (2.0 * sigma * sigma)) / (r * r));
  return fn;
}

double verify_exact_4d(double sigma, ExactSolution which, std::span<const double> grid) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  require_increasing(grid, false);
  const double c = ((which == ExactSolution::Growing) ? 1.0 : -1.0) / (2.0 * sigma * sigma);
  const double s4 = std::pow(sigma, 4);
  double worst = 0.0;
  for (double r : grid) {
    const double u = std::exp(c * r * r) / (r * r);
    const double lead = 2.0 * c * r - 2.0 / r;  // u'/u
    const double du = u * lead;
    const double d2u = u * (lead * lead + 2.0 * c + 2.0 / (r * r));
    const double residual = d2u + 3.0 / r * du - r * r / s4 * u;
    worst = std::max(worst, std::abs(residual) / std::max(1.0, std::abs(u)));
  }
  return worst;
}

double BoundReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : margins) m = std::min(m, b.margin);
  return m;
}

std::optional<BoundMargin> BoundReport::first_violation(double slack) const {
  for (const auto& b : margins)
    if (!(b.margin >= -slack)) return b;
  return std::nullopt;
}

void BoundReport::write_csv(std::ostream& os) const {
  os << "r,bound_name,margin\n" << std::setprecision(17);
  for (const auto& b : margins) os << b.r << ',' << b.bound_name << ',' << b.margin << '\n';
}

void BoundReport::write_summary(std::ostream& os) const {
  os << "bounds N=" << params.n_goods() << " sigma=" << params.sigma() << " R=" << params.radius() << ": ";
  if (auto v = first_violation()) {
    os << "FAIL " << v->bound_name << " at r=" << std::setprecision(17) << v->r << " margin=" << v->margin << '\n';
  } else {
    os << "ok, " << margins.size() << " margins, min " << std::setprecision(6) << min_margin() << '\n';
  }
}

BoundReport evaluate_bounds(const SeriesKernel& kernel, std::span<const double> grid) {
  const ModelParams& p = kernel.params();
  const double n = p.n_goods();
  const double s = p.sigma();
  BoundReport report{p, {}};
  for (double r : grid) {
    const double x = p.expansion_variable(r);
    const double log_growth = x / (n + 2.0);  // r^4 / (4 sigma^4 (N+2))
    const double log_u = kernel.eval_log_u(r);
    report.margins.push_back({r, "u_exp_bound", -std::expm1(log_u - std::log(p.alpha()) - log_growth)});

    double du_margin = 0.0;
    if (r > 0.0) {
      const double log_du_bound = std::log(p.alpha()) + 3.0 * std::log(r) - 4.0 * std::log(s) - std::log(n + 2.0) + log_growth;
      du_margin = -std::expm1(kernel.eval_log_u_prime(r) - log_du_bound);
    }
    report.margins.push_back({r, "du_exp_bound", du_margin});

    const double rho = direct_rate(kernel, r);
    report.margins.push_back({r, "rate_cap", 1.0 - rho});
    report.margins.push_back({r, "rate_envelope", rate_envelope(p.n_goods(), s, r) - rho});
  }
  return report;
}

BoundReport check_bounds(const SeriesKernel& kernel, std::span<const double> grid) {
  BoundReport report = evaluate_bounds(kernel, grid);
  if (auto v = report.first_violation()) {
    std::ostringstream os;
    os << v->bound_name << " at r=" << std::setprecision(17) << v->r << " (margin " << v->margin << ")";
    throw PlannerError(ErrorKind::BoundViolation, os.str());
  }
  return report;
}

}  // namespace hjb
