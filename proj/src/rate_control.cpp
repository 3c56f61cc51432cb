#include "hjb/rate_control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hjb/error.hpp"

namespace hjb {
namespace {

constexpr std::size_t kMinQuotientOrder = 40;
constexpr std::size_t kMaxQuotientOrder = 400;
// Terms with |c_j| x_switch^(j-1) below this fraction of c_1 are dropped.
constexpr double kQuotientTailTol = 1e-18;

constexpr double kRiccatiStart = 1e-6;
constexpr double kRiccatiRelTol = 1e-10;
constexpr double kInitialStepScale = 0.05;
constexpr std::size_t kMaxTableSize = 20'000'000;

double envelope_with(double m, double sigma, double r) {
  const double s2 = sigma * sigma;
  const double q = 2.0 * r * r / s2;  // 2 r^2 / sigma^2
  return 2.0 * r * r / (s2 * (std::sqrt(m * m + q * q) + m));
}

std::vector<double> step_grid(const ModelParams& p, double r_end, double scale) {
  const double n = p.n_goods();
  const double s = p.sigma();
  std::vector<double> grid{kRiccatiStart};
  double r = kRiccatiStart;
  while (r < r_end) {
    const double h = scale / ((n + 1.0) / r + 2.0 * r / (s * s) + 1.0 / s);
    r = std::min(r + h, r_end);
    grid.push_back(r);
  }
  return grid;
}

std::vector<double> refine(const std::vector<double>& grid) {
  std::vector<double> fine;
  fine.reserve(2 * grid.size());
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    fine.push_back(grid[i]);
    fine.push_back(0.5 * (grid[i] + grid[i + 1]));
  }
  fine.push_back(grid.back());
  return fine;
}

}  // namespace

double RateSeries::riccati_slope(double r, double w) const noexcept {
  const double s2 = params_.sigma() * params_.sigma();
  return r * r / (s2 * s2) - w * w - (params_.n_goods() - 1.0) * w / r;
}

RateSeries build_rate(const SeriesKernel& kernel, double x_switch) {
  if (!(x_switch > 0.0) || !std::isfinite(x_switch)) throw std::invalid_argument("x_switch must be positive");
  const ModelParams& p = kernel.params();
  RateSeries rate(p);
  rate.x_switch_ = x_switch;
  rate.r_max_ = kernel.r_max();

  // q(x) = sum c_j x^j = x u_x / u obeys 4 (x q' + q^2) + (N - 2) q = x, so
  //   (4j + N - 2) c_j = [j == 1] - 4 sum_{i=1}^{j-1} c_i c_{j-i}.
  // Every product in the sum has sign (-1)^j: no cancellation, unlike
  // dividing the series for x u_x by the one for u term by term.
  const std::size_t order =
      std::clamp<std::size_t>(kernel.truncation_order(), kMinQuotientOrder, kMaxQuotientOrder);
  auto& c = rate.c_;
  c.assign(order + 1, 0.0);
  for (std::size_t j = 1; j <= order; ++j) {
    double acc = j == 1 ? 1.0 : 0.0;
    for (std::size_t i = 1; i < j; ++i) acc -= 4.0 * c[i] * c[j - i];
    c[j] = acc / (4.0 * static_cast<double>(j) + p.n_goods() - 2.0);
    if (!std::isfinite(c[j])) {
      std::ostringstream os;
      os << "c_" << j << " is not finite";
      throw PlannerError(ErrorKind::QuotientSeriesBreakdown, os.str());
    }
  }

  rate.n_eval_ = 1;
  double power = 1.0;
  for (std::size_t j = 1; j <= order; ++j) {
    if (std::abs(c[j]) * power >= kQuotientTailTol * std::abs(c[1])) rate.n_eval_ = j;
    power *= x_switch;
  }

  // Riccati table out to the certified radius, and at least to the switch
  // point so both paths can be compared on the overlap.
  const double s = p.sigma();
  const double r_switch = s * std::pow(4.0 * x_switch, 0.25);
  const double r_end = std::max(rate.r_max_, r_switch);

  auto integrate = [&](const std::vector<double>& grid) {
    std::vector<double> w(grid.size());
    const double r0 = grid.front();
    w[0] = r0 * r0 * r0 / (s * s * s * s * (p.n_goods() + 2.0));
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double r = grid[i];
      const double h = grid[i + 1] - r;
      const double k1 = rate.riccati_slope(r, w[i]);
      const double k2 = rate.riccati_slope(r + 0.5 * h, w[i] + 0.5 * h * k1);
      const double k3 = rate.riccati_slope(r + 0.5 * h, w[i] + 0.5 * h * k2);
      const double k4 = rate.riccati_slope(r + h, w[i] + h * k3);
      w[i + 1] = w[i] + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    return w;
  };

  std::vector<double> grid = step_grid(p, r_end, kInitialStepScale);
  std::vector<double> w = integrate(grid);
  for (;;) {
    std::vector<double> fine_grid = refine(grid);
    if (fine_grid.size() > kMaxTableSize)
      throw std::runtime_error("Riccati table did not reach the requested accuracy");
    std::vector<double> fine_w = integrate(fine_grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double ref = fine_w[2 * i];
      worst = std::max(worst, std::abs(ref - w[i]) / std::max(std::abs(ref), 1e-300));
    }
    grid = std::move(fine_grid);
    w = std::move(fine_w);
    if (worst < kRiccatiRelTol) break;
  }

  rate.table_.resize(grid.size());
  rate.slopes_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rate.table_[i] = {grid[i], w[i]};
    rate.slopes_[i] = rate.riccati_slope(grid[i], w[i]);
  }
  return rate;
}

double RateSeries::quotient_series_rate(double r) const {
  const double x = params_.expansion_variable(r);
  if (!(r >= 0.0) || x > x_switch_ * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "r=" << r << " outside quotient-series trust region x <= " << x_switch_;
    throw PlannerError(ErrorKind::OutsideCertifiedRange, os.str());
  }
  double acc = 0.0;
  for (std::size_t j = n_eval_; j >= 1; --j) acc = acc * x + c_[j];
  const double s2 = params_.sigma() * params_.sigma();
  return r * r / s2 * acc;
}

double RateSeries::riccati_w(double r) const {
  if (r > table_.back().r && r <= table_.back().r * (1.0 + 1e-12)) r = table_.back().r;
  if (!(r >= table_.front().r && r <= table_.back().r)) {
    std::ostringstream os;
    os << "r=" << r << " outside Riccati table [" << table_.front().r << ", " << table_.back().r << "]";
    throw PlannerError(ErrorKind::OutsideCertifiedRange, os.str());
  }
  auto it = std::upper_bound(table_.begin(), table_.end(), r,
                             [](double v, const RiccatiNode& node) { return v < node.r; });
  std::size_t i = (it == table_.begin()) ? 0 : static_cast<std::size_t>(it - table_.begin()) - 1;
  if (i + 1 >= table_.size()) return table_.back().w;
  // Cubic Hermite on [r_i, r_{i+1}] with the ODE right-hand side as slopes.
  const double h = table_[i + 1].r - table_[i].r;
  const double t = (r - table_[i].r) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * table_[i].w + (t3 - 2 * t2 + t) * h * slopes_[i] +
         (-2 * t3 + 3 * t2) * table_[i + 1].w + (t3 - t2) * h * slopes_[i + 1];
}

double RateSeries::riccati_rate(double r) const {
  const double s2 = params_.sigma() * params_.sigma();
  return s2 * riccati_w(r) / r;
}

double RateSeries::rate_coeff(double r) const {
  if (!(r >= 0.0 && r <= r_max_ * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << "r=" << r << " not in [0, " << r_max_ << "]";
    throw PlannerError(ErrorKind::OutsideCertifiedRange, os.str());
  }
  if (r == 0.0) return 0.0;
  if (params_.expansion_variable(r) <= x_switch_) return quotient_series_rate(r);
  return riccati_rate(r);
}

void RateSeries::feedback_into(std::span<const double> y, std::span<double> p) const {
  if (y.size() != p.size()) throw std::invalid_argument("feedback: output size mismatch");
  double sq = 0.0;
  for (double v : y) {
    if (!std::isfinite(v)) throw PlannerError(ErrorKind::InvalidInventoryState, "non-finite inventory component");
    sq += v * v;
  }
  const double rho = rate_coeff(std::sqrt(sq));
  for (std::size_t i = 0; i < y.size(); ++i) p[i] = rho * y[i];
}

ControlVector RateSeries::feedback(std::span<const double> y) const {
  ControlVector out{std::vector<double>(y.size())};
  feedback_into(y, out.p);
  return out;
}

double direct_rate(const SeriesKernel& kernel, double r) {
  if (r == 0.0) return 0.0;
  const double s2 = kernel.params().sigma() * kernel.params().sigma();
  return s2 * kernel.log_derivative(r) / r;
}

double rate_envelope(int n_goods, double sigma, double r) { return envelope_with(n_goods, sigma, r); }

double rate_lower_envelope(int n_goods, double sigma, double r) {
  return envelope_with(n_goods + 2.0, sigma, r);
}

}  // namespace hjb
