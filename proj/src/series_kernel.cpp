#include "hjb/series_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hjb/error.hpp"

namespace hjb {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Relative slack on the certified range so that r_max itself, recomputed by a
// caller through a different rounding path, is still accepted.
constexpr double kRangeSlack = 1e-12;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

std::vector<double> log_series_coefficients(int n_goods, std::size_t order) {
  std::vector<double> log_a(order + 1);
  log_a[0] = 0.0;
  for (std::size_t j = 1; j <= order; ++j) {
    const double jd = static_cast<double>(j);
    log_a[j] = log_a[j - 1] - std::log(jd) - std::log(n_goods + 4.0 * jd - 2.0);
  }
  return log_a;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double hi = *std::max_element(values.begin(), values.end());
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

SeriesKernel::SeriesKernel(ModelParams params, std::vector<double> log_a, double term_tol, double r_max)
    : params_(params), log_a_(std::move(log_a)), term_tol_(term_tol), r_max_(r_max) {
  a_.resize(log_a_.size());
  std::transform(log_a_.begin(), log_a_.end(), a_.begin(), [](double l) { return std::exp(l); });
}

SeriesKernel build_kernel(const ModelParams& params, double term_tol, double r_max, std::size_t max_terms) {
  if (!(term_tol > 0.0 && term_tol < 1.0)) throw std::invalid_argument("term_tol must lie in (0, 1)");
  if (!(r_max >= params.radius()) || !std::isfinite(r_max))
    throw std::invalid_argument("r_max must be finite and >= radius");

  const double x_max = params.expansion_variable(r_max);
  const double log_x = std::log(x_max);
  const double log_tol = std::log(term_tol);
  const double n = params.n_goods();

  // Both sum a_j x^j and the derivative series sum j a_j x^(j-1) must be
  // resolved: at small x the latter starts at a_1, far below u = 1.
  std::vector<double> log_a{0.0};
  double log_sum = 0.0, log_dsum = kNegInf;
  double prev_log_term = 0.0, prev_log_dterm = kNegInf;
  for (std::size_t j = 1;; ++j) {
    if (j > max_terms) {
      std::ostringstream os;
      os << "more than " << max_terms << " terms needed at r_max=" << r_max << " (x=" << x_max
         << "); shrink r_max or raise term_tol";
      throw PlannerError(ErrorKind::SeriesTruncationOverflow, os.str());
    }
    const double jd = static_cast<double>(j);
    const double la = log_a.back() - std::log(jd) - std::log(n + 4.0 * jd - 2.0);
    const double log_term = la + jd * log_x;
    const double log_dterm = std::log(jd) + la + (jd - 1.0) * log_x;
    // Stop on the first term below tolerance once the terms are decreasing;
    // that term is the first omitted one. Always keep a_1.
    if (j > 1 && log_term < log_tol + log_sum && log_term < prev_log_term && log_dterm < log_tol + log_dsum &&
        log_dterm < prev_log_dterm)
      break;
    log_a.push_back(la);
    log_sum = log_add(log_sum, log_term);
    log_dsum = log_add(log_dsum, log_dterm);
    prev_log_term = log_term;
    prev_log_dterm = log_dterm;
  }
  return SeriesKernel(params, std::move(log_a), term_tol, r_max);
}

SeriesKernel build_kernel(const ModelParams& params) {
  return build_kernel(params, kDefaultTermTol, params.radius());
}

void SeriesKernel::check_range(double r) const {
  if (!(r >= 0.0 && r <= r_max_ * (1.0 + kRangeSlack))) {
    std::ostringstream os;
    os << "r=" << r << " not in [0, " << r_max_ << "]";
    throw PlannerError(ErrorKind::OutsideCertifiedRange, os.str());
  }
}

double SeriesKernel::eval_u(double r) const {
  check_range(r);
  const double x = params_.expansion_variable(r);
  if (x > 1.0) return params_.alpha() * std::exp(eval_log_u(r));
  double acc = 0.0;
  for (std::size_t j = a_.size(); j-- > 0;) acc = acc * x + a_[j];
  return params_.alpha() * acc;
}

double SeriesKernel::eval_log_u(double r) const {
  check_range(r);
  const double x = params_.expansion_variable(r);
  if (x <= 1.0) {
    double tail = 0.0;
    for (std::size_t j = a_.size() - 1; j >= 1; --j) tail = (tail + a_[j]) * x;
    return std::log(params_.alpha()) + std::log1p(tail);
  }
  const double log_x = std::log(x);
  std::vector<double> terms(log_a_.size());
  for (std::size_t j = 0; j < log_a_.size(); ++j) terms[j] = log_a_[j] + static_cast<double>(j) * log_x;
  return std::log(params_.alpha()) + log_sum_exp(terms);
}

double SeriesKernel::eval_u_prime(double r) const {
  check_range(r);
  if (r == 0.0) return 0.0;
  const double x = params_.expansion_variable(r);
  if (x > 1.0) return std::exp(eval_log_u_prime(r));
  // u' = (r^3 / sigma^4) sum_{j>=1} j a_j x^{j-1}
  double acc = 0.0;
  for (std::size_t j = a_.size() - 1; j >= 1; --j) acc = acc * x + static_cast<double>(j) * a_[j];
  const double s2 = params_.sigma() * params_.sigma();
  return params_.alpha() * acc * r * r * r / (s2 * s2);
}

double SeriesKernel::eval_log_u_prime(double r) const {
  check_range(r);
  if (r == 0.0) return kNegInf;
  const double x = params_.expansion_variable(r);
  if (x <= 1.0) return std::log(eval_u_prime(r));
  const double log_x = std::log(x);
  std::vector<double> terms(log_a_.size() - 1);
  for (std::size_t j = 1; j < log_a_.size(); ++j) {
    const double jd = static_cast<double>(j);
    terms[j - 1] = log_a_[j] + std::log(jd) + jd * log_x;
  }
  return std::log(params_.alpha()) + std::log(4.0 / r) + log_sum_exp(terms);
}

double SeriesKernel::log_derivative(double r) const {
  check_range(r);
  if (r == 0.0) return 0.0;
  const double x = params_.expansion_variable(r);
  if (x <= 1.0) return eval_u_prime(r) / eval_u(r);
  return std::exp(eval_log_u_prime(r) - eval_log_u(r));
}

double SeriesKernel::expected_optimal_cost(double r0) const {
  if (!(r0 >= 0.0)) throw std::invalid_argument("r0 must be nonnegative");
  const double radius = params_.radius();
  if (r0 > radius) {
    std::ostringstream os;
    os << "r0=" << r0 << " exceeds R=" << radius;
    throw PlannerError(ErrorKind::StartBeyondBoundary, os.str());
  }
  const double s2 = params_.sigma() * params_.sigma();
  return std::max(0.0, 2.0 * s2 * (eval_log_u(radius) - eval_log_u(r0)));
}

SeriesKernel SeriesKernel::with_scaled_coefficient(std::size_t j, double factor) const {
  if (j >= log_a_.size()) throw std::out_of_range("coefficient index beyond truncation order");
  if (!(factor > 0.0)) throw std::invalid_argument("factor must be positive");
  std::vector<double> log_a = log_a_;
  log_a[j] += std::log(factor);
  return SeriesKernel(params_, std::move(log_a), term_tol_, r_max_);
}

}  // namespace hjb
