#include "hjb/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hjb/counter_rng.hpp"
#include "hjb/error.hpp"

namespace hjb {
namespace {

void validate(const RateSeries& rate, const SimConfig& cfg) {
  const auto& p = rate.params();
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw std::invalid_argument("dt must be positive");
  if (cfg.max_steps == 0) throw std::invalid_argument("max_steps must be positive");
  if (cfg.n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  if (cfg.brownian_substeps == 0) throw std::invalid_argument("brownian_substeps must be positive");
  if (!std::isfinite(cfg.control_scale)) throw std::invalid_argument("control_scale must be finite");
  if (cfg.y0.size() != static_cast<std::size_t>(p.n_goods()))
    throw std::invalid_argument("y0 must have one entry per good");
  if (rate.r_max() < p.radius() * (1.0 - 1e-12))
    throw std::invalid_argument("rate series must be certified up to R");
  double sq = 0.0;
  for (double v : cfg.y0) sq += v * v;
  if (std::sqrt(sq) > p.radius()) {
    std::ostringstream os;
    os << "|y0|=" << std::sqrt(sq) << " exceeds R=" << p.radius();
    throw PlannerError(ErrorKind::StartBeyondBoundary, os.str());
  }
}

PathResult simulate_path(const RateSeries& rate, const SimConfig& cfg, std::uint64_t path) {
  const auto& params = rate.params();
  const std::size_t n = cfg.y0.size();
  const double radius = params.radius();
  const double noise = params.sigma() * std::sqrt(cfg.dt);
  const double sub_scale = 1.0 / std::sqrt(static_cast<double>(cfg.brownian_substeps));
  const std::size_t n_pairs = (n + 1) / 2;
  const CounterNormal normal(cfg.seed);

  std::vector<double> y = cfg.y0;
  std::vector<double> p(n), z(n);
  PathResult res;
  auto norm_sq = [&] {
    double s = 0.0;
    for (double v : y) s += v * v;
    return s;
  };
  auto record = [&](double t) {
    if (cfg.record_trace) res.trace.push_back({t, y, res.cost});
  };

  double r2 = norm_sq();
  record(0.0);
  if (r2 >= radius * radius) {
    res.exited = true;
    return res;
  }
  for (std::size_t step = 0; step < cfg.max_steps; ++step) {
    rate.feedback_into(y, p);
    if (cfg.control_scale != 1.0)
      for (double& v : p) v *= cfg.control_scale;
    double p2 = 0.0;
    for (double v : p) p2 += v * v;
    res.cost += (p2 + r2) * cfg.dt;

    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t s = 0; s < cfg.brownian_substeps; ++s) {
      const std::uint64_t key_step = step * cfg.brownian_substeps + s;
      for (std::size_t k = 0; k < n_pairs; ++k) {
        const auto [g0, g1] = normal.pair(path, key_step, k);
        z[2 * k] += g0;
        if (2 * k + 1 < n) z[2 * k + 1] += g1;
      }
    }
    for (std::size_t i = 0; i < n; ++i) y[i] += p[i] * cfg.dt + noise * sub_scale * z[i];

    res.steps = step + 1;
    res.tau = cfg.dt * static_cast<double>(res.steps);
    r2 = norm_sq();
    if (!std::isfinite(r2)) throw PlannerError(ErrorKind::SimulationDiverged, "non-finite inventory state");
    record(res.tau);
    if (r2 >= radius * radius) {
      res.exited = true;
      break;
    }
  }
  return res;
}

McSummary reduce(const std::vector<PathResult>& results) {
  McSummary out;
  out.n_paths = results.size();
  double sum = 0.0;
  for (const auto& r : results)
    if (r.exited) {
      sum += r.cost;
      ++out.n_exited;
    }
  if (out.n_exited == 0) {
    out.mean = out.std_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.mean = sum / static_cast<double>(out.n_exited);
  double ss = 0.0;
  for (const auto& r : results)
    if (r.exited) ss += (r.cost - out.mean) * (r.cost - out.mean);
  out.std_error = (out.n_exited > 1)
                    ? std::sqrt(ss / static_cast<double>(out.n_exited - 1) / static_cast<double>(out.n_exited))
                    : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace

double default_dt(const ModelParams& params) {
  const double ratio = params.radius() * params.radius() / (params.sigma() * params.sigma());
  return 1e-4 * std::min(1.0, ratio);
}

PathResult euler_path(const RateSeries& rate, const SimConfig& cfg, std::uint64_t path_index) {
  validate(rate, cfg);
  return simulate_path(rate, cfg, path_index);
}

McSummary run_paths(const RateSeries& rate, const SimConfig& cfg) {
  validate(rate, cfg);
  SimConfig quiet = cfg;
  quiet.record_trace = false;
  std::vector<PathResult> results(cfg.n_paths);
  const auto n_paths = static_cast<std::int64_t>(cfg.n_paths);
  // Exceptions must not cross the parallel region; keep the first one.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n_paths; ++i) {
    try {
      results[static_cast<std::size_t>(i)] = simulate_path(rate, quiet, static_cast<std::uint64_t>(i));
    } catch (...) {
#pragma omp critical(hjb_run_paths_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return reduce(results);
}

McSummary run_paths_serial(const RateSeries& rate, const SimConfig& cfg) {
  validate(rate, cfg);
  SimConfig quiet = cfg;
  quiet.record_trace = false;
  std::vector<PathResult> results;
  results.reserve(cfg.n_paths);
  for (std::size_t i = 0; i < cfg.n_paths; ++i) results.push_back(simulate_path(rate, quiet, i));
  return reduce(results);
}

McSummary monte_carlo_cost(const RateSeries& rate, const SimConfig& cfg) {
  if (cfg.n_paths < 2) throw std::invalid_argument("monte_carlo_cost needs n_paths >= 2");
  McSummary s = run_paths(rate, cfg);
  if (s.n_exited == 0) {
    std::ostringstream os;
    os << "0 of " << s.n_paths << " paths reached R within " << cfg.max_steps << " steps";
    throw PlannerError(ErrorKind::NoExits, os.str());
  }
  return s;
}

}  // namespace hjb
