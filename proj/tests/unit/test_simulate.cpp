#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "hjb/counter_rng.hpp"
#include "hjb/error.hpp"
#include "hjb/rate_control.hpp"
#include "hjb/series_kernel.hpp"
#include "hjb/simulate.hpp"

using namespace hjb;

namespace {

RateSeries make_rate(int n, double sigma, double radius) { return build_rate(build_kernel(ModelParams(n, sigma, radius))); }

SimConfig config(int n, std::size_t paths, double dt = 1e-3) {
  SimConfig cfg;
  cfg.dt = dt;
  cfg.n_paths = paths;
  cfg.seed = 42;
  cfg.y0.assign(static_cast<std::size_t>(n), 0.0);
  return cfg;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(CounterNormal, KeyedAndStandard) {
  const CounterNormal g(7);
  EXPECT_EQ(g.pair(1, 2, 3), g.pair(1, 2, 3));
  EXPECT_NE(g.pair(1, 2, 3), g.pair(1, 3, 2));
  EXPECT_NE(g.pair(1, 2, 3).first, CounterNormal(8).pair(1, 2, 3).first);
  double s = 0, s2 = 0, cross = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = g.pair(0, static_cast<std::uint64_t>(i), 0);
    s += a + b;
    s2 += a * a + b * b;
    cross += a * b;
  }
  EXPECT_NEAR(s / (2 * n), 0.0, 0.01);
  EXPECT_NEAR(s2 / (2 * n), 1.0, 0.01);
  EXPECT_NEAR(cross / n, 0.0, 0.01);
}

TEST(EulerPath, FirstStepIsPureNoise) {
  const auto rate = make_rate(3, 1.5, 1.0);
  auto cfg = config(3, 1, 1e-4);
  cfg.record_trace = true;
  cfg.max_steps = 1;
  const auto res = euler_path(rate, cfg, 5);
  ASSERT_EQ(res.trace.size(), 2u);
  const CounterNormal g(cfg.seed);
  const double scale = 1.5 * std::sqrt(1e-4);
  EXPECT_EQ(res.trace[1].y[0], scale * g.pair(5, 0, 0).first);
  EXPECT_EQ(res.trace[1].y[1], scale * g.pair(5, 0, 0).second);
  EXPECT_EQ(res.trace[1].y[2], scale * g.pair(5, 0, 1).first);
  EXPECT_EQ(res.cost, 0.0);
  EXPECT_FALSE(res.exited);
  EXPECT_EQ(res.steps, 1u);
}

TEST(EulerPath, Deterministic) {
  const auto rate = make_rate(2, 1.0, 1.0);
  const auto cfg = config(2, 1);
  const auto a = euler_path(rate, cfg, 3), b = euler_path(rate, cfg, 3), c = euler_path(rate, cfg, 4);
  EXPECT_TRUE(same_bits(a.cost, b.cost));
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_NE(a.cost, c.cost);
}

TEST(EulerPath, StartOnBoundaryExitsImmediately) {
  const auto rate = make_rate(2, 1.0, 1.0);
  auto cfg = config(2, 1);
  cfg.y0 = {0.6, 0.8};
  const auto res = euler_path(rate, cfg, 0);
  EXPECT_TRUE(res.exited);
  EXPECT_EQ(res.tau, 0.0);
  EXPECT_EQ(res.cost, 0.0);
  cfg.y0 = {0.8, 0.8};
  try {
    euler_path(rate, cfg, 0);
    FAIL() << "expected StartBeyondBoundary";
  } catch (const PlannerError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StartBeyondBoundary);
  }
}

TEST(EulerPath, RejectsInvalidConfig) {
  const auto rate = make_rate(2, 1.0, 1.0);
  auto bad = config(2, 1);
  bad.dt = 0.0;
  EXPECT_THROW(euler_path(rate, bad, 0), std::invalid_argument);
  bad = config(2, 1);
  bad.y0 = {0.0};
  EXPECT_THROW(euler_path(rate, bad, 0), std::invalid_argument);
  bad = config(2, 1);
  bad.brownian_substeps = 0;
  EXPECT_THROW(euler_path(rate, bad, 0), std::invalid_argument);
  bad = config(2, 1);
  bad.control_scale = NAN;
  EXPECT_THROW(euler_path(rate, bad, 0), std::invalid_argument);
}

TEST(EulerPath, CostAccruesAndControlPushesOutward) {
  const auto rate = make_rate(2, 1.0, 1.0);
  auto cfg = config(2, 1);
  cfg.record_trace = true;
  for (std::uint64_t path = 0; path < 20; ++path) {
    const auto res = euler_path(rate, cfg, path);
    ASSERT_TRUE(res.exited);
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
      ASSERT_GE(res.trace[i].cost, res.trace[i - 1].cost);
      if (i + 1 == res.trace.size()) break;
      const auto p = rate.feedback(res.trace[i].y).p;
      ASSERT_GE(p[0] * res.trace[i].y[0] + p[1] * res.trace[i].y[1], 0.0);
    }
    const auto& last = res.trace.back().y;
    EXPECT_GE(std::hypot(last[0], last[1]), 1.0);
    EXPECT_DOUBLE_EQ(res.tau, res.trace.back().t);
  }
}

TEST(EulerPath, SubstepsCoupleHalvedSteps) {
  // dt with two sub-draws and dt/2 with one see the same Brownian path.
  const auto rate = make_rate(2, 1.0, 1.0);
  auto coarse = config(2, 1, 2e-3);
  coarse.brownian_substeps = 2;
  coarse.control_scale = 0.0;
  coarse.record_trace = true;
  coarse.max_steps = 200;
  auto fine = coarse;
  fine.dt = 1e-3;
  fine.brownian_substeps = 1;
  fine.max_steps = 400;
  const auto a = euler_path(rate, coarse, 9), b = euler_path(rate, fine, 9);
  const std::size_t steps = std::min(a.trace.size() - 1, (b.trace.size() - 1) / 2);
  ASSERT_GT(steps, 5u);
  for (std::size_t k = 1; k <= steps; ++k)
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(a.trace[k].y[i], b.trace[2 * k].y[i], 1e-13);
}

TEST(RunPaths, ParallelMatchesSerialBitwise) {
  const auto rate = make_rate(3, 1.0, 1.0);
  const auto cfg = config(3, 300);
  const auto serial = run_paths_serial(rate, cfg);
  for (int threads : {1, 2, 4, 7}) {
    omp_set_num_threads(threads);
    const auto par = run_paths(rate, cfg);
    EXPECT_TRUE(same_bits(par.mean, serial.mean)) << threads;
    EXPECT_TRUE(same_bits(par.std_error, serial.std_error)) << threads;
    EXPECT_EQ(par.n_exited, serial.n_exited);
  }
  omp_set_num_threads(omp_get_num_procs());
}

TEST(RunPaths, StandardErrorShrinksWithPaths) {
  const auto rate = make_rate(2, 1.0, 1.0);
  const auto small = run_paths(rate, config(2, 1000));
  const auto large = run_paths(rate, config(2, 4000));
  EXPECT_NEAR(large.std_error / small.std_error, 0.5, 0.1);
}

TEST(RunPaths, CostGrowsWithRadius) {
  const auto inner = run_paths(make_rate(2, 1.0, 0.5), config(2, 1000));
  const auto outer = run_paths(make_rate(2, 1.0, 1.0), config(2, 1000));
  EXPECT_LT(inner.mean + 3 * inner.std_error, outer.mean - 3 * outer.std_error);
}

TEST(RunPaths, UncontrolledCostMatchesClosedForm) {
  // Without production, v = R^4 / (2 sigma^2 (N + 2)) from the origin.
  auto cfg = config(2, 4000, 1e-4);
  cfg.control_scale = 0.0;
  const auto s = run_paths(make_rate(2, 1.0, 1.0), cfg);
  EXPECT_NEAR(s.mean, 0.125, 4 * s.std_error + 0.005);
}

TEST(RunPaths, OptimalControlTracksExpectedCost) {
  const auto rate = make_rate(2, 1.0, 1.0);
  const auto s = run_paths(rate, config(2, 4000, 1e-4));
  EXPECT_NEAR(s.mean, build_kernel(ModelParams(2, 1.0, 1.0)).expected_optimal_cost(0.0), 4 * s.std_error + 0.005);
}

TEST(RunPaths, NoExitsIsInformational) {
  const auto rate = make_rate(2, 1.0, 1.0);
  auto cfg = config(2, 3);
  cfg.max_steps = 2;
  const auto s = run_paths(rate, cfg);
  EXPECT_EQ(s.n_exited, 0u);
  EXPECT_TRUE(std::isnan(s.mean));
  try {
    monte_carlo_cost(rate, cfg);
    FAIL() << "expected NoExits";
  } catch (const PlannerError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoExits);
  }
  EXPECT_THROW(monte_carlo_cost(rate, config(2, 1)), std::invalid_argument);
}

TEST(DefaultDt, ScalesWithRadiusOverSigma) {
  EXPECT_DOUBLE_EQ(default_dt(ModelParams(2, 1.0, 1.0)), 1e-4);
  EXPECT_DOUBLE_EQ(default_dt(ModelParams(2, 2.0, 1.0)), 0.25e-4);
  EXPECT_DOUBLE_EQ(default_dt(ModelParams(2, 0.5, 1.0)), 1e-4);
}

TEST(RunPaths, OptimalControlBeatsScaledControls) {
  // Paired paths (same keys) so the small cost gaps are resolvable.
  const auto rate = make_rate(2, 1.0, 1.0);
  auto optimal = config(2, 1);
  optimal.seed = 5;
  for (double scale : {0.0, 2.0}) {
    auto other = optimal;
    other.control_scale = scale;
    double sum = 0.0, sum_sq = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
      const double d = euler_path(rate, other, i).cost - euler_path(rate, optimal, i).cost;
      sum += d;
      sum_sq += d * d;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_GT(mean, 2 * se) << "scale " << scale;
  }
}
