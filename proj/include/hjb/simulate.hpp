#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hjb/rate_control.hpp"

namespace hjb {

struct SimConfig {
  double dt = 1e-4;
  std::size_t max_steps = 1'000'000;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  std::vector<double> y0;
  /// Each step's Brownian increment is the normalised sum of this many
  /// keyed sub-draws. A run at dt with 2 sub-draws follows exactly the same
  /// Brownian path as a run at dt/2 with 1, which couples dt refinements.
  std::size_t brownian_substeps = 1;
  /// Multiplier on the feedback control; 1 is the optimal policy. Other
  /// values exist for comparison runs only (0 switches production off).
  double control_scale = 1.0;
  bool record_trace = false;
};

/// Default time step 1e-4 * min(1, R^2 / sigma^2).
double default_dt(const ModelParams& params);

struct TraceSample {
  double t;
  std::vector<double> y;
  double cost;
};

struct PathResult {
  double tau = 0.0;
  double cost = 0.0;
  bool exited = false;
  std::size_t steps = 0;
  std::vector<TraceSample> trace;
};

/// Euler-Maruyama path of dy = rho(|y|) y dt + sigma dw, stopped at the first
/// grid time with |y| >= R. The running cost (|p|^2 + |y|^2) dt uses the
/// left endpoint of each step. Fully determined by (cfg.seed, path_index).
/// Throws std::invalid_argument for an invalid config,
/// PlannerError(StartBeyondBoundary) if |y0| > R and
/// PlannerError(SimulationDiverged) on a non-finite state.
PathResult euler_path(const RateSeries& rate, const SimConfig& cfg, std::uint64_t path_index);

struct McSummary {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_exited = 0;
  std::size_t n_paths = 0;
};

/// Mean and standard error of the cost over exited paths, paths run with
/// OpenMP. Per-path results are reduced in path order, so the output is
/// identical to run_paths_serial for any thread count. Never throws for
/// zero exits (mean and stderr are NaN then).
McSummary run_paths(const RateSeries& rate, const SimConfig& cfg);

/// Single-threaded reference for run_paths.
McSummary run_paths_serial(const RateSeries& rate, const SimConfig& cfg);

/// run_paths with the contract checks: n_paths >= 2 and at least one exit
/// (PlannerError(NoExits) otherwise).
McSummary monte_carlo_cost(const RateSeries& rate, const SimConfig& cfg);

}  // namespace hjb
