#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hjb/simulate.hpp"
#include "hjb/sweep.hpp"

namespace hjb {

struct VerifyOptions {
  std::vector<int> n_list{1, 2, 4, 10, 100};
  std::vector<double> sigma_list{0.5, 1.0, 2.0, 5.0};
  std::vector<double> radius_list{1.0, 2.0};
  std::size_t points = 200;
  /// Relative agreement required between series, Picard and ODE values.
  double equivalence_tol = 1e-8;
  /// Residual ceiling for the closed-form four-dimensional solutions.
  double exact_tol = 1e-9;
  /// Test hook: doubles a_1 in every kernel before checking.
  bool inject_fault = false;
  /// Reports are written here when non-empty.
  std::filesystem::path output_dir;
};

struct VerifyCheck {
  std::string name;
  bool passed;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;

  bool passed() const;
  void write_summary(std::ostream& os) const;
};

/// Oracle suite: growth bounds and rate envelopes, series/Picard/ODE
/// agreement, Picard increment ceiling and the exact 4-D residuals. Output
/// files contain no timing data, so identical options give identical bytes.
VerifyReport run_verify(const VerifyOptions& options);

struct SimulationOutputs {
  McSummary summary;
  /// Full traces of the first few paths (for plots and trace dumps).
  std::vector<PathResult> traced;
};

SimulationOutputs run_simulation(const RateSeries& rate, const SimConfig& cfg, std::size_t trace_paths);

/// summary.csv, paths.svg and, when `write_traces`, trace_path<i>.csv.
void write_simulation_outputs(const std::filesystem::path& dir, const ModelParams& params, const SimConfig& cfg,
                              const SimulationOutputs& outputs, bool write_traces);

/// sweep.csv and sweep.svg.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepTable& table);

}  // namespace hjb
