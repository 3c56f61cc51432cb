#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hjb {

/// Experiment axes: every (N, sigma) pair is evaluated on the whole r grid.
struct SweepSpec {
  std::vector<int> n_list;
  std::vector<double> sigma_list;
  std::vector<double> r_grid;
  std::filesystem::path output_dir;
};

struct SweepRow {
  int n_goods;
  double sigma;
  double r;
  /// Empty when the cell could not be evaluated; `note` says why.
  std::optional<double> rate;
  std::string note;
};

struct SweepTable {
  std::vector<SweepRow> rows;

  /// `N,sigma,r,rate`; failed cells leave `rate` empty.
  void write_csv(std::ostream& os) const;
};

/// Throws std::invalid_argument for empty axes, non-positive N or sigma, or a
/// r grid that is not nondecreasing and nonnegative.
void validate(const SweepSpec& spec);

/// rho over the full cross product, (N, sigma) slices built concurrently.
/// Rows are ordered N-major, then sigma, then r regardless of scheduling.
SweepTable sweep_rate(const SweepSpec& spec);

/// Single-threaded reference for sweep_rate.
SweepTable sweep_rate_serial(const SweepSpec& spec);

}  // namespace hjb
