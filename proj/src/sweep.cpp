#include "hjb/sweep.hpp"

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <stdexcept>

#include "hjb/io.hpp"
#include "hjb/rate_control.hpp"
#include "hjb/series_kernel.hpp"

namespace hjb {
namespace {

std::vector<SweepRow> evaluate_slice(const SweepSpec& spec, int n, double sigma) {
  std::vector<SweepRow> rows;
  rows.reserve(spec.r_grid.size());
  const double r_top = *std::max_element(spec.r_grid.begin(), spec.r_grid.end());
  try {
    const ModelParams params(n, sigma, r_top > 0.0 ? r_top : 1.0);
    const RateSeries rate = build_rate(build_kernel(params));
    for (double r : spec.r_grid) {
      try {
        rows.push_back({n, sigma, r, rate.rate_coeff(r), {}});
      } catch (const std::exception& e) {
        rows.push_back({n, sigma, r, std::nullopt, e.what()});
      }
    }
  } catch (const std::exception& e) {
    rows.clear();
    for (double r : spec.r_grid) rows.push_back({n, sigma, r, std::nullopt, e.what()});
  }
  return rows;
}

}  // namespace

void validate(const SweepSpec& spec) {
  if (spec.n_list.empty() || spec.sigma_list.empty() || spec.r_grid.empty())
    throw std::invalid_argument("sweep axes must be non-empty");
  for (int n : spec.n_list)
    if (n < 1) throw std::invalid_argument("sweep N values must be >= 1");
  for (double s : spec.sigma_list)
    if (!(s > 0.0)) throw std::invalid_argument("sweep sigma values must be positive");
  for (std::size_t i = 0; i < spec.r_grid.size(); ++i) {
    if (!(spec.r_grid[i] >= 0.0)) throw std::invalid_argument("sweep r values must be nonnegative");
    if (i > 0 && spec.r_grid[i] < spec.r_grid[i - 1]) throw std::invalid_argument("sweep r grid must be nondecreasing");
  }
}

SweepTable sweep_rate(const SweepSpec& spec) {
  validate(spec);
  const std::size_t n_sig = spec.sigma_list.size();
  const std::size_t n_cells = spec.n_list.size() * n_sig;
  std::vector<std::vector<SweepRow>> slices(n_cells);
  const auto cells = static_cast<std::int64_t>(n_cells);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < cells; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    slices[idx] = evaluate_slice(spec, spec.n_list[idx / n_sig], spec.sigma_list[idx % n_sig]);
  }
  SweepTable table;
  for (auto& s : slices) table.rows.insert(table.rows.end(), s.begin(), s.end());
  return table;
}

SweepTable sweep_rate_serial(const SweepSpec& spec) {
  validate(spec);
  SweepTable table;
  for (int n : spec.n_list)
    for (double sigma : spec.sigma_list) {
      auto rows = evaluate_slice(spec, n, sigma);
      table.rows.insert(table.rows.end(), rows.begin(), rows.end());
    }
  return table;
}

void SweepTable::write_csv(std::ostream& os) const {
  os << "N,sigma,r,rate\n";
  for (const auto& row : rows) {
    os << row.n_goods << ',' << format_double(row.sigma) << ',' << format_double(row.r) << ',';
    if (row.rate) os << format_double(*row.rate);
    os << '\n';
  }
}

}  // namespace hjb
