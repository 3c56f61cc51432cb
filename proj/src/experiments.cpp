#include "hjb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "hjb/error.hpp"
#include "hjb/io.hpp"
#include "hjb/oracles.hpp"
#include "hjb/rate_control.hpp"
#include "hjb/series_kernel.hpp"

namespace hjb {
namespace {

std::string tag(int n, double sigma, double radius) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "N=%d sigma=%g R=%g", n, sigma, radius);
  return buf;
}

std::string file_tag(int n, double sigma, double radius) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "N%d_sigma%g_R%g", n, sigma, radius);
  return buf;
}

struct ParamSetResult {
  std::vector<VerifyCheck> checks;
  std::string bounds_csv;
  std::string equivalence_row;
};

double max_rel_err(const std::vector<double>& values, const std::vector<double>& reference) {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    worst = std::max(worst, std::abs(values[i] - reference[i]) / std::abs(reference[i]));
  return worst;
}

ParamSetResult verify_param_set(int n, double sigma, double radius, const VerifyOptions& opt) {
  ParamSetResult out;
  const std::string name = tag(n, sigma, radius);
  const ModelParams params(n, sigma, radius);
  SeriesKernel kernel = build_kernel(params);
  if (opt.inject_fault) kernel = kernel.with_scaled_coefficient(1, 2.0);
  const std::vector<double> grid = uniform_grid(0.0, radius, opt.points);

  const BoundReport bounds = evaluate_bounds(kernel, grid);
  {
    std::ostringstream csv;
    bounds.write_csv(csv);
    out.bounds_csv = csv.str();
  }
  try {
    check_bounds(kernel, grid);
    out.checks.push_back({"bounds " + name, true, "min margin " + format_double(bounds.min_margin())});
  } catch (const PlannerError& e) {
    out.checks.push_back({"bounds " + name, false, e.what()});
  }

  // Rate path: monotone, capped, between the two envelopes.
  try {
    const RateSeries rate = build_rate(kernel);
    std::string problem;
    double prev = 0.0;
    for (double r : grid) {
      const double rho = rate.rate_coeff(r);
      std::ostringstream where;
      where << " at r=" << format_double(r);
      if (rho - prev < -kBoundSlack) problem = "rate decreases" + where.str();
      else if (rho > 1.0 + kBoundSlack) problem = "rate exceeds 1" + where.str();
      else if (rho > rate_envelope(n, sigma, r) + kBoundSlack) problem = "rate above envelope" + where.str();
      else if (rho < rate_lower_envelope(n, sigma, r) - kBoundSlack) problem = "rate below lower envelope" + where.str();
      if (!problem.empty()) break;
      prev = rho;
    }
    out.checks.push_back({"rate " + name, problem.empty(), problem.empty() ? "ok" : problem});
  } catch (const std::exception& e) {
    out.checks.push_back({"rate " + name, false, e.what()});
  }

  try {
    std::vector<double> series(grid.size());
    std::transform(grid.begin(), grid.end(), series.begin(), [&](double r) { return kernel.eval_u(r); });
    const PicardResult picard = picard_solve(params, grid);
    const RadialGridFn ode = ode_solve(params, grid);
    const double e_picard = max_rel_err(picard.solution.values, series);
    const double e_ode = max_rel_err(ode.values, series);
    const double e_cross = max_rel_err(picard.solution.values, ode.values);
    const double worst = std::max({e_picard, e_ode, e_cross});
    std::ostringstream row;
    row << n << ',' << format_double(sigma) << ',' << format_double(radius) << ',' << format_double(e_picard) << ','
        << format_double(e_ode) << ',' << format_double(e_cross) << '\n';
    out.equivalence_row = row.str();
    out.checks.push_back({"equivalence " + name, worst <= opt.equivalence_tol,
                          "max relative difference " + format_double(worst)});
  } catch (const std::exception& e) {
    out.checks.push_back({"equivalence " + name, false, e.what()});
  }
  return out;
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

void VerifyReport::write_summary(std::ostream& os) const {
  std::size_t failed = 0;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    failed += c.passed ? 0 : 1;
  }
  os << (checks.size() - failed) << '/' << checks.size() << " checks passed\n";
}

VerifyReport run_verify(const VerifyOptions& opt) {
  struct Cell {
    int n;
    double sigma;
    double radius;
  };
  std::vector<Cell> cells;
  for (int n : opt.n_list)
    for (double s : opt.sigma_list)
      for (double r : opt.radius_list) cells.push_back({n, s, r});

  std::vector<ParamSetResult> results(cells.size());
  const auto n_cells = static_cast<std::int64_t>(cells.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n_cells; ++i) {
    const auto& c = cells[static_cast<std::size_t>(i)];
    try {
      results[static_cast<std::size_t>(i)] = verify_param_set(c.n, c.sigma, c.radius, opt);
    } catch (...) {
#pragma omp critical(hjb_verify_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  VerifyReport report;
  std::map<std::string, std::string> files;
  std::string equivalence = "N,sigma,R,picard_max_rel_err,ode_max_rel_err,picard_ode_max_rel_err\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& r = results[i];
    report.checks.insert(report.checks.end(), r.checks.begin(), r.checks.end());
    files["bounds_" + file_tag(cells[i].n, cells[i].sigma, cells[i].radius) + ".csv"] = r.bounds_csv;
    equivalence += r.equivalence_row;
  }
  files["equivalence.csv"] = equivalence;

  // Picard increments against their analytic ceiling.
  {
    const ModelParams params(2, 1.0, 1.0);
    const PicardResult picard = picard_solve(params, uniform_grid(0.0, 1.0, opt.points));
    std::string csv = "k,sup_increment,bound\n";
    std::string problem;
    for (std::size_t k = 0; k < picard.sup_increments.size(); ++k) {
      const double bound = picard_increment_bound(params, static_cast<int>(k));
      csv += std::to_string(k) + ',' + format_double(picard.sup_increments[k]) + ',' + format_double(bound) + '\n';
      if (picard.sup_increments[k] > bound * (1.0 + kBoundSlack) && problem.empty())
        problem = "increment above bound at k=" + std::to_string(k);
      if (picard.sup_increments[k] < 0.0 && problem.empty()) problem = "negative increment at k=" + std::to_string(k);
    }
    files["picard_increments.csv"] = csv;
    report.checks.push_back({"picard increments N=2 sigma=1 R=1", problem.empty(),
                             problem.empty() ? std::to_string(picard.iterations) + " iterations" : problem});
  }

  // Closed-form four-dimensional solutions.
  {
    std::string csv = "sigma,solution,max_scaled_residual\n";
    const std::vector<double> grid = uniform_grid(0.1, 3.0, opt.points);
    for (double sigma : {0.5, 1.0, 2.0})
      for (auto which : {ExactSolution::Growing, ExactSolution::Decaying}) {
        const char* label = which == ExactSolution::Growing ? "growing" : "decaying";
        const double res = verify_exact_4d(sigma, which, grid);
        csv += format_double(sigma) + ',' + label + ',' + format_double(res) + '\n';
        char name[64];
        std::snprintf(name, sizeof name, "exact4d sigma=%g %s", sigma, label);
        report.checks.push_back({name, res <= opt.exact_tol, "max scaled residual " + format_double(res)});
      }
    files["exact4d.csv"] = csv;
  }

  if (!opt.output_dir.empty()) {
    std::filesystem::create_directories(opt.output_dir);
    for (const auto& [name, content] : files) write_file_atomic(opt.output_dir / name, content);
    std::ostringstream summary;
    report.write_summary(summary);
    write_file_atomic(opt.output_dir / "summary.txt", summary.str());
  }
  return report;
}

SimulationOutputs run_simulation(const RateSeries& rate, const SimConfig& cfg, std::size_t trace_paths) {
  SimulationOutputs out;
  out.summary = run_paths(rate, cfg);
  SimConfig traced = cfg;
  traced.record_trace = true;
  for (std::size_t i = 0; i < std::min(trace_paths, cfg.n_paths); ++i) out.traced.push_back(euler_path(rate, traced, i));
  return out;
}

void write_simulation_outputs(const std::filesystem::path& dir, const ModelParams& params, const SimConfig& cfg,
                              const SimulationOutputs& outputs, bool write_traces) {
  std::filesystem::create_directories(dir);
  std::ostringstream summary;
  summary << "mean,stderr,n_exited,n_paths,dt,seed\n"
          << format_double(outputs.summary.mean) << ',' << format_double(outputs.summary.std_error) << ','
          << outputs.summary.n_exited << ',' << outputs.summary.n_paths << ',' << format_double(cfg.dt) << ','
          << cfg.seed << '\n';
  write_file_atomic(dir / "summary.csv", summary.str());

  SvgPlot plot;
  char title[128];
  std::snprintf(title, sizeof title, "|y(t)| under the optimal control, N=%d sigma=%g R=%g", params.n_goods(),
                params.sigma(), params.radius());
  plot.title = title;
  plot.x_label = "t";
  plot.y_label = "|y(t)|";
  plot.has_hline = true;
  plot.hline = params.radius();
  for (std::size_t i = 0; i < outputs.traced.size(); ++i) {
    const auto& path = outputs.traced[i];
    SvgSeries s{"path " + std::to_string(i), {}, {}};
    for (const auto& sample : path.trace) {
      double sq = 0.0;
      for (double v : sample.y) sq += v * v;
      s.x.push_back(sample.t);
      s.y.push_back(std::sqrt(sq));
    }
    plot.series.push_back(std::move(s));

    if (write_traces) {
      std::ostringstream csv;
      csv << 't';
      for (int k = 1; k <= params.n_goods(); ++k) csv << ",y_" << k;
      csv << ",cost\n";
      for (const auto& sample : path.trace) {
        csv << format_double(sample.t);
        for (double v : sample.y) csv << ',' << format_double(v);
        csv << ',' << format_double(sample.cost) << '\n';
      }
      write_file_atomic(dir / ("trace_path" + std::to_string(i) + ".csv"), csv.str());
    }
  }
  write_file_atomic(dir / "paths.svg", render_svg(plot));
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepTable& table) {
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  table.write_csv(csv);
  write_file_atomic(dir / "sweep.csv", csv.str());

  SvgPlot plot{"production rate coefficient", "r = |y|", "rate", {}, false, 0.0};
  for (const auto& row : table.rows) {
    char label[64];
    std::snprintf(label, sizeof label, "N=%d sigma=%g", row.n_goods, row.sigma);
    if (plot.series.empty() || plot.series.back().label != label) plot.series.push_back({label, {}, {}});
    if (row.rate) {
      plot.series.back().x.push_back(row.r);
      plot.series.back().y.push_back(*row.rate);
    }
  }
  write_file_atomic(dir / "sweep.svg", render_svg(plot));
}

}  // namespace hjb
