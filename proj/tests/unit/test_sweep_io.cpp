#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hjb/experiments.hpp"
#include "hjb/io.hpp"
#include "hjb/oracles.hpp"
#include "hjb/rate_control.hpp"
#include "hjb/series_kernel.hpp"
#include "hjb/sweep.hpp"

using namespace hjb;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hjb_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

const SweepRow& cell(const SweepTable& t, int n, double sigma, double r) {
  for (const auto& row : t.rows)
    if (row.n_goods == n && row.sigma == sigma && row.r == r) return row;
  throw std::out_of_range("no such cell");
}

}  // namespace

TEST(Sweep, PatternsAcrossAxes) {
  SweepSpec spec{{2, 10, 100}, {0.5, 1.0, 2.0}, uniform_grid(0.0, 10.0, 101), {}};
  const auto t = sweep_rate(spec);
  ASSERT_EQ(t.rows.size(), 3u * 3u * 101u);
  for (int n : spec.n_list)
    for (double s : spec.sigma_list) {
      double prev = -1.0;
      for (double r : spec.r_grid) {
        const auto& row = cell(t, n, s, r);
        ASSERT_TRUE(row.rate.has_value()) << row.note;
        if (r == 0.0) EXPECT_EQ(*row.rate, 0.0);
        EXPECT_GE(*row.rate - prev, -1e-12);
        prev = *row.rate;
        if (r > 0.0) {
          if (n != 100) EXPECT_LE(cell(t, n == 2 ? 10 : 100, s, r).rate.value(), *row.rate + 1e-15);
          if (s != 2.0) EXPECT_LE(cell(t, n, s == 0.5 ? 1.0 : 2.0, r).rate.value(), *row.rate + 1e-15);
        }
      }
    }
  // All curves approach 1 with gap ~ N sigma^2 / (2 r^2).
  for (int n : {2, 10, 100}) {
    const double gap = n * 0.25 / (2 * 100.0);
    EXPECT_NEAR(1.0 - cell(t, n, 0.5, 10.0).rate.value(), gap, 0.2 * gap) << n;
  }
  EXPECT_GT(cell(t, 100, 0.5, 1.0).rate.value(), cell(t, 100, 1.0, 1.0).rate.value());
  EXPECT_GT(cell(t, 100, 1.0, 1.0).rate.value(), cell(t, 100, 2.0, 1.0).rate.value());
}

TEST(Sweep, RowOrderAndSerialReference) {
  SweepSpec spec{{3, 1}, {2.0, 0.7}, {0.0, 0.5, 1.5}, {}};
  const auto par = sweep_rate(spec);
  const auto ser = sweep_rate_serial(spec);
  ASSERT_EQ(par.rows.size(), ser.rows.size());
  for (std::size_t i = 0; i < par.rows.size(); ++i) {
    EXPECT_EQ(par.rows[i].n_goods, ser.rows[i].n_goods);
    EXPECT_EQ(par.rows[i].rate, ser.rows[i].rate);
  }
  EXPECT_EQ(par.rows[0].n_goods, 3);
  EXPECT_EQ(par.rows[0].sigma, 2.0);
  EXPECT_EQ(par.rows[3].sigma, 0.7);
  EXPECT_EQ(par.rows[6].n_goods, 1);
}

TEST(Sweep, FailedSliceLeavesEmptyCells) {
  SweepSpec spec{{2}, {0.01, 1.0}, {0.0, 100.0}, {}};
  const auto t = sweep_rate(spec);
  EXPECT_FALSE(cell(t, 2, 0.01, 100.0).rate.has_value());
  EXPECT_NE(cell(t, 2, 0.01, 100.0).note.find("series truncation overflow"), std::string::npos);
  EXPECT_TRUE(cell(t, 2, 1.0, 100.0).rate.has_value());
  std::ostringstream csv;
  t.write_csv(csv);
  EXPECT_NE(csv.str().find("2,0.01,100,\n"), std::string::npos);
}

TEST(Sweep, Validation) {
  EXPECT_THROW(validate(SweepSpec{{}, {1.0}, {0.0}, {}}), std::invalid_argument);
  EXPECT_THROW(validate(SweepSpec{{0}, {1.0}, {0.0}, {}}), std::invalid_argument);
  EXPECT_THROW(validate(SweepSpec{{2}, {-1.0}, {0.0}, {}}), std::invalid_argument);
  EXPECT_THROW(validate(SweepSpec{{2}, {1.0}, {1.0, 0.5}, {}}), std::invalid_argument);
  EXPECT_THROW(sweep_rate(SweepSpec{{2}, {1.0}, {-1.0}, {}}), std::invalid_argument);
}

TEST(Io, FormatsRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  const double v = 0.24249961258080194;
  EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Io, AtomicWriteReplacesContent) {
  const auto dir = scratch("atomic");
  fs::create_directories(dir);
  write_file_atomic(dir / "a.txt", "first");
  write_file_atomic(dir / "a.txt", "second");
  EXPECT_EQ(slurp(dir / "a.txt"), "second");
  EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
  try {
    write_file_atomic(dir / "missing" / "b.txt", "x");
    FAIL() << "expected an I/O error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Io, SvgHasSeriesLegendAndRule) {
  SvgPlot plot{"t", "x", "y", {{"one", {0, 1, 2}, {0, 1, 4}}, {"two", {0, 1}, {1, 1}}}, true, 2.5};
  const auto svg = render_svg(plot);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos; at = svg.find("<polyline", at + 1)) ++polylines;
  EXPECT_EQ(polylines, 2u);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(svg.find(">one<"), std::string::npos);
}

TEST(Experiments, VerifyPassesAndWritesReports) {
  VerifyOptions opt;
  opt.n_list = {2, 4};
  opt.sigma_list = {1.0};
  opt.radius_list = {1.0};
  opt.points = 50;
  opt.output_dir = scratch("verify");
  const auto report = run_verify(opt);
  EXPECT_TRUE(report.passed());
  for (const char* f : {"bounds_N2_sigma1_R1.csv", "equivalence.csv", "picard_increments.csv", "exact4d.csv", "summary.txt"})
    EXPECT_TRUE(fs::exists(opt.output_dir / f)) << f;
  EXPECT_EQ(slurp(opt.output_dir / "equivalence.csv").substr(0, 8), "N,sigma,");
  fs::remove_all(opt.output_dir);
}

TEST(Experiments, InjectedFaultFailsVerify) {
  VerifyOptions opt;
  opt.n_list = {2};
  opt.sigma_list = {1.0};
  opt.radius_list = {1.0};
  opt.inject_fault = true;
  const auto report = run_verify(opt);
  EXPECT_FALSE(report.passed());
  std::ostringstream summary;
  report.write_summary(summary);
  EXPECT_NE(summary.str().find("FAIL bounds N=2 sigma=1 R=1: bound violation"), std::string::npos);
}

TEST(Experiments, SimulationArtifacts) {
  const ModelParams params(2, 1.0, 1.0);
  const auto rate = build_rate(build_kernel(params));
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_paths = 20;
  cfg.seed = 3;
  cfg.y0 = {0.0, 0.0};
  const auto out = run_simulation(rate, cfg, 2);
  ASSERT_EQ(out.traced.size(), 2u);
  EXPECT_EQ(out.traced[0].cost, euler_path(rate, cfg, 0).cost);
  const auto dir = scratch("sim");
  write_simulation_outputs(dir, params, cfg, out, true);
  const auto summary = slurp(dir / "summary.csv");
  EXPECT_EQ(summary.substr(0, summary.find('\n')), "mean,stderr,n_exited,n_paths,dt,seed");
  EXPECT_NE(summary.find(",20,20,0.001,3\n"), std::string::npos);
  EXPECT_EQ(slurp(dir / "trace_path1.csv").substr(0, 15), "t,y_1,y_2,cost\n");
  EXPECT_TRUE(fs::exists(dir / "paths.svg"));
  EXPECT_FALSE(fs::exists(dir / "trace_path2.csv"));
  fs::remove_all(dir);
}

TEST(Experiments, SweepArtifacts) {
  const auto dir = scratch("sweep");
  write_sweep_outputs(dir, sweep_rate(SweepSpec{{2}, {1.0}, {0.0, 1.0}, dir}));
  EXPECT_EQ(slurp(dir / "sweep.csv").substr(0, 15), "N,sigma,r,rate\n");
  EXPECT_NE(slurp(dir / "sweep.svg").find("N=2 sigma=1"), std::string::npos);
  fs::remove_all(dir);
}
