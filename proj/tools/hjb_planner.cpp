#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hjb/error.hpp"
#include "hjb/experiments.hpp"
#include "hjb/io.hpp"
#include "hjb/parallel.hpp"
#include "hjb/rate_control.hpp"
#include "hjb/series_kernel.hpp"
#include "hjb/simulate.hpp"
#include "hjb/sweep.hpp"

namespace fs = std::filesystem;

namespace {

using Config = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// key=value per line; '#' and ';' start comments.
Config load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  Config cfg;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    line = trim(line.substr(0, line.find_first_of("#;")));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    cfg[key] = value;
  }
  return cfg;
}

// --config is needed before the real parse so its values can become defaults.
std::optional<fs::path> find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return fs::path(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return fs::path(a.substr(9));
  }
  return std::nullopt;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::runtime_error("config key " + key + ": expected a boolean, got '" + v + "'");
}

// Flags keep their target pointer so config values can set them directly.
struct Command {
  CLI::App* app;
  std::map<std::string, bool*> flags;

  void apply(const Config& cfg) {
    for (const auto& [key, value] : cfg) {
      if (key == "config") continue;
      if (auto it = flags.find(key); it != flags.end()) {
        *it->second = parse_bool(key, value);
      } else if (auto* opt = app->get_option_no_throw("--" + key)) {
        opt->default_val(value);
      }
    }
  }
};

std::vector<double> parse_r_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw CLI::ValidationError("--r-grid", "expected min:max:steps, got '" + spec + "'");
  double lo = 0, hi = 0;
  long steps = 0;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    steps = std::stol(parts[2]);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--r-grid", "expected min:max:steps, got '" + spec + "'");
  }
  if (steps < 1 || lo < 0 || hi < lo) throw CLI::ValidationError("--r-grid", "need 0 <= min <= max and steps >= 1");
  std::vector<double> grid;
  for (long i = 0; i <= steps; ++i) grid.push_back(i == steps ? hi : lo + (hi - lo) * double(i) / double(steps));
  return grid;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_floating_point_v<T>) os << hjb::format_double(v[i]);
    else os << v[i];
  }
  return os.str();
}

// run.txt doubles as a config file reproducing the run.
void write_manifest(const fs::path& dir, const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream os;
  os << "# hjb-planner " << command << '\n';
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  fs::create_directories(dir);
  hjb::write_file_atomic(dir / "run.txt", os.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal production planning under stochastic demand: HJB series solver and simulator"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<Command> commands;
  auto add_command = [&](const char* name, const char* help) -> Command& {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key=value file; explicit flags take precedence");
    commands.push_back({sub, {}});
    return commands.back();
  };

  // rate
  int rate_n = 2;
  double rate_sigma = 1.0, rate_r = 1.0;
  std::string rate_grid;
  std::string rate_out;
  commands.reserve(5);
  {
    auto& c = add_command("rate", "Production-rate coefficient rho(r)");
    c.app->add_option("--n", rate_n, "number of goods")->capture_default_str();
    c.app->add_option("--sigma", rate_sigma, "demand volatility")->capture_default_str();
    c.app->add_option("--r", rate_r, "inventory norm |y|")->capture_default_str();
    c.app->add_option("--r-grid", rate_grid, "min:max:steps table instead of a single r");
    c.app->add_option("--out", rate_out, "write rate.csv and run.txt here");
  }

  // cost
  int cost_n = 2;
  double cost_sigma = 1.0, cost_radius = 1.0, cost_r0 = 0.0;
  {
    auto& c = add_command("cost", "Expected optimal cost from a start at distance r0");
    c.app->add_option("--n", cost_n, "number of goods")->capture_default_str();
    c.app->add_option("--sigma", cost_sigma, "demand volatility")->capture_default_str();
    c.app->add_option("--radius", cost_radius, "stopping radius R")->capture_default_str();
    c.app->add_option("--r0", cost_r0, "starting inventory norm")->capture_default_str();
  }

  // sweep
  std::vector<int> sweep_n{2, 10, 100};
  std::vector<double> sweep_sigma{0.5};
  std::string sweep_grid = "0:20:200";
  std::string sweep_out = "sweep_out";
  {
    auto& c = add_command("sweep", "rho over an (N, sigma, r) grid");
    c.app->add_option("--n", sweep_n, "comma-separated N values")->delimiter(',')->capture_default_str();
    c.app->add_option("--sigma", sweep_sigma, "comma-separated sigma values")->delimiter(',')->capture_default_str();
    c.app->add_option("--r-grid", sweep_grid, "min:max:steps")->capture_default_str();
    c.app->add_option("--out", sweep_out, "output directory")->capture_default_str();
  }

  // simulate
  int sim_n = 2;
  double sim_sigma = 1.0, sim_radius = 1.0, sim_dt = 0.0, sim_control_scale = 1.0;
  std::size_t sim_paths = 1000, sim_max_steps = 1'000'000, sim_trace_paths = 5, sim_substeps = 1;
  std::uint64_t sim_seed = 0;
  std::vector<double> sim_y0;
  bool sim_trace = false;
  std::string sim_out = "simulate_out";
  {
    auto& c = add_command("simulate", "Monte Carlo paths under the optimal feedback control");
    c.app->add_option("--n", sim_n, "number of goods")->capture_default_str();
    c.app->add_option("--sigma", sim_sigma, "demand volatility")->capture_default_str();
    c.app->add_option("--radius", sim_radius, "stopping radius R")->capture_default_str();
    c.app->add_option("--dt", sim_dt, "time step (default 1e-4 * min(1, R^2/sigma^2))");
    c.app->add_option("--paths", sim_paths, "number of paths")->capture_default_str();
    c.app->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
    c.app->add_option("--max-steps", sim_max_steps, "step cap per path")->capture_default_str();
    c.app->add_option("--y0", sim_y0, "comma-separated start inventory (default 0)")->delimiter(',');
    c.app->add_option("--substeps", sim_substeps, "Brownian sub-draws per step")->capture_default_str();
    c.app->add_option("--control-scale", sim_control_scale, "multiplier on the optimal control")
        ->capture_default_str();
    c.app->add_option("--trace-paths", sim_trace_paths, "paths plotted and traced")->capture_default_str();
    c.app->add_flag("--trace", sim_trace, "write trace_path<i>.csv files");
    c.flags["trace"] = &sim_trace;
    c.app->add_option("--out", sim_out, "output directory")->capture_default_str();
  }

  // verify
  hjb::VerifyOptions vopt;
  std::string verify_out = "verify_out";
  bool inject_fault = false;
  {
    auto& c = add_command("verify", "Oracle suite: bounds, series/Picard/ODE agreement, exact 4-D solutions");
    c.app->add_option("--n", vopt.n_list, "comma-separated N values")->delimiter(',')->capture_default_str();
    c.app->add_option("--sigma", vopt.sigma_list, "comma-separated sigma values")
        ->delimiter(',')
        ->capture_default_str();
    c.app->add_option("--radius", vopt.radius_list, "comma-separated R values")->delimiter(',')->capture_default_str();
    c.app->add_option("--points", vopt.points, "grid points on [0, R]")->capture_default_str();
    c.app->add_option("--out", verify_out, "output directory")->capture_default_str();
    c.app->add_flag("--inject-fault", inject_fault)->group("");
    c.flags["inject-fault"] = &inject_fault;
  }

  try {
    if (auto path = find_config_arg(argc, argv)) {
      const Config cfg = load_config(*path);
      for (auto& c : commands) c.apply(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  CLI11_PARSE(app, argc, argv);

  hjb::configure_threads_from_env();
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "rate") {
      const std::vector<double> radii = rate_grid.empty() ? std::vector<double>{rate_r} : parse_r_grid(rate_grid);
      double r_top = 0.0;
      for (double r : radii) r_top = std::max(r_top, r);
      const hjb::ModelParams params(rate_n, rate_sigma, r_top > 0.0 ? r_top : 1.0);
      const hjb::RateSeries rate = hjb::build_rate(hjb::build_kernel(params));
      std::ostringstream csv;
      hjb::write_rate_csv(csv, rate, radii);
      std::cout << csv.str();
      if (!rate_out.empty()) {
        fs::create_directories(rate_out);
        hjb::write_file_atomic(fs::path(rate_out) / "rate.csv", csv.str());
        write_manifest(rate_out, command,
                       {{"n", std::to_string(rate_n)},
                        {"sigma", hjb::format_double(rate_sigma)},
                        {rate_grid.empty() ? "r" : "r-grid", rate_grid.empty() ? hjb::format_double(rate_r) : rate_grid}});
      }
    } else if (command == "cost") {
      const hjb::ModelParams params(cost_n, cost_sigma, cost_radius);
      const double cost = hjb::build_kernel(params).expected_optimal_cost(cost_r0);
      std::cout << "r0,expected_cost\n" << hjb::format_double(cost_r0) << ',' << hjb::format_double(cost) << '\n';
    } else if (command == "sweep") {
      hjb::SweepSpec spec{sweep_n, sweep_sigma, parse_r_grid(sweep_grid), sweep_out};
      const hjb::SweepTable table = hjb::sweep_rate(spec);
      hjb::write_sweep_outputs(sweep_out, table);
      write_manifest(sweep_out, command, {{"n", join(sweep_n)}, {"sigma", join(sweep_sigma)}, {"r-grid", sweep_grid}});
      std::size_t empty = 0;
      for (const auto& row : table.rows) {
        if (row.rate) continue;
        ++empty;
        std::cerr << "warning: N=" << row.n_goods << " sigma=" << row.sigma << " r=" << row.r << ": " << row.note
                  << '\n';
      }
      std::cout << "wrote " << table.rows.size() << " rows (" << empty << " empty) to "
                << (fs::path(sweep_out) / "sweep.csv").string() << '\n';
    } else if (command == "simulate") {
      const hjb::ModelParams params(sim_n, sim_sigma, sim_radius);
      hjb::SimConfig cfg;
      cfg.dt = sim_dt > 0.0 ? sim_dt : hjb::default_dt(params);
      cfg.max_steps = sim_max_steps;
      cfg.n_paths = sim_paths;
      cfg.seed = sim_seed;
      cfg.y0 = sim_y0.empty() ? std::vector<double>(static_cast<std::size_t>(sim_n), 0.0) : sim_y0;
      cfg.brownian_substeps = sim_substeps;
      cfg.control_scale = sim_control_scale;
      const hjb::RateSeries rate = hjb::build_rate(hjb::build_kernel(params));
      const auto outputs = hjb::run_simulation(rate, cfg, sim_trace_paths);
      hjb::write_simulation_outputs(sim_out, params, cfg, outputs, sim_trace);
      write_manifest(sim_out, command,
                     {{"n", std::to_string(sim_n)},
                      {"sigma", hjb::format_double(sim_sigma)},
                      {"radius", hjb::format_double(sim_radius)},
                      {"dt", hjb::format_double(cfg.dt)},
                      {"paths", std::to_string(sim_paths)},
                      {"seed", std::to_string(sim_seed)},
                      {"max-steps", std::to_string(sim_max_steps)},
                      {"y0", join(cfg.y0)},
                      {"substeps", std::to_string(sim_substeps)},
                      {"control-scale", hjb::format_double(sim_control_scale)},
                      {"trace-paths", std::to_string(sim_trace_paths)},
                      {"trace", sim_trace ? "true" : "false"}});
      const auto& s = outputs.summary;
      std::cout << "mean=" << hjb::format_double(s.mean) << " stderr=" << hjb::format_double(s.std_error)
                << " exited=" << s.n_exited << '/' << s.n_paths << '\n';
      if (s.n_exited < s.n_paths)
        std::cerr << "note: " << (s.n_paths - s.n_exited) << " paths hit max-steps before reaching R\n";
    } else if (command == "verify") {
      vopt.inject_fault = inject_fault;
      vopt.output_dir = verify_out;
      const hjb::VerifyReport report = hjb::run_verify(vopt);
      write_manifest(verify_out, command,
                     {{"n", join(vopt.n_list)},
                      {"sigma", join(vopt.sigma_list)},
                      {"radius", join(vopt.radius_list)},
                      {"points", std::to_string(vopt.points)},
                      {"inject-fault", inject_fault ? "true" : "false"}});
      report.write_summary(std::cout);
      return report.passed() ? 0 : 1;
    }
  } catch (const hjb::PlannerError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
