#pragma once

// Command-line front end: test, bootstrap-draws, simulate, oracle.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ujack/json_io.hpp"
#include "ujack/ujack.hpp"

namespace ujack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDegenerate = 3;

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = ujack::detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> parse_doubles(const std::string& what, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(ujack::detail::parse_double(what, item));
  if (out.empty()) throw InvalidParameter(what + " is empty");
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void apply_threads(std::optional<std::size_t> flag) {
  if (flag) {
    set_thread_count(*flag);
    return;
  }
  if (const char* env = std::getenv("UJACK_THREADS")) {
    try {
      set_thread_count(std::stoul(env));
    } catch (const std::exception&) {
      throw InvalidParameter("UJACK_THREADS must be a positive integer");
    }
    return;
  }
  set_thread_count(0);
}

struct TestArgs {
  std::string method;
  std::string data;
  std::string x_cols;
  std::string y_col;
  std::optional<double> bandwidth;
  std::string bandwidth_set;
  double grid_min = 0.05;
  double grid_max = 0.95;
  std::size_t grid_points = 19;
  std::size_t boot = 500;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string out;
  std::string y_grid;
  std::string smoothing = "epanechnikov";
  bool two_sided = false;
  std::size_t incomplete_terms = 0;
  std::string emit_draws;
  std::optional<std::size_t> threads;
};

inline void add_test_options(CLI::App* cmd, TestArgs& a) {
  cmd->add_option("--method", a.method, "gsv | llw | aw-sign | aw-raw")
      ->required()
      ->check(CLI::IsMember({"gsv", "llw", "aw-sign", "aw-raw"}));
  cmd->add_option("--data", a.data, "CSV file with a header row")->required();
  cmd->add_option("--x-cols", a.x_cols, "comma-separated covariate columns")->required();
  cmd->add_option("--y-col", a.y_col, "response column")->required();
  auto* bw = cmd->add_option("--bandwidth", a.bandwidth, "single bandwidth b > 0");
  auto* bws = cmd->add_option("--bandwidth-set", a.bandwidth_set, "comma-separated bandwidths");
  bw->excludes(bws);
  cmd->add_option("--grid-min", a.grid_min, "lower end of the design grid");
  cmd->add_option("--grid-max", a.grid_max, "upper end of the design grid");
  cmd->add_option("--grid-points", a.grid_points, "design points per axis");
  cmd->add_option("--boot", a.boot, "bootstrap draws B");
  cmd->add_option("--alpha", a.alpha, "nominal level");
  cmd->add_option("--seed", a.seed, "RNG seed")->required();
  cmd->add_option("--out", a.out, "output path (default: stdout)");
  cmd->add_option("--y-grid", a.y_grid, "comma-separated response thresholds (llw)");
  cmd->add_option("--smoothing", a.smoothing, "epanechnikov | uniform");
  cmd->add_flag("--two-sided", a.two_sided, "sup of |.| instead of the one-sided sup");
  cmd->add_option("--incomplete-terms", a.incomplete_terms, "use incomplete U-statistics with N terms");
  cmd->add_option("--threads", a.threads, "worker threads (default: UJACK_THREADS or all cores)");
}

inline TestOutcome execute_test(const TestArgs& a, std::ostream& err) {
  const Method method = parse_method(a.method);
  const auto xcols = split_list(a.x_cols);
  if (xcols.empty()) throw InvalidParameter("--x-cols is empty");
  auto payload = xcols;
  payload.push_back(a.y_col);
  const Sample sample = load_csv(a.data, xcols, payload);

  std::vector<double> bandwidths;
  if (a.bandwidth) {
    bandwidths.push_back(*a.bandwidth);
  } else if (!a.bandwidth_set.empty()) {
    bandwidths = parse_doubles("--bandwidth-set", a.bandwidth_set);
  } else {
    throw InvalidParameter("one of --bandwidth or --bandwidth-set is required");
  }
  auto grid = ThetaGrid::equidistant(a.grid_min, a.grid_max, a.grid_points, sample.m(), bandwidths);
  if (method == Method::kLlw) {
    if (a.y_grid.empty()) throw InvalidParameter("--y-grid is required for llw");
    grid.y_thresholds = parse_doubles("--y-grid", a.y_grid);
  }
  TestOptions opts;
  opts.smoothing = a.smoothing;
  opts.two_sided = a.two_sided;
  opts.incomplete_terms = a.incomplete_terms;
  auto out = run_test_detailed(sample, method, grid, {a.boot, a.seed}, a.alpha, opts);
  for (const auto& w : out.report.warnings) err << "warning: " << w << '\n';
  return out;
}

inline std::string draws_text(const BootstrapDraws& draws) {
  std::string s;
  char buf[40];
  for (double v : draws.values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    s += buf;
  }
  return s;
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_file(path, content);
  }
}

}  // namespace detail

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ujack: jackknife multiplier bootstrap for suprema of U-processes"};
  app.name("ujack");
  app.require_subcommand(1);

  detail::TestArgs test_args;
  auto* test = app.add_subcommand("test", "run a sup-type local U-process test");
  detail::add_test_options(test, test_args);
  test->add_option("--emit-draws", test_args.emit_draws, "write the B bootstrap draws, one per line");

  detail::TestArgs draw_args;
  auto* draws = app.add_subcommand("bootstrap-draws", "write the bootstrap sup draws, one per line");
  detail::add_test_options(draws, draw_args);

  std::string sim_config;
  std::string sim_out;
  std::string sim_curve;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_threads;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo size study under the null");
  sim->add_option("--config", sim_config, "key=value config file")->required();
  sim->add_option("--out", sim_out, "result JSON path (default: stdout)");
  sim->add_option("--curve", sim_curve, "rejection-curve CSV path");
  sim->add_option("--seed", sim_seed, "master seed (overrides the config file)");
  sim->add_option("--threads", sim_threads, "worker threads");

  std::string suite = "hoeffding";
  std::uint64_t oracle_seed = 0;
  std::size_t instances = 20;
  std::string oracle_out;
  std::optional<std::size_t> oracle_threads;
  auto* oracle = app.add_subcommand("oracle", "randomized exact-identity suites");
  oracle->add_option("--suite", suite, "hoeffding")->check(CLI::IsMember({"hoeffding"}));
  oracle->add_option("--seed", oracle_seed, "RNG seed")->required();
  oracle->add_option("--instances", instances, "random instances");
  oracle->add_option("--out", oracle_out, "output path (default: stdout)");
  oracle->add_option("--threads", oracle_threads, "worker threads");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (test->parsed() || draws->parsed()) {
      err << "valid methods: gsv, llw, aw-sign, aw-raw\n";
    }
    return kExitInput;
  }

  try {
    if (test->parsed()) {
      detail::apply_threads(test_args.threads);
      const auto result = detail::execute_test(test_args, err);
      detail::emit(test_args.out, dump_json(to_json(result.report)), out);
      if (!test_args.emit_draws.empty()) detail::write_file(test_args.emit_draws, detail::draws_text(result.draws));
    } else if (draws->parsed()) {
      detail::apply_threads(draw_args.threads);
      const auto result = detail::execute_test(draw_args, err);
      detail::emit(draw_args.out, detail::draws_text(result.draws), out);
    } else if (sim->parsed()) {
      detail::apply_threads(sim_threads);
      auto [config, has_seed] = parse_sim_config(detail::read_file(sim_config));
      if (sim_seed) {
        config.seed = *sim_seed;
      } else if (!has_seed) {
        throw InvalidParameter("a seed is required (config key 'seed' or --seed)");
      }
      const auto result = run_size_study(config);
      err << "simulate: " << result.completed() << " replications in " << result.runtime_seconds << " s\n";
      detail::emit(sim_out, dump_json(to_json(result)), out);
      if (!sim_curve.empty()) detail::write_file(sim_curve, curve_csv(emit_rejection_curve(result)));
    } else if (oracle->parsed()) {
      detail::apply_threads(oracle_threads);
      const auto res = run_hoeffding_suite(oracle_seed, instances);
      Json j;
      j["suite"] = suite;
      j["seed"] = res.seed;
      j["instances"] = res.instances.size();
      j["max_decomposition_residual"] = res.max_decomposition_residual;
      j["max_projection_marginal"] = res.max_projection_marginal;
      j["passed"] = res.max_decomposition_residual <= 1e-10 && res.max_projection_marginal <= 1e-10;
      Json items = Json::array();
      for (const auto& inst : res.instances) {
        Json i;
        i["n"] = inst.n;
        i["r"] = inst.r;
        i["atoms"] = inst.atoms;
        i["decomposition_residual"] = inst.decomposition_residual;
        i["max_marginal"] = inst.max_marginal;
        items.push_back(i);
      }
      j["details"] = items;
      detail::emit(oracle_out, dump_json(j), out);
    }
  } catch (const DegenerateError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace ujack::cli
