#include "sbc/app.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "sbc/certify.hpp"
#include "sbc/dynamics.hpp"
#include "sbc/errors.hpp"
#include "sbc/service.hpp"

namespace sbc {

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
  if (!f) throw Error("failed writing '" + path + "'");
}

int run_synthesis(const std::string& config_path, const std::string& tune, std::optional<std::uint64_t> seed,
                  const std::string& export_path, const std::string& output, const std::string& plot_path,
                  bool falsify_flag, bool timings, const std::string& transition, std::ostream& out,
                  std::ostream& err) {
  Configuration config = load_config(config_path);
  if (seed) config.seed = *seed;
  if (!tune.empty()) {
    const TunerReport r = tune_config(config, tune);
    err << "tuned (" << r.method << "): objective " << r.objective << " after " << r.evaluations << " evaluations\n";
  }
  SynthesisOptions options;
  if (transition == "kernel") options.transition = TransitionMethod::kernel;

  const SynthesisResult result = synthesize(config, [&err](const std::string& line) { err << line << '\n'; }, options);

  std::optional<FalsificationReport> report;
  if (falsify_flag || config.verify) {
    if (config.system_dynamics.empty()) throw ConfigError("--falsify needs system_dynamics in the configuration");
    if (result.certificate) {
      const DynamicsModel model = parse_dynamics(config.system_dynamics, config.noise_std);
      report = falsify(*result.certificate, config.spec, &model, config.dimension() == 1 ? 2000 : 200, 1e-6);
      err << "falsifier: " << (report->clean() ? "no violations" : "violations found") << '\n';
    }
  }
  if (!export_path.empty()) {
    if (!result.lp) throw Error("no LP was assembled");
    write_file(export_path, export_lp(result.lp->problem));
  }
  if (!plot_path.empty() && result.certificate) {
    write_file(plot_path, barrier_grid_csv(barrier_grid(*result.certificate, config.spec)));
  }
  const std::string text = render_json(result_to_json(result, config, timings, report ? &*report : nullptr));
  if (output.empty()) {
    out << text;
  } else {
    write_file(output, text);
  }
  if (result.certificate) err << "safety lower bound: " << result.certificate->bound << '\n';
  return result.certified ? exit_certified : exit_not_certified;
}

}  // namespace

std::string render_json(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

TunerReport tune_config(Configuration& config, const std::string& method) {
  const Dataset data = resolve_dataset(config);
  TunerReport report;
  if (method == "median") {
    report.params = median_heuristic(data, config.lambda);
    report.params.sigma_f = config.sigma_f;
    report.method = "median";
  } else if (method == "lbfgs") {
    const Eigen::Index n = data.dimension();
    const KernelParams lower{config.sigma_f, Vector::Constant(n, 1e-5), 1e-5};
    const KernelParams upper{config.sigma_f, Vector::Constant(n, 1e5), 1e5};
    KernelParams init{config.sigma_f, config.sigma_l, std::max(config.lambda, 1e-5)};
    if (init.sigma_l.size() != n) init.sigma_l = Vector::Constant(n, 1.0);
    report = lbfgs_tune(data, lower, upper, init);
  } else if (method == "grid") {
    const KernelParams centre = median_heuristic(data, config.lambda);
    std::vector<KernelParams> grid;
    for (double s : {0.125, 0.25, 0.5, 1.0, 2.0}) {
      for (double l : {1e-8, 1e-6, 1e-4, 1e-2}) grid.push_back({config.sigma_f, centre.sigma_l * s, l});
    }
    report = grid_search(data, grid);
  } else {
    throw ConfigError("unknown tuner '" + method + "' (expected median, lbfgs or grid)");
  }
  config.sigma_l = report.params.sigma_l;
  config.lambda = report.params.lambda;
  return report;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral barrier certificates from transition data"};
  app.set_version_flag("--version", "sbc 1.0.0");
  std::string config_path, tune, export_path, output, plot_path, transition = "projection";
  std::optional<std::uint64_t> seed;
  bool falsify_flag = false, timings = false;
  app.add_option("config", config_path, "YAML or JSON configuration");
  app.add_option("--tune", tune, "tune sigma_l and lambda first")->check(CLI::IsMember({"median", "lbfgs", "grid"}));
  app.add_option("--seed", seed, "override the configuration seed");
  app.add_option("--export-lp", export_path, "write the assembled LP in CPLEX LP format");
  app.add_option("-o,--output", output, "write the result JSON here instead of stdout");
  app.add_option("--plot", plot_path, "write barrier samples as CSV")->expected(0, 1)->default_str("barrier.csv");
  app.add_option("--transition", transition, "transition matrix construction")
      ->check(CLI::IsMember({"projection", "kernel"}));
  app.add_flag("--falsify", falsify_flag, "grid-check the certificate against the true dynamics");
  app.add_flag("--timings", timings, "include stage timings in the result");

  auto* serve = app.add_subcommand("serve", "run the HTTP job service");
  int port = 8080;
  if (const char* env = std::getenv("SBC_PORT")) port = std::atoi(env);
  std::string bench_dir;
  serve->add_option("--port", port, "listen port (default $SBC_PORT or 8080)");
  serve->add_option("--benchmarks", bench_dir, "directory of shipped configurations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_certified : exit_error;
  }
  // `--plot` with no value keeps the default file name
  if (app.count("--plot") > 0 && plot_path.empty()) plot_path = "barrier.csv";

  try {
    if (*serve) {
      ServiceOptions opts;
      opts.benchmark_dir = bench_dir.empty() ? std::string(SBC_BENCHMARK_DIR) : bench_dir;
      Service service(opts);
      err << "listening on 127.0.0.1:" << port << '\n';
      return service.listen("127.0.0.1", port) ? exit_certified : exit_error;
    }
    if (config_path.empty()) {
      err << "error: a configuration file is required\n" << app.help();
      return exit_error;
    }
    return run_synthesis(config_path, tune, seed, export_path, output, plot_path, falsify_flag, timings, transition,
                         out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
}

}  // namespace sbc
