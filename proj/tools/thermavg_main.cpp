// Command-line front end: run / validate / counterexample / version.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "thermavg/adversarial.hpp"
#include "thermavg/experiment.hpp"
#include "thermavg/kernels.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTheoremFailure = 1;
constexpr int kExitConfigError = 2;

void print_diagnostics(const thermavg::ValidationResult& v) {
  for (const auto& d : v.diagnostics) std::cerr << thermavg::format_diagnostic(d) << "\n";
}

int cmd_validate(const std::string& path) {
  const auto v = thermavg::validate_config_file(path);
  print_diagnostics(v);
  if (!v.ok()) return kExitConfigError;
  std::cout << path << ": ok";
  if (!v.diagnostics.empty()) std::cout << " (" << v.diagnostics.size() << " warning(s))";
  std::cout << "\n";
  return kExitOk;
}

int cmd_run(const std::string& path, const std::string& out_flag) {
  const auto v = thermavg::validate_config_file(path);
  print_diagnostics(v);
  if (!v.ok()) return kExitConfigError;
  const thermavg::ExperimentConfig& cfg = *v.config;
  const std::string out = out_flag.empty() ? cfg.output : out_flag;

  thermavg::ExperimentResult res;
  try {
    res = thermavg::run_experiment(cfg);
  } catch (const thermavg::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  thermavg::write_outputs(res, out);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";

  std::size_t passed = 0, failed = 0, inapplicable = 0;
  for (const auto& inst : res.instances)
    for (const auto& c : inst.checks) {
      if (c.status == thermavg::CheckStatus::passed) ++passed;
      else if (c.status == thermavg::CheckStatus::failed) ++failed;
      else ++inapplicable;
    }
  std::cout << "seeds=" << res.instances.size() << " passed=" << passed << " failed=" << failed
            << " inapplicable=" << inapplicable << " -> " << out << "\n";
  return res.theorem_failures() == 0 ? kExitOk : kExitTheoremFailure;
}

int cmd_counterexample(long dim, const std::string& out_flag) {
  if (dim < 2) {
    std::cerr << "error: --dim must be at least 2\n";
    return kExitConfigError;
  }
  const std::string out = out_flag.empty() ? "out" : out_flag;
  thermavg::write_counterexample(dim, out);
  const auto rep = thermavg::counterexample_suite(dim);
  std::printf("d=%ld mean D(rho_n, Omega)=%.15g expected=%.15g\n", dim, rep.mean,
              1.0 - 1.0 / static_cast<double>(dim));
  for (const auto& c : rep.checks)
    std::printf("  %-16s %s  (%s)\n", c.name.c_str(), c.passed ? "passed" : "FAILED",
                c.details.c_str());
  return rep.all_passed() ? kExitOk : kExitTheoremFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenstate thermalisation on average: bounds, witnesses and experiments"};
  app.require_subcommand(1);
  std::string out;
  int threads = 0;
  app.add_option("--out", out, "Output directory (overrides the config's 'output')");
  app.add_option("--threads", threads, "OpenMP worker threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);

  std::string config;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config, "JSON config")->required();
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config, "JSON config")->required();
  long dim = 0;
  auto* cex = app.add_subcommand("counterexample", "Eigenbasis-measurement counterexample suite");
  cex->add_option("--dim", dim, "Band dimension d")->required();
  auto* version = app.add_subcommand("version", "Print the version");
  for (auto* sub : {run, validate, cex, version}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) thermavg::kernels::set_threads(threads);

  try {
    if (*run) return cmd_run(config, out);
    if (*validate) return cmd_validate(config);
    if (*cex) return cmd_counterexample(dim, out);
    if (*version) {
      std::cout << "thermavg " << THERMAVG_VERSION << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTheoremFailure;
  }
  return kExitOk;
}
