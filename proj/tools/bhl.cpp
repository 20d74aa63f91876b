#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bhl/commands.hpp"

namespace {

int emit(const bhl::CommandOutput& out, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << out.table.render();
  else
    out.table.write_atomic(path);
  if (!out.summary.empty()) std::cerr << out.summary << (out.summary.back() == '\n' ? "" : "\n");
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hankel operator spectra on weighted Bergman spaces"};
  app.require_subcommand(1);
  std::string config_path, out_path, suite = "all";

  auto* moments = app.add_subcommand("moments", "moment table m[n] with ratios");
  auto* spectrum = app.add_subcommand("spectrum", "singular values against the predicted law");
  auto* rearrange = app.add_subcommand("rearrange", "level measure and its generalized inverse");
  auto* report = app.add_subcommand("report", "fitted law, norms and trace identity");
  auto* verify = app.add_subcommand("verify", "acceptance suite");
  for (auto* sc : {moments, spectrum, rearrange, report}) {
    sc->add_option("--config", config_path, "experiment config")->required();
    sc->add_option("--out", out_path, "CSV destination (default: stdout or output.path)");
  }
  verify->add_option("--config", config_path, "config (only output.path is used)");
  verify->add_option("--out", out_path, "CSV destination");
  verify->add_option("--suite", suite, "criterion suite name, number, or 'all'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : bhl::kExitUsage;
  }

  try {
    bhl::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = bhl::load_config(config_path);
    const std::string path = out_path.empty() ? cfg.output : out_path;
    if (*moments) return emit(bhl::cmd_moments(cfg), path);
    if (*spectrum) return emit(bhl::cmd_spectrum(cfg), path);
    if (*rearrange) return emit(bhl::cmd_rearrange(cfg), path);
    if (*report) return emit(bhl::cmd_report(cfg), path);
    bhl::select_criteria(suite);  // unknown suite names are usage errors
    return emit(bhl::cmd_verify(suite, cfg.hash), path);
  } catch (const bhl::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return bhl::kExitUsage;
  } catch (const bhl::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return *verify ? bhl::kExitUsage : bhl::kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bhl::kExitFailure;
  }
}
