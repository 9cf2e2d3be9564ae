// spvar <mode> --config <path> [--out <dir>]
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "spvar/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Grid solver and diagnostics for the nonlinear Schroedinger-Poisson system"};
  std::string mode_arg, config_path, out_dir;
  app.add_option("mode", mode_arg, "solve | sweep_mu | sweep_eps | diagnose | oracle | sobolev")
      ->required()
      ->check(CLI::IsMember({"solve", "sweep_mu", "sweep_eps", "diagnose", "oracle", "sobolev"}));
  app.add_option("--config", config_path, "flat section.key = value config file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  CLI11_PARSE(app, argc, argv);

  spvar::ExperimentConfig cfg;
  try {
    cfg = spvar::load_config(config_path, spvar::parse_mode(mode_arg));
  } catch (const spvar::ConfigError& e) {
    for (const std::string& msg : e.errors()) std::fprintf(stderr, "%s: %s\n", config_path.c_str(), msg.c_str());
    return 2;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;

  spvar::RunOutcome out;
  try {
    out = spvar::run_experiment(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  for (const std::string& a : out.artifacts) std::printf("wrote %s\n", a.c_str());
  for (const std::string& f : out.failures) std::fprintf(stderr, "FAILED: %s\n", f.c_str());
  return out.exit_status;
}
