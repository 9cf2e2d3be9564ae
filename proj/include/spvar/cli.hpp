// Experiment runner: a flat `section.key = value` config document, its
// validation, and the pipelines behind `spvar <mode>`.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spvar/charge.hpp"
#include "spvar/functional.hpp"
#include "spvar/grid.hpp"

namespace spvar {

enum class Mode { Solve, SweepMu, SweepEps, Diagnose, Oracle, Sobolev };
enum class SolveMethod { Auto, MountainPass, Nehari };

std::string mode_name(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

struct SeedSpec {
  double amplitude = 0.0;  // 0: twice the peak lower bound (lambda/mu)^{1/(p-1)}
  double width = 1.0;
  Vec3 center{0.0, 0.0, 0.0};
  bool operator==(const SeedSpec&) const = default;
};

struct ExperimentConfig {
  Mode mode = Mode::Solve;
  int n = 32;
  double L = 4.0;
  Vec3 center{0.0, 0.0, 0.0};
  ChargeDensity rho = make_constant(1.0);
  ProblemParams params;
  double tol = 1e-8;
  int max_iter = 10000;
  SolveMethod method = SolveMethod::Auto;
  SeedSpec seed;
  std::vector<double> mu_values;   // sweep_mu
  std::vector<double> eps_values;  // sweep_eps, descending
  double L_ref = 8.0;              // sweep_eps grid half-width in units of eps
  bool parallel = false;           // sweep_eps: independent seeds instead of the warm-start chain
  std::uint64_t rng_seed = 1;
  std::string out_dir = "out";
  bool write_csv = true;
  bool write_json = true;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Every problem found in a document, syntax errors as "line L, column C: ...".
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// `mode`, when given, fills a missing `mode` key and must agree with a present one.
ExperimentConfig parse_config(std::string_view text, std::optional<Mode> mode = {});
ExperimentConfig load_config(const std::string& path, std::optional<Mode> mode = {});
std::string serialize_config(const ExperimentConfig& cfg);

struct RunOutcome {
  int exit_status = 0;
  std::vector<std::string> failures;
  std::vector<std::string> artifacts;  // paths written
};

/// Runs the pipeline for cfg.mode and writes its artifacts under cfg.out_dir.
/// exit_status is 0 iff every solve converged and every hard invariant held.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// SPVAR_THREADS if set to a positive integer, else the hardware concurrency.
int worker_count();

}  // namespace spvar
