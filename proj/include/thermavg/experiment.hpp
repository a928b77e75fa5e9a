#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermavg/bounds.hpp"
#include "thermavg/models.hpp"
#include "thermavg/tolerances.hpp"

namespace thermavg {

struct BandConfig {
  enum class Mode { fraction, index } mode = Mode::fraction;
  double lo_frac = 0.25;
  double hi_frac = 0.75;
  Index lo = 0;
  Index hi = 0;
};

struct MeasurementConfig {
  enum class Type { eigenbasis, random_coarse, subsystem } type = Type::random_coarse;
  int n_povms = 1;
  int outcomes = 2;
  Index dim_s = 2;
  SubsystemPosition position = SubsystemPosition::first;
};

/// Initial states, one per seed.
struct StateConfig {
  enum class Kind { band, full, profiled } kind = Kind::band;
  /// Out-of-band population for `profiled`.
  double tail_weight = 0.05;
};

struct SamplingConfig {
  int n_times = 200;
  /// Absolute horizon; ignored when t_max_over_min_gap is set.
  double t_max = 100.0;
  std::optional<double> t_max_over_min_gap;
  SubsystemEquilibration subsystem_form = SubsystemEquilibration::source;
};

struct ExperimentConfig {
  ModelSpec model;
  BandConfig band;
  MeasurementConfig measurements;
  StateConfig states;
  std::vector<BoundName> checks;
  int n_seeds = 1;
  std::uint64_t base_seed = 1;
  SamplingConfig sampling;
  int thm3_restarts = 4;
  /// 0 selects ceil(d/4).
  Index witness_k = 0;
  Tolerances tolerances;
  std::string output = "out";
};

struct Diagnostic {
  enum class Level { error, warning } level = Level::error;
  /// Dotted path of the offending key, e.g. "measurements.dim_s".
  std::string field;
  std::string message;
};

struct ValidationResult {
  std::optional<ExperimentConfig> config;
  std::vector<Diagnostic> diagnostics;
  bool ok() const;
};

/// Schema and applicability diagnostics; never throws on bad input.
ValidationResult validate_config(const nlohmann::json& doc);
ValidationResult validate_config_file(const std::filesystem::path& path);

std::string format_diagnostic(const Diagnostic& d);

/// Everything measured for one ensemble member.
struct InstanceResult {
  std::uint64_t seed = 0;
  Index d = 0;
  double d_eff = 0.0;
  double d_mean = 0.0;
  double d_rms = 0.0;
  double d_max = 0.0;
  Index argmax = 0;
  RVector band_energies;
  RVector per_eigenstate;
  std::vector<Index> scar_indices;
  std::vector<BoundCheck> checks;
  double seconds = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<InstanceResult> instances;
  std::vector<std::string> warnings;
  double seconds = 0.0;

  std::size_t theorem_failures() const;
  std::size_t statistical_failures() const;
};

/// Seed i of the ensemble is base_seed + i; each seed is independent and the
/// results come back in seed order.
ExperimentResult run_experiment(const ExperimentConfig& config);
InstanceResult run_instance(const ExperimentConfig& config, std::uint64_t seed);

nlohmann::json config_to_json(const ExperimentConfig& config);
nlohmann::json report_json(const ExperimentResult& result);

/// CSV header shared by every checks.csv writer.
extern const char* const kChecksCsvHeader;
std::string checks_csv(const std::vector<BoundCheck>& checks);

/// Writes report.json, checks.csv, plotdata_*.csv and timings.json into `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// report.json and checks.csv for the counterexample suite.
void write_counterexample(Index d, const std::filesystem::path& dir, std::uint64_t seed = 0);

}  // namespace thermavg
