#pragma once

#include "stagewise/boosters.hpp"
#include "stagewise/csv_io.hpp"
#include "stagewise/synthetic.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace stagewise {

/// Runs fn(0..count-1) on up to `threads` workers (0 = hardware
/// concurrency). The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct EmitFlags {
  bool trace = true;
  bool bounds = false;
  bool certificates = false;
  bool profile_pairs = false;
};

/// Parses a comma list such as "trace,bounds". "all" and "none" work too.
EmitFlags parse_emit(const std::string& list);

struct DatasetSource {
  std::optional<SyntheticSpec> synthetic;
  std::filesystem::path csv;
  ResponseColumn response = std::string("y");
  bool center = true;
};

struct ExperimentConfig {
  DatasetSource data;
  std::vector<AlgorithmConfig> algorithms;
  /// Each axis, when nonempty, replaces the corresponding value of every
  /// algorithm config; cells are the cartesian product.
  std::vector<double> epsilons;
  /// R-FS budgets as fractions of delta_max, each in (0, 1].
  std::vector<double> delta_fracs;
  /// Applies to synthetic sources only.
  std::vector<double> rhos;
  std::filesystem::path out_dir = "out";
  EmitFlags emit;
  /// Tolerance for Lasso and delta_max oracles.
  double oracle_tol = 1e-6;
  std::size_t threads = 0;

  void validate() const;
};

/// Reads the JSON config layout documented in the README. Unknown keys are
/// rejected so typos surface.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

RawDataset load_dataset(const DatasetSource& source);

// ---- gen -------------------------------------------------------------------

/// Writes X.csv, y.csv and meta.json; returns the metadata.
nlohmann::json cmd_gen(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

// ---- fit -------------------------------------------------------------------

/// One resolved run of the sweep.
struct FitCell {
  std::string label;
  AlgorithmConfig config;
  double rho = 0.0;
  /// Set when delta came from a fraction of delta_max.
  std::optional<double> delta_frac;
};

struct FitOutput {
  FitCell cell;
  std::vector<std::filesystem::path> files;
  std::size_t iterations = 0;
  double final_train_error = 0.0;
  double final_l1_norm = 0.0;
};

struct FitResult {
  std::vector<FitOutput> outputs;
  /// delta_max per rho value (one entry for csv sources), when computed.
  std::vector<double> delta_max;
  nlohmann::json metadata;
};

/// Runs every cell. A single cell writes trace.csv (plus bounds.csv,
/// certificates.csv when flagged); sweeps suffix each file with the cell
/// label. fit.json with the resolved deltas is written whenever budgets are
/// given as fractions.
FitResult cmd_fit(const ExperimentConfig& config);

// ---- profile ---------------------------------------------------------------

/// Observed (train_error, l1_norm) and theoretical (bound, shrinkage bound)
/// pairs per cell, with columns normalized to the first train error and to
/// the per-curve maximum l1 value. Writes profile_pairs.csv.
std::filesystem::path cmd_profile(const ExperimentConfig& config);

// ---- verify ----------------------------------------------------------------

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::size_t instances = 4;
  std::size_t iterations = 300;
  /// Added to gamma in the LS-Boost checks. Nonzero only for the negative
  /// control.
  double gamma_shift = 0.0;
  double oracle_tol = 1e-8;
  std::size_t threads = 0;
};

struct FamilyResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  /// Largest observed - bound (negative when every check has room).
  double max_violation = -std::numeric_limits<double>::infinity();
  /// Smallest and largest bound - observed.
  double min_slack = std::numeric_limits<double>::infinity();
  double max_slack = -std::numeric_limits<double>::infinity();
};

struct VerifyReport {
  std::vector<FamilyResult> families;
  double gamma_shift = 0.0;
  bool passed() const;
  nlohmann::json to_json() const;
};

VerifyReport cmd_verify(const VerifyOptions& options);

// ---- rho-sweep -------------------------------------------------------------

struct RhoSweepConfig {
  std::size_t n = 50;
  std::vector<std::size_t> ps{50, 100, 200, 500};
  std::vector<double> rhos{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct RhoSweepRow {
  double rho = 0.0;
  std::size_t p = 0;
  double lambda_pmin = 0.0;
  double gamma = 0.0;
  std::size_t repeats = 0;
};

struct RhoSweepResult {
  std::vector<RhoSweepRow> rows;
  /// Human-readable notes where the average gamma is not nondecreasing in
  /// rho at fixed p. Soft: these never fail the command.
  std::vector<std::string> warnings;
};

RhoSweepResult rho_sweep(const RhoSweepConfig& config);
/// Runs the sweep and writes gamma_vs_p.csv.
RhoSweepResult cmd_rho_sweep(const RhoSweepConfig& config, const std::filesystem::path& out_dir);

}  // namespace stagewise
