#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fedsim/config.hpp"
#include "fedsim/types.hpp"

namespace fedsim {

struct RoundMetrics {
  int t = 0;
  double dist = 0.0;            // ||x_server - x*||
  double grad_norm = 0.0;       // ||grad F(xbar)||
  double value = 0.0;           // F(xbar)
  double consensus = 0.0;       // (1/m) sum ||xbar - x_i||^2
  int active_count = 0;         // |A^t|
  double mean_staleness = 0.0;  // running mean of t - tau_i(t); 0 until defined
};

struct RunSummary {
  int rounds = 0;
  double initial_dist = 0.0;
  double final_dist = 0.0;
  double last100_mean_dist = 0.0;
  double final_grad_norm = 0.0;
  double mean_active = 0.0;
};

struct ExperimentResult {
  std::vector<RoundMetrics> rounds;
  RunSummary summary;
};

/// The objective an experiment will optimize (the per-seed random instance
/// when the config does not pin it down explicitly).
std::unique_ptr<Objective> build_objective(const ExperimentConfig& cfg,
                                           std::uint64_t seed);

/// Runs one experiment; deterministic given (cfg, seed).
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                std::uint64_t seed);

/// One self-describing JSON record per round, then a summary record with
/// type "summary".
void write_jsonl(const ExperimentConfig& cfg, std::uint64_t seed,
                 const ExperimentResult& result, std::ostream& out);

/// Flat CSV projection of the per-round series (for plotting).
void write_csv(const ExperimentResult& result, std::ostream& out);

/// Writes content to path via a temp file + rename.
void write_file_atomic(const std::string& path, const std::string& content);

/// Resolves an output path against the FEDSIM_OUT_DIR environment variable
/// (relative paths are placed inside it when it is set).
std::string resolve_output_path(const std::string& path);

struct GridAxis {
  std::string key;
  std::vector<Json> values;
};

struct SweepCell {
  Json overrides;  // key -> value applied to the base config
  std::vector<std::uint64_t> seeds;
  // Aggregates over seeds (mean, std with denominator n).
  double final_dist_mean = 0.0, final_dist_std = 0.0;
  double last100_mean = 0.0, last100_std = 0.0;
  double final_grad_norm_mean = 0.0, final_grad_norm_std = 0.0;
};

/// Cartesian product of the grid axes over the base config; every cell runs
/// all configured seeds. Cells execute concurrently; the returned order is
/// the deterministic row-major grid order.
std::vector<SweepCell> run_sweep(const ExperimentConfig& base,
                                 const std::vector<GridAxis>& grid);

void write_sweep_jsonl(const std::vector<SweepCell>& cells, std::ostream& out);

}  // namespace fedsim
