#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpbats/analysis.hpp"
#include "tpbats/degree_distribution.hpp"
#include "tpbats/protocol.hpp"

namespace tpbats::experiment {

/// Contents of a flat `key = value` config file. '#' starts a comment.
///
/// Required keys: k p1 p2 F M eta eps.
/// Optional keys: L (16), seed (1), trials (1), workers (1), degree_table
/// (empty: built-in dense distribution), access (round_robin | random),
/// curve_step, curve_max (0: automatic), trace_trials (1), out (out).
struct ExperimentConfig {
  protocol::NetworkConfig network;
  std::uint64_t master_seed = 1;
  std::size_t trials = 1;
  std::size_t workers = 1;
  std::string degree_table;
  protocol::AccessMode access = protocol::AccessMode::round_robin;
  analysis::CurveOptions curve;
  std::size_t trace_trials = 1;
  std::string out_dir = "out";

  void validate() const;
};

/// Throws ConfigError naming the missing, unknown or malformed key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Inverse of parse_config (keys in a fixed order).
std::string format_config(const ExperimentConfig& cfg);

/// Dense default unless a degree table is configured.
bats::DegreeDistribution degree_distribution(const ExperimentConfig& cfg);

/// Seed of trial `index` (0-based) under the master seed.
std::uint64_t trial_seed(std::uint64_t master, std::size_t index);

/// Per-trial trace sink; an empty sink disables tracing for that trial.
using TraceFactory = std::function<protocol::TraceSink(std::size_t trial)>;

/// Runs trials [0, count) on up to `workers` threads; results in trial order.
std::vector<protocol::SimulationResult> run_trials(const protocol::NetworkConfig& net,
                                                   const bats::DegreeDistribution& dist,
                                                   std::uint64_t master_seed,
                                                   std::size_t count, std::size_t workers,
                                                   const protocol::SimulationOptions& options,
                                                   const TraceFactory& trace_for = {});

struct SimulationSummary {
  std::size_t trials = 0;
  std::size_t decoded_trials = 0;
  std::size_t stalled_trials = 0;
  double phase2_mean = 0;
  double phase2_stddev = 0;
  std::vector<double> decode_rank_freq;  // pooled over users and trials
  std::vector<double> final_rank_freq;
};

SimulationSummary summarize(const std::vector<protocol::SimulationResult>& results,
                            std::size_t batch_size);

/// Writes analysis.json, innovative_curve.csv and rank_distribution.csv.
analysis::AnalysisReport cmd_analyze(const ExperimentConfig& cfg,
                                     const std::filesystem::path& out);

/// Writes trials/trial_NNNN.json, trials/trace_NNNN.jsonl for the first
/// trace_trials trials, receipts_user_J.csv of trial 1, trials.csv,
/// rank_histogram.csv and summary.json.
SimulationSummary cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct CompareRow {
  std::size_t users = 0;
  std::size_t two_phase_source_tx = 0;  // nM
  double simulated_total_mean = 0;      // nM + mean Phase-2 transmissions
  std::size_t single_phase_tx = 0;      // N
};

/// k in [k_min, k_max], both within [2, 16]. Writes compare.csv.
std::vector<CompareRow> cmd_compare(const ExperimentConfig& cfg, std::size_t k_min,
                                    std::size_t k_max, const std::filesystem::path& out);

/// Re-runs analysis and simulation with one config key set to each value.
/// Writes sweep.csv.
void cmd_sweep(const ExperimentConfig& cfg, const std::string& param,
               const std::vector<std::string>& values, const std::filesystem::path& out);

}  // namespace tpbats::experiment
