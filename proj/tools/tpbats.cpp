#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tpbats/errors.hpp"
#include "tpbats/experiment.hpp"

namespace {

namespace ex = tpbats::experiment;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> workers;
  std::string degree_table;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "Config file (key = value)")->required();
  cmd->add_option("-o,--out", f.out, "Output directory (overrides `out`)");
  cmd->add_option("--seed", f.seed, "Master seed (overrides `seed`)");
  cmd->add_option("--trials", f.trials, "Trial count (overrides `trials`)");
  cmd->add_option("--workers", f.workers, "Worker threads (overrides `workers`)");
  cmd->add_option("--degree-table", f.degree_table,
                  "Degree distribution table (overrides `degree_table`)");
}

ex::ExperimentConfig resolve(const CommonFlags& f) {
  auto cfg = ex::load_config(f.config);
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.trials) cfg.trials = *f.trials;
  if (f.workers) cfg.workers = *f.workers;
  if (!f.degree_table.empty()) cfg.degree_table = f.degree_table;
  cfg.validate();
  return cfg;
}

int fail(const std::string& code, const std::string& message) {
  std::cerr << "tpbats-error: " << code << ": " << message << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase BATS broadcast: analysis and simulation"};
  app.require_subcommand(1);

  CommonFlags analyze_flags, simulate_flags, compare_flags, sweep_flags;
  auto* analyze = app.add_subcommand("analyze", "Analytic batch count, Phase-2 estimate and rank law");
  add_common(analyze, analyze_flags);

  auto* simulate = app.add_subcommand("simulate", "Seeded Monte-Carlo runs of the protocol");
  add_common(simulate, simulate_flags);

  auto* compare = app.add_subcommand("compare", "Two-phase versus single-phase over a range of k");
  add_common(compare, compare_flags);
  std::size_t k_min = 3;
  std::size_t k_max = 10;
  compare->add_option("--k-min", k_min, "Smallest k")->capture_default_str();
  compare->add_option("--k-max", k_max, "Largest k")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Vary one parameter");
  add_common(sweep, sweep_flags);
  std::string param;
  std::vector<std::string> values;
  sweep->add_option("--param", param, "Config key to vary (k p1 p2 F M eta eps L)")->required();
  sweep->add_option("--values", values, "Values, comma separated")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what());
  }

  try {
    if (*analyze) {
      const auto cfg = resolve(analyze_flags);
      const auto r = ex::cmd_analyze(cfg, cfg.out_dir);
      std::cout << "batches " << r.n_batches << "\nsource_tx " << r.source_tx
                << "\nphase2_tx " << r.phase2.transmissions << "\nsingle_phase_tx "
                << r.single_phase_tx << '\n';
    } else if (*simulate) {
      const auto cfg = resolve(simulate_flags);
      const auto s = ex::cmd_simulate(cfg, cfg.out_dir);
      std::cout << "trials " << s.trials << "\ndecoded_trials " << s.decoded_trials
                << "\nphase2_mean " << s.phase2_mean << "\nphase2_stddev " << s.phase2_stddev
                << '\n';
    } else if (*compare) {
      const auto cfg = resolve(compare_flags);
      for (const auto& row : ex::cmd_compare(cfg, k_min, k_max, cfg.out_dir)) {
        std::cout << "k " << row.users << " nM " << row.two_phase_source_tx << " total "
                  << row.simulated_total_mean << " N " << row.single_phase_tx << '\n';
      }
    } else if (*sweep) {
      const auto cfg = resolve(sweep_flags);
      ex::cmd_sweep(cfg, param, values, cfg.out_dir);
      std::cout << "wrote " << (std::filesystem::path(cfg.out_dir) / "sweep.csv").string() << '\n';
    }
  } catch (const tpbats::ConfigError& e) {
    return fail("config:" + e.field(), e.what());
  } catch (const tpbats::InfeasibleTarget& e) {
    return fail("infeasible", std::string(e.what()) + " (saturation " +
                                  std::to_string(e.saturation()) + ")");
  } catch (const tpbats::DomainError& e) {
    return fail("domain", e.what());
  } catch (const tpbats::CodecError& e) {
    return fail("codec", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
