#include "tpbats/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "tpbats/errors.hpp"
#include "tpbats/record.hpp"
#include "tpbats/table.hpp"

namespace tpbats::experiment {
namespace fs = std::filesystem;
namespace {

using table::format_count;
using table::format_double;

const std::set<std::string> kRequired = {"k", "p1", "p2", "F", "M", "eta", "eps"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key, key + ": cannot parse \"" + value + "\"");
  }
  return out;
}

/// Sets one key; returns false for an unknown key.
bool set_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto& n = c.network;
  if (key == "k") n.users = parse_number<std::size_t>(key, value);
  else if (key == "p1") n.source_erasure = parse_number<double>(key, value);
  else if (key == "p2") n.peer_erasure = parse_number<double>(key, value);
  else if (key == "F") n.file_packets = parse_number<std::size_t>(key, value);
  else if (key == "M") n.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "eta") n.overhead = parse_number<double>(key, value);
  else if (key == "eps") n.failure_prob = parse_number<double>(key, value);
  else if (key == "L") n.packet_length = parse_number<std::size_t>(key, value);
  else if (key == "seed") c.master_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "trials") c.trials = parse_number<std::size_t>(key, value);
  else if (key == "workers") c.workers = parse_number<std::size_t>(key, value);
  else if (key == "degree_table") c.degree_table = value;
  else if (key == "curve_step") c.curve.step = parse_number<std::size_t>(key, value);
  else if (key == "curve_max") c.curve.max = parse_number<std::size_t>(key, value);
  else if (key == "trace_trials") c.trace_trials = parse_number<std::size_t>(key, value);
  else if (key == "out") c.out_dir = value;
  else if (key == "access") {
    if (value == "round_robin") c.access = protocol::AccessMode::round_robin;
    else if (value == "random") c.access = protocol::AccessMode::random;
    else throw ConfigError(key, key + ": expected round_robin or random, got \"" + value + "\"");
  } else {
    return false;
  }
  return true;
}

const char* access_name(protocol::AccessMode a) {
  return a == protocol::AccessMode::random ? "random" : "round_robin";
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("out", "out: cannot write " + path.string());
  out << text;
}

void write_table(const fs::path& path, const table::Table& t) {
  std::ostringstream s;
  table::write_csv(s, t);
  write_file(path, s.str());
}

/// Metadata every table carries so it can be reproduced on its own.
std::vector<std::pair<std::string, std::string>> provenance(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> meta;
  std::istringstream lines(format_config(c));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    meta.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  return meta;
}

std::string numbered(const char* prefix, std::size_t i, const char* ext) {
  std::ostringstream s;
  s << prefix << std::setw(4) << std::setfill('0') << i << ext;
  return s.str();
}

protocol::SimulationOptions sim_options(const ExperimentConfig& c, bool receipts) {
  protocol::SimulationOptions o;
  o.access = c.access;
  o.record_receipts = receipts;
  return o;
}

}  // namespace

void ExperimentConfig::validate() const {
  network.validate();
  if (trials == 0) throw ConfigError("trials", "trials: must be >= 1");
  if (workers == 0) throw ConfigError("workers", "workers: must be >= 1");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config", "config: line " + std::to_string(line_no) +
                                      " is not key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key, key + ": given twice");
    if (!set_key(c, key, value)) throw ConfigError(key, key + ": unknown key");
  }
  for (const auto& key : kRequired) {
    if (!seen.contains(key)) throw ConfigError(key, key + ": required key missing");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "config: cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str());
}

std::string format_config(const ExperimentConfig& c) {
  const auto& n = c.network;
  std::ostringstream s;
  s << "k = " << n.users << '\n'
    << "p1 = " << format_double(n.source_erasure) << '\n'
    << "p2 = " << format_double(n.peer_erasure) << '\n'
    << "F = " << n.file_packets << '\n'
    << "M = " << n.batch_size << '\n'
    << "eta = " << format_double(n.overhead) << '\n'
    << "eps = " << format_double(n.failure_prob) << '\n'
    << "L = " << n.packet_length << '\n'
    << "seed = " << c.master_seed << '\n'
    << "trials = " << c.trials << '\n'
    << "workers = " << c.workers << '\n'
    << "degree_table = " << c.degree_table << '\n'
    << "access = " << access_name(c.access) << '\n'
    << "curve_step = " << c.curve.step << '\n'
    << "curve_max = " << c.curve.max << '\n'
    << "trace_trials = " << c.trace_trials << '\n'
    << "out = " << c.out_dir << '\n';
  return s.str();
}

bats::DegreeDistribution degree_distribution(const ExperimentConfig& c) {
  if (c.degree_table.empty()) return bats::DegreeDistribution::dense(c.network.file_packets);
  return bats::DegreeDistribution::load_table(c.degree_table);
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, StreamKind::trial, static_cast<std::uint32_t>(index));
}

std::vector<protocol::SimulationResult> run_trials(const protocol::NetworkConfig& net,
                                                   const bats::DegreeDistribution& dist,
                                                   std::uint64_t master_seed,
                                                   std::size_t count, std::size_t workers,
                                                   const protocol::SimulationOptions& options,
                                                   const TraceFactory& trace_for) {
  std::vector<protocol::SimulationResult> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        auto o = options;
        if (trace_for) o.trace = trace_for(i);
        results[i] = protocol::run_protocol(net, dist, trial_seed(master_seed, i), o);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(1, workers), count);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

SimulationSummary summarize(const std::vector<protocol::SimulationResult>& results,
                            std::size_t batch_size) {
  SimulationSummary s;
  s.trials = results.size();
  std::vector<double> decode(batch_size + 1, 0.0);
  std::vector<double> final(batch_size + 1, 0.0);
  double sum = 0.0;
  for (const auto& r : results) {
    if (r.all_decoded) ++s.decoded_trials;
    if (r.stalled) ++s.stalled_trials;
    sum += static_cast<double>(r.phase2_total_tx);
    for (const auto& u : r.users) {
      for (std::size_t i = 0; i < u.decode_rank_histogram.size(); ++i) {
        decode[i] += static_cast<double>(u.decode_rank_histogram[i]);
      }
      for (std::size_t i = 0; i < u.final_rank_histogram.size(); ++i) {
        final[i] += static_cast<double>(u.final_rank_histogram[i]);
      }
    }
  }
  if (s.trials == 0) return s;
  s.phase2_mean = sum / static_cast<double>(s.trials);
  if (s.trials > 1) {
    double sq = 0.0;
    for (const auto& r : results) {
      const double d = static_cast<double>(r.phase2_total_tx) - s.phase2_mean;
      sq += d * d;
    }
    s.phase2_stddev = std::sqrt(sq / static_cast<double>(s.trials - 1));
  }
  auto normalize = [](std::vector<double>& v) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total > 0) {
      for (auto& x : v) x /= total;
    }
  };
  normalize(decode);
  normalize(final);
  s.decode_rank_freq = std::move(decode);
  s.final_rank_freq = std::move(final);
  return s;
}

analysis::AnalysisReport cmd_analyze(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  const auto report = analysis::analyze(cfg.network, cfg.curve);
  write_file(out / "analysis.json", record::to_json_string(report) + "\n");

  table::Table curve;
  curve.meta = provenance(cfg);
  curve.columns = {"transmissions[pkt]", "innovative[pkt]", "target[pkt]"};
  for (const auto& p : report.phase2.curve) {
    curve.add_row({format_count(p.transmissions), format_double(p.innovative),
                   format_double(report.phase2.target)});
  }
  write_table(out / "innovative_curve.csv", curve);

  table::Table ranks;
  ranks.meta = provenance(cfg);
  ranks.meta.emplace_back("transmissions", format_count(report.phase2.transmissions));
  ranks.columns = {"rank[pkt]", "probability[1]"};
  for (std::size_t r = 0; r < report.rank_dist.probs.size(); ++r) {
    ranks.add_row({format_count(r), format_double(report.rank_dist.probs[r])});
  }
  write_table(out / "rank_distribution.csv", ranks);
  return report;
}

SimulationSummary cmd_simulate(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  const auto dist = degree_distribution(cfg);
  const auto& net = cfg.network;
  fs::create_directories(out / "trials");

  auto trace_for = [&](std::size_t trial) -> protocol::TraceSink {
    if (trial >= cfg.trace_trials) return {};
    auto file = std::make_shared<std::ofstream>(out / "trials" / numbered("trace_", trial + 1, ".jsonl"),
                                                std::ios::binary);
    return [file](const protocol::TraceEvent& ev) { *file << record::trace_line(ev) << '\n'; };
  };
  const auto results = run_trials(net, dist, cfg.master_seed, cfg.trials, cfg.workers,
                                  sim_options(cfg, true), trace_for);

  table::Table trials;
  trials.meta = provenance(cfg);
  trials.columns = {"trial[1]", "seed[1]", "source_tx[pkt]", "phase2_tx[pkt]",
                    "all_decoded[bool]", "stalled[bool]", "order_restarts[1]"};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    write_file(out / "trials" / numbered("trial_", i + 1, ".json"),
               record::to_json_string(r) + "\n");
    trials.add_row({format_count(i + 1), std::to_string(r.master_seed),
                    format_count(r.source_tx), format_count(r.phase2_total_tx),
                    r.all_decoded ? "1" : "0", r.stalled ? "1" : "0",
                    format_count(r.order_restarts)});
  }
  write_table(out / "trials.csv", trials);

  for (const auto& u : results.front().users) {
    table::Table rx;
    rx.meta = provenance(cfg);
    rx.meta.emplace_back("trial", "1");
    rx.meta.emplace_back("user", std::to_string(u.user_id));
    rx.columns = {"transmissions[pkt]", "received[pkt]", "innovative[pkt]"};
    for (const auto& s : u.receipts) {
      rx.add_row({format_count(s.transmission), format_count(s.received),
                  format_count(s.innovative)});
    }
    write_table(out / ("receipts_user_" + std::to_string(u.user_id) + ".csv"), rx);
  }

  const auto summary = summarize(results, net.batch_size);
  std::vector<double> analytic;
  double tv = std::nan("");
  try {
    const std::size_t n = protocol::phase1_batch_count(net);
    const auto t = analysis::solve_phase2_transmissions(net, n);
    const auto rd = analysis::rank_distribution(net, n, t.transmissions);
    analytic = rd.probs;
    tv = rd.total_variation(summary.decode_rank_freq);
  } catch (const InfeasibleTarget&) {
    analytic.assign(net.batch_size + 1, std::nan(""));
  }

  table::Table hist;
  hist.meta = provenance(cfg);
  hist.columns = {"rank[pkt]", "decode_time[1]", "phase2_stop[1]", "analytic[1]"};
  for (std::size_t r = 0; r <= net.batch_size; ++r) {
    hist.add_row({format_count(r), format_double(summary.decode_rank_freq[r]),
                  format_double(summary.final_rank_freq[r]), format_double(analytic[r])});
  }
  write_table(out / "rank_histogram.csv", hist);

  std::ostringstream js;
  js << "{\n"
     << "  \"record\": \"simulation_summary\",\n"
     << "  \"config\": " << record::to_json_string(net, -1) << ",\n"
     << "  \"master_seed\": " << cfg.master_seed << ",\n"
     << "  \"trials\": " << summary.trials << ",\n"
     << "  \"decoded_trials\": " << summary.decoded_trials << ",\n"
     << "  \"stalled_trials\": " << summary.stalled_trials << ",\n"
     << "  \"phase2_mean\": " << format_double(summary.phase2_mean) << ",\n"
     << "  \"phase2_stddev\": " << format_double(summary.phase2_stddev) << ",\n"
     << "  \"decode_rank_tv\": " << (std::isnan(tv) ? "null" : format_double(tv)) << "\n"
     << "}\n";
  write_file(out / "summary.json", js.str());
  return summary;
}

std::vector<CompareRow> cmd_compare(const ExperimentConfig& cfg, std::size_t k_min,
                                    std::size_t k_max, const fs::path& out) {
  cfg.validate();
  if (k_min < 2 || k_max > 16 || k_min > k_max) {
    throw ConfigError("k", "k: compare range must satisfy 2 <= k_min <= k_max <= 16");
  }
  const auto dist = degree_distribution(cfg);
  std::vector<CompareRow> rows;
  table::Table t;
  t.meta = provenance(cfg);
  t.columns = {"k[1]",          "two_phase_source_tx[pkt]", "simulated_total_tx[pkt]",
               "single_phase_tx[pkt]", "source_savings[%]",  "total_savings[%]"};
  for (std::size_t k = k_min; k <= k_max; ++k) {
    auto net = cfg.network;
    net.users = k;
    const auto results = run_trials(net, dist, cfg.master_seed, cfg.trials, cfg.workers,
                                    sim_options(cfg, false));
    const auto s = summarize(results, net.batch_size);
    CompareRow row;
    row.users = k;
    row.two_phase_source_tx = protocol::phase1_batch_count(net) * net.batch_size;
    row.simulated_total_mean = static_cast<double>(row.two_phase_source_tx) + s.phase2_mean;
    row.single_phase_tx = analysis::single_phase_transmissions(net);
    const double n = static_cast<double>(row.single_phase_tx);
    t.add_row({format_count(k), format_count(row.two_phase_source_tx),
               format_double(row.simulated_total_mean), format_count(row.single_phase_tx),
               format_double(100.0 * (1.0 - static_cast<double>(row.two_phase_source_tx) / n)),
               format_double(100.0 * (1.0 - row.simulated_total_mean / n))});
    rows.push_back(row);
  }
  write_table(out / "compare.csv", t);
  return rows;
}

void cmd_sweep(const ExperimentConfig& cfg, const std::string& param,
               const std::vector<std::string>& values, const fs::path& out) {
  cfg.validate();
  static const std::set<std::string> kSweepable = {"k", "p1", "p2", "F", "M", "eta", "eps", "L"};
  if (!kSweepable.contains(param)) {
    throw ConfigError(param, param + ": not a sweepable parameter");
  }
  if (values.empty()) throw ConfigError(param, param + ": no sweep values");

  table::Table t;
  t.meta = provenance(cfg);
  t.meta.emplace_back("param", param);
  t.columns = {param,
               "batches[1]",
               "source_tx[pkt]",
               "analytic_phase2_tx[pkt]",
               "single_phase_tx[pkt]",
               "simulated_phase2_mean[pkt]",
               "simulated_phase2_stddev[pkt]",
               "decoded_trials[1]"};
  for (const auto& v : values) {
    auto c = cfg;
    set_key(c, param, v);
    c.validate();
    const auto& net = c.network;
    const std::size_t n = protocol::phase1_batch_count(net);
    std::string analytic = "infeasible";
    try {
      analytic = format_count(analysis::solve_phase2_transmissions(net, n).transmissions);
    } catch (const InfeasibleTarget&) {
    }
    const auto results = run_trials(net, degree_distribution(c), c.master_seed, c.trials,
                                    c.workers, sim_options(c, false));
    const auto s = summarize(results, net.batch_size);
    t.add_row({v, format_count(n), format_count(n * net.batch_size), analytic,
               format_count(analysis::single_phase_transmissions(net)),
               format_double(s.phase2_mean), format_double(s.phase2_stddev),
               format_count(s.decoded_trials)});
  }
  write_table(out / "sweep.csv", t);
}

}  // namespace tpbats::experiment
