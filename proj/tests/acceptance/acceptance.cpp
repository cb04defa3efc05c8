// Acceptance suite: one [PASS]/[FAIL] line per criterion, exit code 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "tpbats/analysis.hpp"
#include "tpbats/decoder.hpp"
#include "tpbats/encoder.hpp"
#include "tpbats/experiment.hpp"
#include "tpbats/galois.hpp"
#include "tpbats/protocol.hpp"
#include "tpbats/record.hpp"

namespace an = tpbats::analysis;
namespace bats = tpbats::bats;
namespace ex = tpbats::experiment;
namespace gf = tpbats::gf;
namespace pr = tpbats::protocol;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

pr::NetworkConfig reference() { return {}; }

pr::NetworkConfig desk() {
  pr::NetworkConfig c;
  c.file_packets = 260;
  c.batch_size = 8;
  c.overhead = 0.08;
  return c;
}

Outcome batch_count() {
  const auto n = pr::phase1_batch_count(reference());
  const auto tx = n * reference().batch_size;
  return {n == 162 && tx == 2592, fmt("n=%zu source_tx=%zu (want 162, 2592)", n, tx)};
}

Outcome example_matrix() {
  const double want[4][5] = {{0.7500, 0.5000, 0.8750, 0.9375, 0.7500},
                             {0.3000, 0.0500, 0.5375, 0.7125, 0.3000},
                             {0.0525, 0.0050, 0.2000, 0.3862, 0.0525},
                             {0.0075, 0.0005, 0.0448, 0.1410, 0.0075}};
  pr::NetworkConfig c;
  c.batch_size = 4;
  const std::vector<std::size_t> receipts{2, 1, 3, 4, 2};
  const auto s = pr::usefulness_matrix(receipts, c);
  double worst = 0;
  for (std::size_t u = 0; u < 4; ++u)
    for (std::size_t b = 0; b < 5; ++b) worst = std::max(worst, std::abs(s.at(u, b) - want[u][b]));
  const auto order = pr::transmission_order(s).batch_ids;
  const bool head = std::vector<std::uint32_t>(order.begin(), order.begin() + 6) ==
                    std::vector<std::uint32_t>{4, 3, 1, 5, 4, 3};
  return {worst <= 5e-5 + 1e-12 && head,
          fmt("max |entry - expected| = %.2e, order head %s", worst, head ? "[4 3 1 5 4 3]" : "differs")};
}

Outcome phase2_estimate() {
  const auto c = reference();
  const auto est = an::solve_phase2_transmissions(c, 162);
  bool monotone = true;
  for (std::size_t i = 1; i < est.curve.size(); ++i) {
    monotone &= est.curve[i].innovative >= est.curve[i - 1].innovative - 1e-9;
  }
  const double sat = an::saturation_level(162, c);
  const double late = an::innovative_packets(100000, 162, c);
  const bool saturating = late <= sat && sat - late < 1e-3 * sat;
  const bool in_range = est.transmissions + 1 >= 1800 && est.transmissions <= 1801;
  return {in_range && monotone && saturating,
          fmt("T=%zu (want 1800 +- 1), curve %s, value at T=1e5 %.1f vs saturation %.1f",
              est.transmissions, monotone ? "non-decreasing" : "NOT monotone", late, sat)};
}

// Pooled histograms over users and seeds at the desk-scale setup.
Outcome rank_law(std::vector<std::string>& notes) {
  const auto c = desk();
  const std::size_t seeds = 200;
  const auto results = ex::run_trials(c, bats::DegreeDistribution::dense(c.file_packets), 2024,
                                      seeds, 1, {});
  const auto s = ex::summarize(results, c.batch_size);
  const std::size_t n = pr::phase1_batch_count(c);
  const auto t = an::solve_phase2_transmissions(c, n).transmissions;
  const auto law = an::rank_distribution(c, n, t);
  const double tv = law.total_variation(s.decode_rank_freq);
  const double tv_stop = law.total_variation(s.final_rank_freq);
  double decode_tx = 0;
  std::size_t decoded = 0;
  for (const auto& r : results) {
    for (const auto& u : r.users) {
      if (u.decode_tx_index) {
        decode_tx += static_cast<double>(*u.decode_tx_index);
        ++decoded;
      }
    }
  }
  notes.push_back(fmt("AC4 detail: analytic T=%zu, mean Phase-2 stop %.1f, mean per-user decode "
                      "point %.1f, mean rank analytic %.3f / decode-time %.3f",
                      t, s.phase2_mean, decode_tx / static_cast<double>(decoded), law.mean(),
                      [&] {
                        double m = 0;
                        for (std::size_t r = 0; r < s.decode_rank_freq.size(); ++r)
                          m += static_cast<double>(r) * s.decode_rank_freq[r];
                        return m;
                      }()));
  notes.push_back(fmt("AC4 detail: TV against the histogram at the global Phase-2 stop = %.4f",
                      tv_stop));
  return {tv < 0.05 && s.decoded_trials == seeds,
          fmt("TV(analytic, decode-time histogram) = %.4f over %zu seeds x %zu users (want < 0.05)",
              tv, seeds, c.users)};
}

Outcome phase2_count() {
  const auto c = reference();
  const std::size_t seeds = 50;
  const auto results = ex::run_trials(c, bats::DegreeDistribution::dense(c.file_packets), 2024,
                                      seeds, 1, {});
  const auto s = ex::summarize(results, c.batch_size);
  const bool ok = std::abs(s.phase2_mean - 1619.0) <= 0.15 * 1619.0 && s.decoded_trials == seeds;
  return {ok, fmt("mean Phase-2 stop %.1f (sd %.1f) over %zu seeds, all decoded %s (want 1619 +- 15%%)",
                  s.phase2_mean, s.phase2_stddev, seeds, s.decoded_trials == seeds ? "yes" : "no")};
}

Outcome single_phase() {
  const auto n = an::single_phase_transmissions(reference());
  const double saving = 1.0 - 2592.0 / static_cast<double>(n);
  return {n == 4433 && saving > 0.40, fmt("N=%zu (want 4433), source savings %.1f%% (want > 40%%)",
                                          n, 100 * saving)};
}

Outcome group_trend() {
  std::size_t last_nm = SIZE_MAX, last_n = 0;
  bool ok = true;
  std::string rows;
  for (std::size_t k = 3; k <= 10; ++k) {
    auto c = reference();
    c.users = k;
    const auto nm = pr::phase1_batch_count(c) * c.batch_size;
    const auto n = an::single_phase_transmissions(c);
    ok &= nm <= last_nm && n >= last_n && nm < n;
    last_nm = nm;
    last_n = n;
    rows += fmt(" k=%zu:%zu/%zu", k, nm, n);
  }
  return {ok, "nM/N" + rows};
}

Outcome codec_suite() {
  // Field axioms, exhaustively.
  bool axioms = true;
  for (unsigned a = 0; a < 256 && axioms; ++a) {
    const auto x = static_cast<std::uint8_t>(a);
    axioms &= (x ^ x) == 0 && gf::mul(x, std::uint8_t{1}) == x;
    if (x) axioms &= gf::mul(x, gf::inv(x)) == 1;
    for (unsigned b = 0; b < 256; ++b) {
      const auto y = static_cast<std::uint8_t>(b);
      axioms &= gf::mul(x, y) == gf::mul(y, x);
      for (unsigned cc = 0; cc < 256; ++cc) {
        const auto z = static_cast<std::uint8_t>(cc);
        axioms &= gf::mul(gf::mul(x, y), z) == gf::mul(x, gf::mul(y, z)) &&
                  gf::mul(x, y ^ z) == (gf::mul(x, y) ^ gf::mul(x, z));
      }
    }
  }

  // Source -> erasure -> recoding relay -> erasure -> sink.
  const std::size_t f = 64, m = 8, l = 16;
  const double eta = 0.1, p = 0.2;
  const auto target = static_cast<std::size_t>(std::ceil((1 + eta) * static_cast<double>(f)));
  const auto dist = bats::DegreeDistribution::dense(f);
  int ok = 0;
  bool ignored = true;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    tpbats::Rng rng(tpbats::derive_seed(88, tpbats::StreamKind::trial, static_cast<std::uint32_t>(t)));
    const auto file = bats::SourceFile::random(f, l, rng);
    bats::Decoder sink(f, m, l);
    std::map<std::uint32_t, std::vector<bats::Packet>> relayed;
    for (std::uint32_t id = 1; sink.total_rank() < target && id < 1000; ++id) {
      const auto b = bats::encode_batch(file, dist, id, m, rng);
      sink.add_batch(b.header);
      auto& relay = relayed[id];
      for (const auto& pk : b.packets) {
        if (!tpbats::bernoulli(rng, p)) relay.push_back(pk);
      }
      if (relay.empty()) continue;
      for (std::size_t j = 0; j < m && sink.total_rank() < target; ++j) {
        const auto out = bats::recode(relay, rng);
        if (!tpbats::bernoulli(rng, p)) sink.ingest(out);
      }
    }
    sink.decode();
    bool same = sink.complete();
    for (std::size_t s = 0; same && s < f; ++s) {
      const auto got = sink.recovered(s);
      same = std::equal(got.begin(), got.end(), file.packet(s).begin(), file.packet(s).end());
    }
    ok += same;

    // Replay redundant packets: the state must not move.
    const auto hash = sink.state_hash();
    for (auto& [id, held] : relayed) {
      if (held.empty() || sink.rank(id) < std::min(held.size(), m)) continue;
      const auto basis = sink.basis(id);
      ignored &= !sink.ingest(bats::recode(std::vector<bats::Packet>(basis.begin(), basis.end()), rng));
    }
    sink.decode();
    ignored &= sink.state_hash() == hash;
  }
  const bool pass = axioms && ok >= 190 && ignored;
  return {pass, fmt("field axioms %s, round trips %d/%d byte-identical (want >= 190), "
                    "redundant packets ignored %s",
                    axioms ? "hold" : "FAIL", ok, trials, ignored ? "yes" : "no")};
}

Outcome protocol_invariants() {
  const auto c = desk();
  const auto dist = bats::DegreeDistribution::dense(c.file_packets);
  bool rank_ok = true, order_ok = true, same = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto p1 = pr::run_phase1(c, dist, seed);
    for (const auto& u : p1.users) {
      const auto order = pr::transmission_order(pr::usefulness_matrix(u.phase1_receipts, c));
      std::map<std::uint32_t, std::size_t> count;
      for (auto id : order.batch_ids) ++count[id];
      order_ok &= count.size() == p1.batches.size();
      for (const auto& [id, k] : count) order_ok &= k == c.batch_size;
    }
    const auto z = p1.group_receipts;
    const auto r = pr::run_phase2(p1, c, seed);
    for (const auto& u : p1.users) {
      for (std::size_t b = 0; b < z.size(); ++b) {
        rank_ok &= u.decoder.rank(static_cast<std::uint32_t>(b + 1)) <= std::min(c.batch_size, z[b]);
      }
    }
    const auto again = pr::run_protocol(c, dist, seed);
    same &= tpbats::record::to_json_string(r) == tpbats::record::to_json_string(again);
  }
  return {rank_ok && order_ok && same,
          fmt("rank <= min(M, Z) %s, order multiplicities %s, identical reruns %s (20 seeds)",
              rank_ok ? "hold" : "VIOLATED", order_ok ? "exact" : "WRONG", same ? "yes" : "NO")};
}

}  // namespace

int main() {
  std::vector<std::string> notes;
  const std::vector<Criterion> criteria = {
      {"AC1", "Phase-1 batch count", 0.001, batch_count},
      {"AC2", "usefulness matrix example", 0.001, example_matrix},
      {"AC3", "Phase-2 transmission estimate", 1.0, phase2_estimate},
      {"AC4", "rank law vs simulation", 120.0, [&] { return rank_law(notes); }},
      {"AC5", "Phase-2 transmissions, full setup", 600.0, phase2_count},
      {"AC6", "single-phase baseline", 0.001, single_phase},
      {"AC7", "trend over group size", 1.0, group_trend},
      {"AC8", "codec properties", 60.0, codec_suite},
      {"AC9", "protocol invariants", 60.0, protocol_invariants},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("[%s] %s %s: %s [%.3f s, budget %g s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), s, c.budget_s, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  for (const auto& n : notes) std::printf("  %s\n", n.c_str());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed ? 1 : 0;
}
