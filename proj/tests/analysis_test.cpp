#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "tpbats/analysis.hpp"
#include "tpbats/errors.hpp"

namespace an = tpbats::analysis;
namespace pr = tpbats::protocol;

namespace {

double simpson_q(double x) {
  const int steps = 20000;
  const double h = 40.0 / steps;
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = phi(x) + phi(x + 40.0);
  for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * phi(x + i * h);
  return s * h / 3.0;
}

double bisect_q_inverse(double p) {
  double lo = -10, hi = 10;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (simpson_q(mid) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

long double choose(unsigned n, unsigned k) {
  long double c = 1;
  for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

long double binom(unsigned n, unsigned k, long double p) {
  if (k > n) return 0;
  return choose(n, k) * std::pow(p, static_cast<long double>(k)) *
         std::pow(1 - p, static_cast<long double>(n - k));
}

// joint[i][d] = Pr(Y1 = i, Z - Y1 = d): each of the M packets independently
// reaches the user, misses it but reaches a peer, or reaches nobody.
std::vector<std::vector<long double>> joint_y1_gap(const pr::NetworkConfig& c) {
  const unsigned m = static_cast<unsigned>(c.batch_size);
  const long double p1 = c.source_erasure;
  const long double mine = 1 - p1;
  const long double none = std::pow(p1, static_cast<long double>(c.users));
  const long double peer = 1 - mine - none;
  std::vector<std::vector<long double>> j(m + 1, std::vector<long double>(m + 1, 0));
  for (unsigned i = 0; i <= m; ++i) {
    for (unsigned d = 0; i + d <= m; ++d) {
      j[i][d] = choose(m, i) * choose(m - i, d) * std::pow(mine, static_cast<long double>(i)) *
                std::pow(peer, static_cast<long double>(d)) *
                std::pow(none, static_cast<long double>(m - i - d));
    }
  }
  return j;
}

long double curve_oracle(const pr::NetworkConfig& c, std::size_t n, std::size_t t) {
  const auto j = joint_y1_gap(c);
  const long double k = static_cast<long double>(c.users);
  const long double p = (1 - static_cast<long double>(c.peer_erasure)) * (k - 1) * t / k;
  long double r = 0;
  for (std::size_t i = 0; i < j.size(); ++i)
    for (std::size_t d = 0; d < j[i].size(); ++d) r += std::max<long double>(0, p / n - d) * j[i][d];
  return (1 - static_cast<long double>(c.source_erasure)) * n * c.batch_size + p - n * r;
}

std::size_t solve_oracle(const pr::NetworkConfig& c, std::size_t n) {
  const long double target = (1 + static_cast<long double>(c.overhead)) * c.file_packets;
  std::size_t t = 0;
  while (curve_oracle(c, n, t) <= target) ++t;
  return t;
}

std::vector<double> rank_oracle(const pr::NetworkConfig& c, std::size_t n, std::size_t t) {
  const auto j = joint_y1_gap(c);
  const double k = static_cast<double>(c.users);
  const auto trials = static_cast<unsigned>(std::llround((1 - c.peer_erasure) * (k - 1) * t / k));
  std::vector<double> out(c.batch_size + 1, 0);
  for (unsigned i = 0; i < j.size(); ++i) {
    for (unsigned d = 0; i + d < j.size(); ++d) {
      for (unsigned y2 = 0; y2 <= trials; ++y2) {
        const auto pr2 = binom(trials, y2, 1.0L / n);
        if (pr2 < 1e-30L && y2 > d) break;
        out[i + std::min(d, y2)] += static_cast<double>(j[i][d] * pr2);
      }
    }
  }
  return out;
}

pr::NetworkConfig full_config() { return {}; }

}  // namespace

TEST(QFunction, SymmetryAndOracle) {
  EXPECT_DOUBLE_EQ(an::q_function(0), 0.5);
  for (double x = -6; x <= 6; x += 0.37) {
    EXPECT_NEAR(an::q_function(x) + an::q_function(-x), 1.0, 1e-15);
    EXPECT_NEAR(an::q_function(x), simpson_q(x), 1e-10) << x;
  }
  EXPECT_NEAR(an::q_function(1.2815515655446004), 0.1, 1e-6);
  EXPECT_NEAR(an::normal_cdf(1.0) + an::q_function(1.0), 1.0, 1e-15);
}

TEST(QInverse, RoundTripAndOracle) {
  EXPECT_NEAR(an::q_inverse(0.5), 0.0, 1e-12);
  for (double x = -5; x <= 7; x += 0.25) {
    EXPECT_NEAR(an::q_inverse(an::q_function(x)), x, 1e-8) << x;
  }
  const double alpha = an::q_inverse(1 - 1e-6);
  EXPECT_NEAR(alpha, bisect_q_inverse(1 - 1e-6), 1e-7);
  EXPECT_NEAR(alpha, -4.7534, 1e-4);
  EXPECT_THROW(an::q_inverse(0.0), tpbats::DomainError);
  EXPECT_THROW(an::q_inverse(1.0), tpbats::DomainError);
}

TEST(NormalInverse, RelationAndOracle) {
  EXPECT_NEAR(an::normal_inv_cdf(0.5), 0.0, 1e-12);
  for (double p = 0.01; p < 1; p += 0.07) {
    EXPECT_NEAR(an::normal_inv_cdf(p), -an::q_inverse(p), 1e-12);
  }
  EXPECT_NEAR(an::normal_inv_cdf(0.625 / 3.25), -bisect_q_inverse(0.625 / 3.25), 1e-7);
  EXPECT_NEAR(an::normal_inv_cdf(0.625 / 3.25), -0.8694, 1e-4);
  EXPECT_THROW(an::normal_inv_cdf(1.5), tpbats::DomainError);
}

TEST(Binomial, MatchesExactProducts) {
  for (unsigned n : {0u, 1u, 5u, 16u, 40u}) {
    for (unsigned k = 0; k <= n + 1; ++k) {
      for (double p : {0.0, 0.1, 0.5, 0.93, 1.0}) {
        EXPECT_NEAR(an::binomial_pmf(n, k, p), static_cast<double>(binom(n, k, p)), 1e-12);
      }
    }
  }
  double sum = 0;
  for (std::size_t k = 0; k <= 3000; ++k) sum += an::binomial_pmf(3000, k, 1.0 / 162);
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(PeerReceipts, Linear) {
  const auto c = full_config();
  EXPECT_EQ(an::peer_receipts(0, c), 0.0);
  EXPECT_NEAR(an::peer_receipts(1800, c), 1080.0, 1e-9);
  EXPECT_NEAR(an::peer_receipts(900, c) * 2, an::peer_receipts(1800, c), 1e-9);
}

TEST(Distributions, EnumerationOracleAndNormalization) {
  pr::NetworkConfig c;
  c.batch_size = 2;
  c.users = 2;
  c.source_erasure = 0.5;
  // Enumerate the 2-user erasure patterns of two packets directly.
  std::vector<std::vector<double>> want(3, std::vector<double>(3, 0));
  std::vector<double> y1(3, 0);
  for (int mask = 0; mask < 16; ++mask) {
    const int mine = (mask & 1) + ((mask >> 1) & 1);
    const int peer_only = (!(mask & 1) && (mask & 4)) + (!(mask & 2) && (mask & 8));
    want[mine][mine + peer_only] += 1.0 / 16;
    y1[mine] += 1.0 / 16;
  }
  const auto z = an::dist_z_given_y1(c);
  const auto y = an::dist_y1(c);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(y[i], y1[i], 1e-15);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(z[i][j], want[i][j] / y1[i], 1e-15);
  }
  EXPECT_NEAR(z[1][2], 0.5, 1e-15);
  EXPECT_NEAR(z[1][1], 0.5, 1e-15);

  const auto f = full_config();
  const auto zf = an::dist_z_given_y1(f);
  const auto yf = an::dist_y1(f);
  double total = 0;
  for (std::size_t i = 0; i < yf.size(); ++i)
    for (std::size_t j = 0; j < yf.size(); ++j) total += zf[i][j] * yf[i];
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Distributions, TotalLossIsDegenerate) {
  pr::NetworkConfig c;
  c.source_erasure = 1.0 - 1e-15;
  EXPECT_NEAR(an::dist_y1(c)[0], 1.0, 1e-12);
  EXPECT_NEAR(an::dist_z_given_y1(c)[0][0], 1.0, 1e-12);
  const auto r = an::rank_distribution(c, 10, 100);
  EXPECT_NEAR(r.probs[0], 1.0, 1e-9);
}

TEST(Redundancy, BoundaryAndAsymptote) {
  const auto c = full_config();
  EXPECT_EQ(an::expected_redundancy(0, 162, c), 0.0);
  const std::size_t big = 2000000;
  const double gap = an::saturation_level(162, c) - (1 - c.source_erasure) * 162 * 16;
  EXPECT_NEAR(an::expected_redundancy(big, 162, c) - an::peer_receipts(big, c), -gap, 1e-6);
}

TEST(Redundancy, SmallInstanceMatchesEnumeration) {
  pr::NetworkConfig c;
  c.batch_size = 2;
  c.users = 2;
  c.source_erasure = 0.5;
  c.peer_erasure = 0.1;
  const std::size_t n = 2, t = 8;
  const double per_batch = 0.9 * 0.5 * t / n;
  double want = 0;
  for (int mask = 0; mask < 16; ++mask) {
    const int peer_only = (!(mask & 1) && (mask & 4)) + (!(mask & 2) && (mask & 8));
    want += std::max(0.0, per_batch - peer_only) / 16;
  }
  EXPECT_NEAR(an::expected_redundancy(t, n, c), n * want, 1e-12);
}

TEST(SolveTransmissions, ReferenceSetup) {
  const auto c = full_config();
  const auto est = an::solve_phase2_transmissions(c, 162);
  EXPECT_NEAR(static_cast<double>(est.transmissions), 1800.0, 1.0);
  EXPECT_EQ(est.transmissions, solve_oracle(c, 162));
  EXPECT_GT(an::innovative_packets(est.transmissions, 162, c), est.target);
  EXPECT_LE(an::innovative_packets(est.transmissions - 1, 162, c), est.target);
  ASSERT_GT(est.curve.size(), 100u);
  for (std::size_t i = 1; i < est.curve.size(); ++i) {
    EXPECT_GE(est.curve[i].innovative, est.curve[i - 1].innovative - 1e-9);
  }
  const double sat = an::saturation_level(162, c);
  EXPECT_LT(an::innovative_packets(20000, 162, c), sat);
  EXPECT_NEAR(an::innovative_packets(200000, 162, c), sat, 1e-6 * sat);
}

TEST(SolveTransmissions, OtherOverheadsMatchOracle) {
  for (double eta : {0.01, 0.02, 0.03, 0.08}) {
    auto c = full_config();
    c.overhead = eta;
    EXPECT_EQ(an::solve_phase2_transmissions(c, 162).transmissions, solve_oracle(c, 162)) << eta;
  }
  pr::NetworkConfig small;
  small.file_packets = 260;
  small.batch_size = 8;
  small.overhead = 0.08;
  EXPECT_EQ(an::solve_phase2_transmissions(small, 45).transmissions, solve_oracle(small, 45));
}

TEST(SolveTransmissions, ZeroWhenPhaseOneSuffices) {
  auto c = full_config();
  // Target 1295 sits just below the T = 0 value of 1296 packets.
  c.file_packets = 1000;
  c.overhead = 0.295;
  EXPECT_EQ(an::solve_phase2_transmissions(c, 162).transmissions, 0u);
}

TEST(SolveTransmissions, InfeasibleTargetNamesSaturation) {
  auto c = full_config();
  c.overhead = 0.5;
  try {
    an::solve_phase2_transmissions(c, 162);
    FAIL() << "expected InfeasibleTarget";
  } catch (const tpbats::InfeasibleTarget& e) {
    EXPECT_NEAR(e.saturation(), an::saturation_level(162, c), 1e-9);
    EXPECT_NEAR(e.target(), 1.5 * 2083, 1e-9);
    EXPECT_NE(std::string(e.what()).find("saturate"), std::string::npos);
  }
}

TEST(RankDistribution, SumsToOneForRandomInputs) {
  tpbats::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    pr::NetworkConfig c;
    c.users = 2 + tpbats::uniform_below(rng, 8);
    c.batch_size = 1 + tpbats::uniform_below(rng, 32);
    c.source_erasure = 0.05 + 0.9 * tpbats::uniform01(rng);
    c.peer_erasure = c.source_erasure * tpbats::uniform01(rng);
    const std::size_t n = 1 + tpbats::uniform_below(rng, 300);
    const std::size_t t = tpbats::uniform_below(rng, 5000);
    const auto r = an::rank_distribution(c, n, t);
    ASSERT_EQ(r.probs.size(), c.batch_size + 1);
    double sum = 0;
    for (double p : r.probs) {
      ASSERT_GE(p, 0.0);
      sum += p;
    }
    ASSERT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(RankDistribution, MatchesEnumerationOracle) {
  const auto c = full_config();
  const auto r = an::rank_distribution(c, 162, 1800);
  const auto want = rank_oracle(c, 162, 1800);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(r.probs[i], want[i], 1e-10) << i;
  EXPECT_NEAR(r.total_variation(want), 0.0, 1e-9);

  pr::NetworkConfig small;
  small.file_packets = 260;
  small.batch_size = 8;
  small.overhead = 0.08;
  const auto rs = an::rank_distribution(small, 45, 198);
  const auto ws = rank_oracle(small, 45, 198);
  for (std::size_t i = 0; i < ws.size(); ++i) EXPECT_NEAR(rs.probs[i], ws[i], 1e-10) << i;
}

TEST(RankDistribution, TotalVariationAndMean) {
  an::RankDistribution a{{0.5, 0.5}};
  const std::vector<double> b{0.25, 0.25, 0.5};
  EXPECT_DOUBLE_EQ(a.total_variation(b), 0.5);
  EXPECT_DOUBLE_EQ(a.mean(), 0.5);
}

TEST(SinglePhase, ReferenceValueAndSearchOracle) {
  for (std::size_t k = 2; k <= 10; ++k) {
    auto c = full_config();
    c.users = k;
    const auto n = an::single_phase_transmissions(c);
    // Smallest N with E[min] >= F' under the order-statistics approximation.
    const double beta = -bisect_q_inverse(0.625 / (static_cast<double>(k) + 0.25));
    std::size_t search = 1;
    while (search * 0.5 + std::sqrt(search * 0.25) * beta < c.target_packets()) ++search;
    EXPECT_EQ(n, search) << k;
    EXPECT_GE(an::expected_min_receipts(n, c), c.target_packets());
  }
  EXPECT_EQ(an::single_phase_transmissions(full_config()), 4433u);
  EXPECT_GT(1.0 - 2592.0 / 4433.0, 0.40);
}

TEST(SinglePhase, GrowsWithGroupSize) {
  std::size_t last = 0;
  for (std::size_t k = 2; k <= 16; ++k) {
    auto c = full_config();
    c.users = k;
    const auto n = an::single_phase_transmissions(c);
    EXPECT_GE(n, last);
    last = n;
  }
}

TEST(Analyze, ReferenceReport) {
  const auto r = an::analyze(full_config());
  EXPECT_EQ(r.n_batches, 162u);
  EXPECT_EQ(r.source_tx, 2592u);
  EXPECT_EQ(r.phase2.transmissions, 1800u);
  EXPECT_EQ(r.single_phase_tx, 4433u);
  EXPECT_NEAR(std::accumulate(r.rank_dist.probs.begin(), r.rank_dist.probs.end(), 0.0), 1.0, 1e-9);
}
