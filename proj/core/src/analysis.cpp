#include "tpbats/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tpbats/errors.hpp"

namespace tpbats::analysis {
namespace {

double require_probability(double p, const char* where) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string(where) + ": probability must lie in (0, 1)");
  }
  return p;
}

double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1);
}

}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double q_inverse(double p) {
  require_probability(p, "q_inverse");
  // q_function is strictly decreasing; bisection to double resolution.
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (q_function(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double normal_inv_cdf(double p) {
  require_probability(p, "normal_inv_cdf");
  return -q_inverse(p);
}

double binomial_pmf(std::size_t trials, std::size_t successes, double p) {
  if (successes > trials) return 0.0;
  if (p <= 0.0) return successes == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return successes == trials ? 1.0 : 0.0;
  const double s = static_cast<double>(successes);
  const double f = static_cast<double>(trials - successes);
  return std::exp(log_choose(trials, successes) + s * std::log(p) + f * std::log1p(-p));
}

double peer_receipts(double transmissions, const protocol::NetworkConfig& cfg) {
  const double k = static_cast<double>(cfg.users);
  return (1.0 - cfg.peer_erasure) * (k - 1.0) * transmissions / k;
}

std::vector<double> dist_y1(const protocol::NetworkConfig& cfg) {
  std::vector<double> out(cfg.batch_size + 1);
  for (std::size_t i = 0; i <= cfg.batch_size; ++i) {
    out[i] = binomial_pmf(cfg.batch_size, i, 1.0 - cfg.source_erasure);
  }
  return out;
}

std::vector<std::vector<double>> dist_z_given_y1(const protocol::NetworkConfig& cfg) {
  const std::size_t m = cfg.batch_size;
  const double missed_by_peers =
      std::pow(cfg.source_erasure, static_cast<double>(cfg.users) - 1.0);
  std::vector<std::vector<double>> out(m + 1, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = i; j <= m; ++j) {
      out[i][j] = binomial_pmf(m - i, j - i, 1.0 - missed_by_peers);
    }
  }
  return out;
}

std::vector<double> dist_y2(std::size_t transmissions, std::size_t batches,
                            const protocol::NetworkConfig& cfg) {
  if (batches == 0) throw DomainError("dist_y2: no batches");
  const auto trials = static_cast<std::size_t>(
      std::llround(peer_receipts(static_cast<double>(transmissions), cfg)));
  const double p = 1.0 / static_cast<double>(batches);
  std::vector<double> out(trials + 1);
  for (std::size_t x = 0; x <= trials; ++x) out[x] = binomial_pmf(trials, x, p);
  return out;
}

double expected_redundancy(std::size_t transmissions, std::size_t batches,
                           const protocol::NetworkConfig& cfg) {
  if (batches == 0) throw DomainError("expected_redundancy: no batches");
  const double per_batch =
      peer_receipts(static_cast<double>(transmissions), cfg) / static_cast<double>(batches);
  const auto y1 = dist_y1(cfg);
  const auto z = dist_z_given_y1(cfg);
  double sum = 0.0;
  for (std::size_t i = 0; i <= cfg.batch_size; ++i) {
    for (std::size_t j = i; j <= cfg.batch_size; ++j) {
      const double excess = per_batch - static_cast<double>(j - i);
      if (excess > 0.0) sum += excess * z[i][j] * y1[i];
    }
  }
  return static_cast<double>(batches) * sum;
}

double innovative_packets(std::size_t transmissions, std::size_t batches,
                          const protocol::NetworkConfig& cfg) {
  const double phase1 = (1.0 - cfg.source_erasure) * static_cast<double>(batches) *
                        static_cast<double>(cfg.batch_size);
  return phase1 + peer_receipts(static_cast<double>(transmissions), cfg) -
         expected_redundancy(transmissions, batches, cfg);
}

double saturation_level(std::size_t batches, const protocol::NetworkConfig& cfg) {
  const auto y1 = dist_y1(cfg);
  const auto z = dist_z_given_y1(cfg);
  double gap = 0.0;
  for (std::size_t i = 0; i <= cfg.batch_size; ++i) {
    for (std::size_t j = i; j <= cfg.batch_size; ++j) {
      gap += static_cast<double>(j - i) * z[i][j] * y1[i];
    }
  }
  const double n = static_cast<double>(batches);
  return (1.0 - cfg.source_erasure) * n * static_cast<double>(cfg.batch_size) + n * gap;
}

TransmissionEstimate solve_phase2_transmissions(const protocol::NetworkConfig& cfg,
                                                std::size_t batches,
                                                CurveOptions curve) {
  cfg.validate(1);
  if (batches == 0) throw DomainError("solve_phase2_transmissions: no batches");
  TransmissionEstimate est;
  est.target = cfg.target_packets();
  est.saturation = saturation_level(batches, cfg);
  if (est.saturation <= est.target) {
    throw InfeasibleTarget(est.saturation, est.target,
                           "innovative packets saturate at " +
                               std::to_string(est.saturation) + " <= target " +
                               std::to_string(est.target));
  }
  auto above = [&](std::size_t t) {
    return innovative_packets(t, batches, cfg) > est.target;
  };
  // The curve is nondecreasing in T: bracket, then bisect.
  std::size_t lo = 0;
  std::size_t hi = 1;
  if (above(0)) {
    hi = 0;
  } else {
    while (!above(hi)) {
      lo = hi;
      if (hi > std::numeric_limits<std::size_t>::max() / 4) {
        throw InfeasibleTarget(est.saturation, est.target,
                               "innovative packets do not reach the target");
      }
      hi *= 2;
    }
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (above(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  est.transmissions = hi;

  const std::size_t max = curve.max ? curve.max : std::max<std::size_t>(1, 2 * hi);
  const std::size_t step = curve.step ? curve.step : std::max<std::size_t>(1, max / 200);
  for (std::size_t t = 0; t <= max; t += step) {
    est.curve.push_back({t, innovative_packets(t, batches, cfg)});
  }
  return est;
}

double RankDistribution::mean() const {
  double m = 0.0;
  for (std::size_t r = 0; r < probs.size(); ++r) m += static_cast<double>(r) * probs[r];
  return m;
}

double RankDistribution::total_variation(std::span<const double> other) const {
  const std::size_t n = std::max(probs.size(), other.size());
  double sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double a = r < probs.size() ? probs[r] : 0.0;
    const double b = r < other.size() ? other[r] : 0.0;
    sum += std::abs(a - b);
  }
  return 0.5 * sum;
}

RankDistribution rank_distribution(const protocol::NetworkConfig& cfg,
                                   std::size_t batches, std::size_t transmissions) {
  const std::size_t m = cfg.batch_size;
  const auto y1 = dist_y1(cfg);
  const auto z = dist_z_given_y1(cfg);
  const auto y2 = dist_y2(transmissions, batches, cfg);
  auto y2_at = [&](std::size_t x) { return x < y2.size() ? y2[x] : 0.0; };
  // tail[x] = Pr(Y2 >= x)
  std::vector<double> tail(y2.size() + 1, 0.0);
  for (std::size_t x = y2.size(); x-- > 0;) tail[x] = tail[x + 1] + y2[x];
  auto tail_at = [&](std::size_t x) { return x < tail.size() ? tail[x] : 0.0; };

  // rank = min(Z, Y1 + Y2)
  RankDistribution out;
  out.probs.assign(m + 1, 0.0);
  for (std::size_t r = 0; r <= m; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i <= r; ++i) {
      double z_above = 0.0;
      for (std::size_t j = r + 1; j <= m; ++j) z_above += z[i][j];
      s += y1[i] * (z_above * y2_at(r - i) + z[i][r] * tail_at(r - i));
    }
    out.probs[r] = s;
  }
  return out;
}

std::size_t single_phase_transmissions(const protocol::NetworkConfig& cfg) {
  cfg.validate(1);
  const double f = cfg.target_packets();
  const double p = cfg.source_erasure;
  const double b = normal_inv_cdf(0.625 / (static_cast<double>(cfg.users) + 0.25));
  const double b2 = b * b;
  const double n =
      (2.0 * f + p * b2 + std::sqrt(4.0 * p * b2 * f + p * b2 * b2)) / (2.0 * (1.0 - p));
  return static_cast<std::size_t>(std::ceil(n));
}

double expected_min_receipts(std::size_t transmissions,
                             const protocol::NetworkConfig& cfg) {
  const double n = static_cast<double>(transmissions);
  const double p = cfg.source_erasure;
  const double b = normal_inv_cdf(0.625 / (static_cast<double>(cfg.users) + 0.25));
  return n * (1.0 - p) + std::sqrt(n * p * (1.0 - p)) * b;
}

AnalysisReport analyze(const protocol::NetworkConfig& cfg, CurveOptions curve) {
  cfg.validate();
  AnalysisReport r;
  r.config = cfg;
  r.n_batches = protocol::phase1_batch_count(cfg);
  r.source_tx = r.n_batches * cfg.batch_size;
  r.phase2 = solve_phase2_transmissions(cfg, r.n_batches, curve);
  r.rank_dist = rank_distribution(cfg, r.n_batches, r.phase2.transmissions);
  r.single_phase_tx = single_phase_transmissions(cfg);
  return r;
}

}  // namespace tpbats::analysis
