#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tpbats/protocol.hpp"

// Closed-form models of the two-phase broadcast: Gaussian tail helpers, the
// Phase-2 transmission estimate, the rank law at the end of Phase 2 and the
// single-phase (source-only) baseline.
namespace tpbats::analysis {

/// Upper tail of the standard normal distribution.
double q_function(double x);
/// Inverse of q_function on (0, 1); negative for p > 0.5. Throws DomainError.
double q_inverse(double p);
double normal_cdf(double x);
/// Phi^-1(p) == -q_inverse(p). Throws DomainError outside (0, 1).
double normal_inv_cdf(double p);

double binomial_pmf(std::size_t trials, std::size_t successes, double p);

/// P(T): packets a user receives from its k-1 peers out of T transmissions.
double peer_receipts(double transmissions, const protocol::NetworkConfig& cfg);

/// Y1 ~ B(M, 1 - p1): Phase-1 packets of one batch at one user.
std::vector<double> dist_y1(const protocol::NetworkConfig& cfg);
/// [i][j] = Pr(Z = j | Y1 = i), Z the group's Phase-1 packets of a batch.
std::vector<std::vector<double>> dist_z_given_y1(const protocol::NetworkConfig& cfg);
/// Y2 ~ B(round(P(T)), 1/n): Phase-2 packets of one batch at one user.
std::vector<double> dist_y2(std::size_t transmissions, std::size_t batches,
                            const protocol::NetworkConfig& cfg);

/// R(T): expected redundant Phase-2 receipts over all batches.
double expected_redundancy(std::size_t transmissions, std::size_t batches,
                           const protocol::NetworkConfig& cfg);

/// (1 - p1) n M + P(T) - R(T).
double innovative_packets(std::size_t transmissions, std::size_t batches,
                          const protocol::NetworkConfig& cfg);

/// Limit of innovative_packets() as T grows: (1 - p1) n M + n E[Z - Y1].
double saturation_level(std::size_t batches, const protocol::NetworkConfig& cfg);

struct CurvePoint {
  std::size_t transmissions;
  double innovative;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct CurveOptions {
  std::size_t step = 0;  // 0: about 200 points
  std::size_t max = 0;   // 0: twice the solved T
};

struct TransmissionEstimate {
  std::size_t transmissions = 0;  // smallest T with curve(T) > target
  double target = 0;
  double saturation = 0;
  std::vector<CurvePoint> curve;
};

/// Smallest T with innovative_packets(T) > (1 + eta) F. Throws
/// InfeasibleTarget when the curve saturates at or below the target.
TransmissionEstimate solve_phase2_transmissions(const protocol::NetworkConfig& cfg,
                                                std::size_t batches,
                                                CurveOptions curve = {});

struct RankDistribution {
  std::vector<double> probs;  // index r = 0..M

  double mean() const;
  double total_variation(std::span<const double> other) const;
};

/// Rank of a batch at one user when Phase 2 ends after T transmissions.
RankDistribution rank_distribution(const protocol::NetworkConfig& cfg,
                                   std::size_t batches, std::size_t transmissions);

/// Source transmissions needed without peer repair.
std::size_t single_phase_transmissions(const protocol::NetworkConfig& cfg);

/// E[min_j X_j] ~ mu + sigma * Phi^-1(0.625 / (k + 0.25)) after N packets.
double expected_min_receipts(std::size_t transmissions,
                             const protocol::NetworkConfig& cfg);

struct AnalysisReport {
  protocol::NetworkConfig config;
  std::size_t n_batches = 0;
  std::size_t source_tx = 0;
  TransmissionEstimate phase2;
  RankDistribution rank_dist;
  std::size_t single_phase_tx = 0;
};

AnalysisReport analyze(const protocol::NetworkConfig& cfg, CurveOptions curve = {});

}  // namespace tpbats::analysis
