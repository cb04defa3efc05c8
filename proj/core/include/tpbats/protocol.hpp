#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tpbats/decoder.hpp"
#include "tpbats/degree_distribution.hpp"
#include "tpbats/encoder.hpp"

namespace tpbats::protocol {

/// System and code parameters shared by the simulator and the analysis.
struct NetworkConfig {
  std::size_t users = 3;             // k
  double source_erasure = 0.5;       // p1, source -> user
  double peer_erasure = 0.1;         // p2, user -> user
  std::size_t file_packets = 2083;   // F
  std::size_t batch_size = 16;       // M
  double overhead = 0.05;            // eta
  double failure_prob = 1e-6;        // eps
  std::size_t packet_length = 16;    // L, bytes

  /// Throws ConfigError naming the first violated field. `min_users` is 2
  /// for the protocol (Phase 2 needs peers); analytic helpers accept 1.
  void validate(std::size_t min_users = 2) const;

  /// (1 + eta) F.
  double target_packets() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Number of batches the source sends so the group holds (1+eta)F packets
/// with probability at least 1 - eps (normal approximation).
std::size_t phase1_batch_count(const NetworkConfig& cfg);

/// Probability that the (u+1)-th packet a user sends for a batch it holds
/// `received` Phase-1 packets of is innovative for one peer.
double usefulness_entry(std::size_t received, std::size_t u,
                        const NetworkConfig& cfg);

/// M x n table of usefulness_entry(); row u, column = batch index (0-based).
class UsefulnessMatrix {
 public:
  UsefulnessMatrix(std::size_t rows, std::size_t batches);

  std::size_t rows() const { return rows_; }
  std::size_t batches() const { return batches_; }
  double at(std::size_t u, std::size_t batch) const {
    return values_[u * batches_ + batch];
  }
  double& at(std::size_t u, std::size_t batch) {
    return values_[u * batches_ + batch];
  }

 private:
  std::size_t rows_;
  std::size_t batches_;
  std::vector<double> values_;
};

UsefulnessMatrix usefulness_matrix(std::span<const std::size_t> phase1_receipts,
                                   const NetworkConfig& cfg);

/// Batch IDs (1-based) in the order a user transmits them.
struct TransmissionOrder {
  std::vector<std::uint32_t> batch_ids;
};

/// Descending sort of all entries; ties go to the smaller batch index, then
/// the smaller row.
TransmissionOrder transmission_order(const UsefulnessMatrix& s);

/// One user's view of the session.
struct UserState {
  UserState(std::uint32_t id, bats::Decoder decoder, std::size_t batches);

  std::uint32_t user_id;  // 1-based
  std::vector<std::size_t> phase1_receipts;  // |N_i^j| after Phase 1
  std::vector<std::size_t> phase2_receipts;  // Phase-2 deliveries per batch
  bats::Decoder decoder;
  bool decoded = false;
  std::size_t tx_count = 0;
  std::size_t rx_innovative = 0;  // Phase 2
  std::size_t rx_redundant = 0;   // Phase 2
  std::optional<std::size_t> decode_tx_index;  // Phase-2 transmission count
  std::vector<std::size_t> decode_ranks;       // per batch, at decode

  std::size_t phase1_total() const;
};

enum class AccessMode { round_robin, random };

/// One transmission on the medium.
struct TraceEvent {
  struct Outcome {
    std::uint32_t user;
    bool delivered;
    bool innovative;
  };
  int phase = 1;
  std::uint32_t sender = 0;  // 0 = source
  std::uint32_t batch_id = 0;
  std::size_t index = 0;     // 1-based transmission count within the phase
  std::vector<Outcome> outcomes;
};

using TraceSink = std::function<void(const TraceEvent&)>;

/// Point of a per-user received-vs-transmission curve (Phase 2).
struct ReceiptSample {
  std::size_t transmission;
  std::size_t received;
  std::size_t innovative;

  friend bool operator==(const ReceiptSample&, const ReceiptSample&) = default;
};

struct SimulationOptions {
  AccessMode access = AccessMode::round_robin;
  bats::Elimination elimination = bats::Elimination::when_feasible;
  /// Cap on Phase-2 transmissions; 0 picks 50 * k * n * M.
  std::size_t max_phase2_transmissions = 0;
  bool record_receipts = false;
  TraceSink trace;
};

struct Phase1Outcome {
  bats::SourceFile file;
  std::vector<bats::BatchHeader> batches;
  std::vector<UserState> users;
  /// Distinct Phase-1 packets per batch received by at least one user (Z).
  std::vector<std::size_t> group_receipts;
};

struct UserResult {
  std::uint32_t user_id = 0;
  std::size_t phase1_receipts = 0;
  std::size_t tx_count = 0;
  std::size_t rx_innovative = 0;
  std::size_t rx_redundant = 0;
  std::optional<std::size_t> decode_tx_index;
  std::size_t innovative_at_decode = 0;
  bool payload_verified = false;
  std::vector<std::size_t> decode_rank_histogram;  // M + 1 entries
  std::vector<std::size_t> final_rank_histogram;   // at the Phase-2 stop
  std::vector<ReceiptSample> receipts;

  friend bool operator==(const UserResult&, const UserResult&) = default;
};

struct SimulationResult {
  NetworkConfig config;
  std::uint64_t master_seed = 0;
  std::size_t n_batches = 0;
  std::size_t source_tx = 0;
  std::size_t phase2_total_tx = 0;
  bool all_decoded = false;
  bool stalled = false;
  std::size_t order_restarts = 0;
  std::vector<UserResult> users;

  friend bool operator==(const SimulationResult&, const SimulationResult&) = default;
};

/// Source encodes n batches and broadcasts each packet once over k
/// independent p1 links.
Phase1Outcome run_phase1(const NetworkConfig& cfg, const bats::DegreeDistribution& dist,
                         std::uint64_t master_seed,
                         const SimulationOptions& options = {});

/// Peer-to-peer repair until every user decodes (or the run stalls).
SimulationResult run_phase2(Phase1Outcome& phase1, const NetworkConfig& cfg,
                            std::uint64_t master_seed,
                            const SimulationOptions& options = {});

/// phase1_batch_count + run_phase1 + scheduling + run_phase2.
SimulationResult run_protocol(const NetworkConfig& cfg,
                              const bats::DegreeDistribution& dist,
                              std::uint64_t master_seed,
                              const SimulationOptions& options = {});

}  // namespace tpbats::protocol
