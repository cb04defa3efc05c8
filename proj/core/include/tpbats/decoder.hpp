#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "tpbats/encoder.hpp"
#include "tpbats/galois.hpp"
#include "tpbats/packet.hpp"

namespace tpbats::bats {

/// What decode() does once belief propagation stalls.
enum class Elimination {
  /// Pure peeling: stop when no batch is solvable on its own.
  none,
  /// Eliminate over the stalled batches only when a simple counting bound
  /// (coverage and sum of min(rank, unknowns)) allows full recovery.
  when_feasible,
  /// Always eliminate over the stalled batches; recovers every source the
  /// received equations determine.
  always,
};

struct DecoderOptions {
  Elimination elimination = Elimination::always;
};

/// Joint BP decoder for a BATS session. Batches must be registered with
/// add_batch() before packets for them are ingested.
///
/// Per batch the decoder keeps the received packets as a basis in reduced
/// row echelon form over the coefficient vectors, so rank(), basis() and the
/// innovation test are exact. Recovered sources never change afterwards.
class Decoder {
 public:
  Decoder(std::size_t file_packets, std::size_t batch_size,
          std::size_t packet_length, DecoderOptions options = {});

  void add_batch(const BatchHeader& header);
  bool knows_batch(std::uint32_t batch_id) const;

  /// Returns true iff `p` increased the rank of its batch. Non-innovative
  /// packets leave the state untouched. Throws CodecError for an unknown
  /// batch or a packet of the wrong shape.
  bool ingest(const Packet& p);

  /// Belief propagation with substitution of recovered sources, followed by
  /// elimination according to the options. Returns the number of recovered
  /// sources. Deterministic given the state.
  std::size_t decode();

  bool complete() const { return recovered_count_ == file_packets_; }
  std::size_t recovered_count() const { return recovered_count_; }
  bool is_recovered(std::size_t source) const { return known_.at(source); }
  /// Throws CodecError if the source is not recovered yet.
  std::span<const std::uint8_t> recovered(std::size_t source) const;

  std::size_t rank(std::uint32_t batch_id) const;
  /// Sum of the per-batch ranks, i.e. innovative packets received so far.
  std::size_t total_rank() const { return total_rank_; }
  /// Received packets of the batch in reduced echelon form.
  std::span<const Packet> basis(std::uint32_t batch_id) const;

  std::size_t file_packets() const { return file_packets_; }
  std::size_t batch_size() const { return batch_size_; }
  std::size_t packet_length() const { return packet_length_; }
  std::size_t batch_count() const { return batches_.size(); }

  /// FNV-1a over bases and recovered packets, for idempotence checks.
  std::uint64_t state_hash() const;

 private:
  struct BatchState {
    BatchHeader header;
    gf::Matrix generator_t;  // M x d, rows index coded packets
    std::vector<Packet> basis;
    std::vector<std::size_t> pivots;
    std::size_t unknown = 0;  // contributing sources not yet recovered
  };

  BatchState& state_for(std::uint32_t batch_id);
  const BatchState& state_for(std::uint32_t batch_id) const;

  /// Source-space equation of one basis row: coefficients over the batch's
  /// sources and its payload with already-recovered sources substituted.
  void equation(const BatchState& b, const Packet& row,
                std::vector<std::uint8_t>& coeffs, Bytes& payload) const;

  bool try_peel(BatchState& b);
  bool elimination_feasible() const;
  /// With `extract_partial` false a rank-deficient system recovers nothing.
  void eliminate_residual(bool extract_partial);
  void mark_recovered(std::size_t source, std::span<const std::uint8_t> payload);

  std::size_t file_packets_;
  std::size_t batch_size_;
  std::size_t packet_length_;
  DecoderOptions options_;

  std::vector<BatchState> batches_;
  std::unordered_map<std::uint32_t, std::size_t> index_;
  std::vector<std::vector<std::size_t>> batches_of_source_;

  std::vector<bool> known_;
  std::vector<Bytes> recovered_;
  std::size_t recovered_count_ = 0;
  std::size_t total_rank_ = 0;
};

}  // namespace tpbats::bats
