#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tpbats/degree_distribution.hpp"
#include "tpbats/galois.hpp"
#include "tpbats/packet.hpp"
#include "tpbats/random.hpp"

namespace tpbats::bats {

/// A file split into F packets of a common length L. The last packet is
/// zero padded; padding() records how many bytes were added.
class SourceFile {
 public:
  SourceFile(std::vector<Bytes> packets, std::size_t padding = 0);

  static SourceFile from_bytes(std::span<const std::uint8_t> data,
                               std::size_t packet_length);
  /// F packets of L uniformly random bytes.
  static SourceFile random(std::size_t packets, std::size_t packet_length,
                           Rng& rng);

  std::size_t size() const { return packets_.size(); }
  std::size_t packet_length() const { return length_; }
  std::size_t padding() const { return padding_; }
  const Bytes& packet(std::size_t i) const { return packets_.at(i); }
  const std::vector<Bytes>& packets() const { return packets_; }

  /// Concatenation with the padding stripped.
  Bytes to_bytes() const;

 private:
  std::vector<Bytes> packets_;
  std::size_t length_ = 0;
  std::size_t padding_ = 0;
};

/// What a receiver must know about a batch to decode it: the contributing
/// source packets (0-based file indices) and the d x M generator.
struct BatchHeader {
  std::uint32_t batch_id = 0;
  std::vector<std::uint32_t> sources;
  gf::Matrix generator;

  std::size_t degree() const { return sources.size(); }
};

/// Outer-code unit: header plus the M packets the source emits for it.
/// Packet j carries coefficient vector e_j.
struct Batch {
  BatchHeader header;
  std::vector<Packet> packets;

  std::uint32_t id() const { return header.batch_id; }
  std::size_t degree() const { return header.degree(); }
};

/// Builds a batch from explicit sources and generator (d x M).
Batch make_batch(const SourceFile& file, std::uint32_t batch_id,
                 std::vector<std::uint32_t> sources, gf::Matrix generator);

/// Samples a degree from `dist` (capped at F), picks that many distinct
/// sources uniformly, draws a uniform generator and emits M packets.
Batch encode_batch(const SourceFile& file, const DegreeDistribution& dist,
                   std::uint32_t batch_id, std::size_t batch_size, Rng& rng);

/// Linear combination sum_i weights[i] * packets[i]. All packets must share
/// a batch ID and shape.
Packet combine(std::span<const Packet> packets,
               std::span<const std::uint8_t> weights);

/// Random linear combination of every given packet of one batch.
Packet recode(std::span<const Packet> received, Rng& rng);

}  // namespace tpbats::bats
