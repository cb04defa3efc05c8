#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tpbats::bats {

using Bytes = std::vector<std::uint8_t>;

/// Coded packet: batch ID (1-based), M coefficient bytes expressing it in
/// terms of the batch's M source-emitted packets, and an L-byte payload.
struct Packet {
  std::uint32_t batch_id = 0;
  Bytes coeffs;
  Bytes payload;

  friend bool operator==(const Packet&, const Packet&) = default;
};

/// Trace layout: batch_id as 4 bytes little-endian, then coeffs, then payload.
Bytes serialize(const Packet& p);

/// Inverse of serialize() for a session with batch size `m` and payload
/// length `l`. Throws CodecError on a size mismatch.
Packet parse_packet(std::span<const std::uint8_t> bytes, std::size_t m,
                    std::size_t l);

}  // namespace tpbats::bats
