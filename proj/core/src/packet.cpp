#include "tpbats/packet.hpp"

#include <string>

#include "tpbats/errors.hpp"

namespace tpbats::bats {

Bytes serialize(const Packet& p) {
  Bytes out;
  out.reserve(4 + p.coeffs.size() + p.payload.size());
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>(p.batch_id >> shift));
  }
  out.insert(out.end(), p.coeffs.begin(), p.coeffs.end());
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  return out;
}

Packet parse_packet(std::span<const std::uint8_t> bytes, std::size_t m,
                    std::size_t l) {
  if (bytes.size() != 4 + m + l) {
    throw CodecError("parse_packet: expected " + std::to_string(4 + m + l) +
                     " bytes, got " + std::to_string(bytes.size()));
  }
  Packet p;
  for (int i = 0; i < 4; ++i) {
    p.batch_id |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  }
  p.coeffs.assign(bytes.begin() + 4, bytes.begin() + 4 + m);
  p.payload.assign(bytes.begin() + 4 + m, bytes.end());
  return p;
}

}  // namespace tpbats::bats
