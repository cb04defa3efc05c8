#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tpbats/packet.hpp"
#include "tpbats/random.hpp"

namespace tpbats::channel {

/// Memoryless packet-erasure link. Each instance owns its random stream; a
/// channel must not be shared between concurrent callers.
class ErasureChannel {
 public:
  /// `erase_prob` must lie in (0, 1).
  ErasureChannel(double erase_prob, std::uint64_t seed);

  /// Seeded from (master, kind, from, to) via derive_seed().
  static ErasureChannel for_link(double erase_prob, std::uint64_t master,
                                 StreamKind kind, std::uint32_t from,
                                 std::uint32_t to);

  double erase_prob() const { return erase_prob_; }

  /// One independent draw: true if the packet gets through.
  bool deliver();

  std::optional<bats::Packet> transmit(const bats::Packet& p);

 private:
  double erase_prob_;
  Rng rng_;
};

/// One draw per receiver channel; result[i] is true if receiver i got it.
std::vector<bool> broadcast(std::span<ErasureChannel> channels);

}  // namespace tpbats::channel
