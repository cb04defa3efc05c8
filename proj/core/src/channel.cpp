#include "tpbats/channel.hpp"

#include <string>

#include "tpbats/errors.hpp"

namespace tpbats::channel {

ErasureChannel::ErasureChannel(double erase_prob, std::uint64_t seed)
    : erase_prob_(erase_prob), rng_(seed) {
  if (!(erase_prob > 0.0 && erase_prob < 1.0)) {
    throw DomainError("ErasureChannel: erase probability must lie in (0,1), got " +
                      std::to_string(erase_prob));
  }
}

ErasureChannel ErasureChannel::for_link(double erase_prob, std::uint64_t master,
                                        StreamKind kind, std::uint32_t from,
                                        std::uint32_t to) {
  return ErasureChannel(erase_prob, derive_seed(master, kind, from, to));
}

bool ErasureChannel::deliver() { return !bernoulli(rng_, erase_prob_); }

std::optional<bats::Packet> ErasureChannel::transmit(const bats::Packet& p) {
  if (!deliver()) return std::nullopt;
  return p;
}

std::vector<bool> broadcast(std::span<ErasureChannel> channels) {
  std::vector<bool> delivered;
  delivered.reserve(channels.size());
  for (auto& ch : channels) delivered.push_back(ch.deliver());
  return delivered;
}

}  // namespace tpbats::channel
