#include <algorithm>
#include <tuple>

#include "tpbats/analysis.hpp"
#include "tpbats/errors.hpp"
#include "tpbats/protocol.hpp"

namespace tpbats::protocol {

UsefulnessMatrix::UsefulnessMatrix(std::size_t rows, std::size_t batches)
    : rows_(rows), batches_(batches), values_(rows * batches, 0.0) {}

double usefulness_entry(std::size_t received, std::size_t u, const NetworkConfig& cfg) {
  const std::size_t m_max = cfg.batch_size;
  // Pr(m): the peer misses m of the `received` packets in Phase 1.
  auto missed = [&](std::size_t m) {
    return analysis::binomial_pmf(received, m, cfg.source_erasure);
  };
  double value = 0.0;
  for (std::size_t m = u + 1; m <= m_max; ++m) value += missed(m);
  for (std::size_t m = 1; m <= u && m <= m_max; ++m) {
    // Fewer than m of the u earlier Phase-2 packets reached the peer.
    double below = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      below += analysis::binomial_pmf(u, l, 1.0 - cfg.peer_erasure);
    }
    value += missed(m) * below;
  }
  return value;
}

UsefulnessMatrix usefulness_matrix(std::span<const std::size_t> phase1_receipts,
                                   const NetworkConfig& cfg) {
  UsefulnessMatrix s(cfg.batch_size, phase1_receipts.size());
  for (std::size_t b = 0; b < phase1_receipts.size(); ++b) {
    if (phase1_receipts[b] > cfg.batch_size) {
      throw DomainError("usefulness_matrix: more receipts than the batch size");
    }
    for (std::size_t u = 0; u < cfg.batch_size; ++u) {
      s.at(u, b) = usefulness_entry(phase1_receipts[b], u, cfg);
    }
  }
  return s;
}

TransmissionOrder transmission_order(const UsefulnessMatrix& s) {
  struct Entry {
    double value;
    std::size_t batch;
    std::size_t row;
  };
  std::vector<Entry> entries;
  entries.reserve(s.rows() * s.batches());
  for (std::size_t u = 0; u < s.rows(); ++u) {
    for (std::size_t b = 0; b < s.batches(); ++b) entries.push_back({s.at(u, b), b, u});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return a.value > b.value;
    return std::tie(a.batch, a.row) < std::tie(b.batch, b.row);
  });
  TransmissionOrder order;
  order.batch_ids.reserve(entries.size());
  for (const auto& e : entries) {
    order.batch_ids.push_back(static_cast<std::uint32_t>(e.batch + 1));
  }
  return order;
}

}  // namespace tpbats::protocol
