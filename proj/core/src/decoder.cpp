#include "tpbats/decoder.hpp"

#include <algorithm>
#include <string>

#include "tpbats/errors.hpp"

namespace tpbats::bats {

Decoder::Decoder(std::size_t file_packets, std::size_t batch_size,
                 std::size_t packet_length, DecoderOptions options)
    : file_packets_(file_packets),
      batch_size_(batch_size),
      packet_length_(packet_length),
      options_(options),
      batches_of_source_(file_packets),
      known_(file_packets, false),
      recovered_(file_packets) {
  if (file_packets == 0) throw CodecError("Decoder: F = 0");
  if (batch_size == 0) throw CodecError("Decoder: M = 0");
}

void Decoder::add_batch(const BatchHeader& header) {
  if (index_.contains(header.batch_id)) {
    throw CodecError("Decoder: batch " + std::to_string(header.batch_id) +
                     " registered twice");
  }
  if (header.generator.rows() != header.sources.size() ||
      header.generator.cols() != batch_size_) {
    throw CodecError("Decoder: generator shape must be degree x M");
  }
  BatchState b;
  b.header = header;
  b.generator_t = header.generator.transposed();
  for (auto s : header.sources) {
    if (s >= file_packets_) throw CodecError("Decoder: source index out of range");
    if (!known_[s]) ++b.unknown;
  }
  const std::size_t idx = batches_.size();
  for (auto s : header.sources) batches_of_source_[s].push_back(idx);
  index_.emplace(header.batch_id, idx);
  batches_.push_back(std::move(b));
}

bool Decoder::knows_batch(std::uint32_t batch_id) const {
  return index_.contains(batch_id);
}

Decoder::BatchState& Decoder::state_for(std::uint32_t batch_id) {
  auto it = index_.find(batch_id);
  if (it == index_.end()) {
    throw CodecError("Decoder: unknown batch " + std::to_string(batch_id));
  }
  return batches_[it->second];
}

const Decoder::BatchState& Decoder::state_for(std::uint32_t batch_id) const {
  auto it = index_.find(batch_id);
  if (it == index_.end()) {
    throw CodecError("Decoder: unknown batch " + std::to_string(batch_id));
  }
  return batches_[it->second];
}

bool Decoder::ingest(const Packet& p) {
  BatchState& b = state_for(p.batch_id);
  if (p.coeffs.size() != batch_size_ || p.payload.size() != packet_length_) {
    throw CodecError("Decoder: packet shape does not match the session");
  }
  if (b.basis.size() == batch_size_) return false;

  Packet v = p;
  for (std::size_t t = 0; t < b.basis.size(); ++t) {
    if (const std::uint8_t f = v.coeffs[b.pivots[t]]; f != 0) {
      gf::mul_add(v.coeffs, b.basis[t].coeffs, f);
      gf::mul_add(v.payload, b.basis[t].payload, f);
    }
  }
  const auto lead_it = std::find_if(v.coeffs.begin(), v.coeffs.end(),
                                    [](std::uint8_t x) { return x != 0; });
  if (lead_it == v.coeffs.end()) return false;
  const auto lead = static_cast<std::size_t>(lead_it - v.coeffs.begin());

  const std::uint8_t s = gf::inv(v.coeffs[lead]);
  gf::scale(v.coeffs, s);
  gf::scale(v.payload, s);
  for (auto& row : b.basis) {
    if (const std::uint8_t f = row.coeffs[lead]; f != 0) {
      gf::mul_add(row.coeffs, v.coeffs, f);
      gf::mul_add(row.payload, v.payload, f);
    }
  }
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(b.pivots.begin(), b.pivots.end(), lead) - b.pivots.begin());
  b.pivots.insert(b.pivots.begin() + static_cast<std::ptrdiff_t>(pos), lead);
  b.basis.insert(b.basis.begin() + static_cast<std::ptrdiff_t>(pos), std::move(v));
  ++total_rank_;
  return true;
}

std::size_t Decoder::rank(std::uint32_t batch_id) const {
  return state_for(batch_id).basis.size();
}

std::span<const Packet> Decoder::basis(std::uint32_t batch_id) const {
  return state_for(batch_id).basis;
}

std::span<const std::uint8_t> Decoder::recovered(std::size_t source) const {
  if (!known_.at(source)) {
    throw CodecError("Decoder: source " + std::to_string(source) +
                     " is not recovered");
  }
  return recovered_[source];
}

void Decoder::equation(const BatchState& b, const Packet& row,
                       std::vector<std::uint8_t>& coeffs, Bytes& payload) const {
  coeffs.assign(b.header.degree(), 0);
  for (std::size_t j = 0; j < batch_size_; ++j) {
    gf::mul_add(coeffs, b.generator_t.row(j), row.coeffs[j]);
  }
  payload = row.payload;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const auto s = b.header.sources[i];
    if (known_[s] && coeffs[i] != 0) gf::mul_add(payload, recovered_[s], coeffs[i]);
  }
}

void Decoder::mark_recovered(std::size_t source,
                             std::span<const std::uint8_t> payload) {
  if (known_[source]) return;
  known_[source] = true;
  recovered_[source].assign(payload.begin(), payload.end());
  ++recovered_count_;
  for (auto idx : batches_of_source_[source]) --batches_[idx].unknown;
}

bool Decoder::try_peel(BatchState& b) {
  std::vector<std::size_t> unknown_pos;
  for (std::size_t i = 0; i < b.header.degree(); ++i) {
    if (!known_[b.header.sources[i]]) unknown_pos.push_back(i);
  }
  const std::size_t r = b.basis.size();
  gf::Matrix a(r, unknown_pos.size());
  gf::Matrix y(r, packet_length_);
  std::vector<std::uint8_t> coeffs;
  Bytes payload;
  for (std::size_t t = 0; t < r; ++t) {
    equation(b, b.basis[t], coeffs, payload);
    for (std::size_t k = 0; k < unknown_pos.size(); ++k) {
      a.at(t, k) = coeffs[unknown_pos[k]];
    }
    std::copy(payload.begin(), payload.end(), y.row(t).begin());
  }
  gf::Matrix x;
  try {
    x = gf::solve(std::move(a), std::move(y));
  } catch (const UnsolvableSystem&) {
    return false;
  }
  for (std::size_t k = 0; k < unknown_pos.size(); ++k) {
    mark_recovered(b.header.sources[unknown_pos[k]], x.row(k));
  }
  return true;
}

std::size_t Decoder::decode() {
  bool progress = true;
  while (progress && !complete()) {
    progress = false;
    for (auto& b : batches_) {
      if (b.unknown == 0 || b.unknown > b.basis.size()) continue;
      if (try_peel(b)) progress = true;
    }
  }
  if (!complete()) {
    switch (options_.elimination) {
      case Elimination::none:
        break;
      case Elimination::when_feasible:
        if (elimination_feasible()) eliminate_residual(false);
        break;
      case Elimination::always:
        eliminate_residual(true);
        break;
    }
  }
  return recovered_count_;
}

bool Decoder::elimination_feasible() const {
  std::size_t equations = 0;
  for (const auto& b : batches_) equations += std::min(b.unknown, b.basis.size());
  if (equations < file_packets_ - recovered_count_) return false;
  for (std::size_t s = 0; s < file_packets_; ++s) {
    if (known_[s]) continue;
    const auto& owners = batches_of_source_[s];
    const bool covered = std::any_of(owners.begin(), owners.end(), [&](std::size_t i) {
      return !batches_[i].basis.empty();
    });
    if (!covered) return false;
  }
  return true;
}

void Decoder::eliminate_residual(bool extract_partial) {
  std::vector<std::size_t> column_source;
  std::vector<std::ptrdiff_t> column_of(file_packets_, -1);
  for (std::size_t s = 0; s < file_packets_; ++s) {
    if (!known_[s]) {
      column_of[s] = static_cast<std::ptrdiff_t>(column_source.size());
      column_source.push_back(s);
    }
  }
  const std::size_t unknowns = column_source.size();
  std::size_t rows = 0;
  for (const auto& b : batches_) {
    if (b.unknown > 0) rows += b.basis.size();
  }
  if (unknowns == 0 || rows == 0) return;

  // Augmented system [coefficients | payload], one row per received basis
  // packet of every batch that still has unknown sources.
  const std::size_t width = unknowns + packet_length_;
  gf::Matrix w(rows, width);
  std::vector<std::uint8_t> coeffs;
  Bytes payload;
  std::size_t next = 0;
  for (const auto& b : batches_) {
    if (b.unknown == 0) continue;
    for (const auto& row : b.basis) {
      equation(b, row, coeffs, payload);
      auto out = w.row(next++);
      for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const auto col = column_of[b.header.sources[i]];
        if (col >= 0) out[static_cast<std::size_t>(col)] = coeffs[i];
      }
      std::copy(payload.begin(), payload.end(), out.begin() + unknowns);
    }
  }

  std::vector<std::size_t> pivot_cols;
  std::size_t r = 0;
  for (std::size_t c = 0; c < unknowns && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && w.at(p, c) == 0) ++p;
    if (p == rows) continue;
    w.swap_rows(p, r);
    gf::scale(w.row(r).subspan(c), gf::inv(w.at(r, c)));
    const auto pivot_row = w.row(r).subspan(c);
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (const std::uint8_t f = w.at(i, c); f != 0) {
        gf::mul_add(w.row(i).subspan(c), pivot_row, f);
      }
    }
    pivot_cols.push_back(c);
    ++r;
  }

  if (r == unknowns) {
    // Triangular with unit diagonal: substitute upwards on payloads only.
    for (std::size_t p = r; p-- > 0;) {
      const auto src = w.row(p).subspan(unknowns);
      for (std::size_t i = 0; i < p; ++i) {
        if (const std::uint8_t f = w.at(i, p); f != 0) {
          gf::mul_add(w.row(i).subspan(unknowns), src, f);
        }
      }
    }
    for (std::size_t p = 0; p < r; ++p) {
      mark_recovered(column_source[p], w.row(p).subspan(unknowns));
    }
    return;
  }

  if (!extract_partial) return;

  // Rank deficient: reduce fully, then a pivot variable is determined iff
  // its row has no entries in free columns.
  for (std::size_t p = r; p-- > 0;) {
    const std::size_t c = pivot_cols[p];
    const auto src = w.row(p).subspan(c);
    for (std::size_t i = 0; i < p; ++i) {
      if (const std::uint8_t f = w.at(i, c); f != 0) {
        gf::mul_add(w.row(i).subspan(c), src, f);
      }
    }
  }
  std::vector<bool> is_pivot(unknowns, false);
  for (auto c : pivot_cols) is_pivot[c] = true;
  for (std::size_t p = 0; p < r; ++p) {
    const auto row = w.row(p);
    bool determined = true;
    for (std::size_t c = pivot_cols[p] + 1; c < unknowns && determined; ++c) {
      if (!is_pivot[c] && row[c] != 0) determined = false;
    }
    if (determined) mark_recovered(column_source[pivot_cols[p]], row.subspan(unknowns));
  }
}

std::uint64_t Decoder::state_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_bytes = [&h](std::span<const std::uint8_t> bytes) {
    for (auto x : bytes) {
      h ^= x;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& b : batches_) {
    mix(b.header.batch_id);
    mix(b.basis.size());
    for (const auto& row : b.basis) {
      mix_bytes(row.coeffs);
      mix_bytes(row.payload);
    }
  }
  for (std::size_t s = 0; s < file_packets_; ++s) {
    mix(known_[s] ? 1 : 0);
    if (known_[s]) mix_bytes(recovered_[s]);
  }
  return h;
}

}  // namespace tpbats::bats
