#include "tpbats/encoder.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tpbats/errors.hpp"

namespace tpbats::bats {

SourceFile::SourceFile(std::vector<Bytes> packets, std::size_t padding)
    : packets_(std::move(packets)), padding_(padding) {
  if (packets_.empty()) throw CodecError("SourceFile: no packets");
  length_ = packets_.front().size();
  for (const auto& p : packets_) {
    if (p.size() != length_) {
      throw CodecError("SourceFile: packets must share one length");
    }
  }
  if (padding_ > length_) throw CodecError("SourceFile: padding exceeds packet length");
}

SourceFile SourceFile::from_bytes(std::span<const std::uint8_t> data,
                                  std::size_t packet_length) {
  if (data.empty()) throw CodecError("SourceFile::from_bytes: empty input");
  if (packet_length == 0) throw CodecError("SourceFile::from_bytes: L = 0");
  const std::size_t count = (data.size() + packet_length - 1) / packet_length;
  std::vector<Bytes> packets(count, Bytes(packet_length, 0));
  for (std::size_t i = 0; i < data.size(); ++i) {
    packets[i / packet_length][i % packet_length] = data[i];
  }
  return SourceFile(std::move(packets), count * packet_length - data.size());
}

SourceFile SourceFile::random(std::size_t packets, std::size_t packet_length,
                              Rng& rng) {
  if (packets == 0) throw CodecError("SourceFile::random: F = 0");
  std::vector<Bytes> out(packets, Bytes(packet_length));
  for (auto& p : out) {
    for (auto& b : p) b = random_byte(rng);
  }
  return SourceFile(std::move(out));
}

Bytes SourceFile::to_bytes() const {
  Bytes out;
  out.reserve(packets_.size() * length_);
  for (const auto& p : packets_) out.insert(out.end(), p.begin(), p.end());
  out.resize(out.size() - padding_);
  return out;
}

Batch make_batch(const SourceFile& file, std::uint32_t batch_id,
                 std::vector<std::uint32_t> sources, gf::Matrix generator) {
  if (sources.empty()) throw CodecError("make_batch: degree 0");
  if (generator.rows() != sources.size()) {
    throw CodecError("make_batch: generator must have one row per source");
  }
  auto sorted = sources;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw CodecError("make_batch: source indices must be distinct");
  }
  if (sorted.back() >= file.size()) {
    throw CodecError("make_batch: source index out of range");
  }

  const std::size_t m = generator.cols();
  Batch batch;
  batch.packets.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    Packet p;
    p.batch_id = batch_id;
    p.coeffs.assign(m, 0);
    p.coeffs[j] = 1;
    p.payload.assign(file.packet_length(), 0);
    for (std::size_t i = 0; i < sources.size(); ++i) {
      gf::mul_add(p.payload, file.packet(sources[i]), generator.at(i, j));
    }
    batch.packets.push_back(std::move(p));
  }
  batch.header = BatchHeader{batch_id, std::move(sources), std::move(generator)};
  return batch;
}

Batch encode_batch(const SourceFile& file, const DegreeDistribution& dist,
                   std::uint32_t batch_id, std::size_t batch_size, Rng& rng) {
  if (file.size() == 0) throw CodecError("encode_batch: empty source");
  if (batch_size == 0) throw CodecError("encode_batch: batch size 0");
  const std::size_t f = file.size();
  const std::size_t degree = std::min(dist.sample(rng), f);

  // Partial Fisher-Yates over the file indices.
  std::vector<std::uint32_t> pool(f);
  std::iota(pool.begin(), pool.end(), 0u);
  for (std::size_t i = 0; i < degree; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, f - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::uint32_t> sources(pool.begin(), pool.begin() + degree);
  std::sort(sources.begin(), sources.end());

  auto generator = gf::Matrix::random(degree, batch_size, rng);
  return make_batch(file, batch_id, std::move(sources), std::move(generator));
}

Packet combine(std::span<const Packet> packets,
               std::span<const std::uint8_t> weights) {
  if (packets.empty()) throw CodecError("combine: no packets");
  if (weights.size() != packets.size()) {
    throw CodecError("combine: one weight per packet required");
  }
  const auto& first = packets.front();
  Packet out;
  out.batch_id = first.batch_id;
  out.coeffs.assign(first.coeffs.size(), 0);
  out.payload.assign(first.payload.size(), 0);
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const auto& p = packets[i];
    if (p.batch_id != first.batch_id) {
      throw CodecError("recode: mixed batch IDs " + std::to_string(first.batch_id) +
                       " and " + std::to_string(p.batch_id));
    }
    if (p.coeffs.size() != out.coeffs.size() ||
        p.payload.size() != out.payload.size()) {
      throw CodecError("recode: packets of one batch must share their shape");
    }
    gf::mul_add(out.coeffs, p.coeffs, weights[i]);
    gf::mul_add(out.payload, p.payload, weights[i]);
  }
  return out;
}

Packet recode(std::span<const Packet> received, Rng& rng) {
  if (received.empty()) throw CodecError("recode: no packets to combine");
  std::vector<std::uint8_t> weights(received.size());
  for (auto& w : weights) w = random_byte(rng);
  return combine(received, weights);
}

}  // namespace tpbats::bats
