#include "tpbats/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tpbats/analysis.hpp"
#include "tpbats/channel.hpp"
#include "tpbats/errors.hpp"

namespace tpbats::protocol {
namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(field, std::string(field) + ": " + what);
}

bool open_unit(double p) { return p > 0.0 && p < 1.0; }

std::vector<std::size_t> rank_histogram(std::span<const std::size_t> ranks,
                                        std::size_t batch_size) {
  std::vector<std::size_t> h(batch_size + 1, 0);
  for (auto r : ranks) ++h[r];
  return h;
}

std::vector<std::size_t> current_ranks(const UserState& u, std::size_t batches) {
  std::vector<std::size_t> r(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    r[b] = u.decoder.rank(static_cast<std::uint32_t>(b + 1));
  }
  return r;
}

bool verify_payload(const UserState& u, const bats::SourceFile& file) {
  if (!u.decoder.complete()) return false;
  for (std::size_t s = 0; s < file.size(); ++s) {
    const auto got = u.decoder.recovered(s);
    const auto& want = file.packet(s);
    if (!std::equal(got.begin(), got.end(), want.begin(), want.end())) return false;
  }
  return true;
}

}  // namespace

void NetworkConfig::validate(std::size_t min_users) const {
  require(users >= min_users, "k", "needs at least " + std::to_string(min_users) + " users");
  require(open_unit(source_erasure), "p1", "erasure probability must lie in (0, 1)");
  require(open_unit(peer_erasure), "p2", "erasure probability must lie in (0, 1)");
  require(peer_erasure < source_erasure, "p2", "peer links must be better than source links (p2 < p1)");
  require(batch_size > 0, "M", "batch size must be positive");
  require(file_packets >= batch_size, "F", "file must have at least M packets");
  require(std::isfinite(overhead) && overhead > 0.0, "eta", "overhead must be > 0");
  require(failure_prob > 0.0 && failure_prob < 0.5, "eps", "failure probability must lie in (0, 0.5)");
  require(packet_length > 0, "L", "packet length must be positive");
}

double NetworkConfig::target_packets() const {
  return (1.0 + overhead) * static_cast<double>(file_packets);
}

std::size_t phase1_batch_count(const NetworkConfig& cfg) {
  cfg.validate(1);
  const double f = cfg.target_packets();
  const double m = static_cast<double>(cfg.batch_size);
  const double q = std::pow(cfg.source_erasure, static_cast<double>(cfg.users));
  const double alpha = analysis::q_inverse(1.0 - cfg.failure_prob);
  const double n =
      f / (m * (1.0 - q)) - alpha * std::sqrt(4.0 * q * f) / (2.0 * m * (1.0 - q));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n)));
}

UserState::UserState(std::uint32_t id, bats::Decoder dec, std::size_t batches)
    : user_id(id),
      phase1_receipts(batches, 0),
      phase2_receipts(batches, 0),
      decoder(std::move(dec)) {}

std::size_t UserState::phase1_total() const {
  return std::accumulate(phase1_receipts.begin(), phase1_receipts.end(), std::size_t{0});
}

Phase1Outcome run_phase1(const NetworkConfig& cfg, const bats::DegreeDistribution& dist,
                         std::uint64_t master_seed, const SimulationOptions& options) {
  cfg.validate();
  const std::size_t n = phase1_batch_count(cfg);
  const std::size_t k = cfg.users;
  const std::size_t m = cfg.batch_size;

  Rng payload_rng(derive_seed(master_seed, StreamKind::payload));
  Rng encoder_rng(derive_seed(master_seed, StreamKind::encoder));
  auto file = bats::SourceFile::random(cfg.file_packets, cfg.packet_length, payload_rng);

  std::vector<bats::Batch> batches;
  batches.reserve(n);
  for (std::size_t b = 0; b < n; ++b) {
    batches.push_back(bats::encode_batch(file, dist, static_cast<std::uint32_t>(b + 1), m,
                                         encoder_rng));
  }

  Phase1Outcome out{std::move(file), {}, {}, std::vector<std::size_t>(n, 0)};
  out.batches.reserve(n);
  for (const auto& b : batches) out.batches.push_back(b.header);

  std::vector<channel::ErasureChannel> links;
  out.users.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    bats::Decoder dec(cfg.file_packets, m, cfg.packet_length,
                      bats::DecoderOptions{options.elimination});
    for (const auto& h : out.batches) dec.add_batch(h);
    out.users.emplace_back(static_cast<std::uint32_t>(j + 1), std::move(dec), n);
    links.push_back(channel::ErasureChannel::for_link(
        cfg.source_erasure, master_seed, StreamKind::source_link, 0,
        static_cast<std::uint32_t>(j + 1)));
  }

  std::size_t index = 0;
  for (std::size_t b = 0; b < n; ++b) {
    for (const auto& packet : batches[b].packets) {
      ++index;
      const auto got = channel::broadcast(links);
      TraceEvent ev;
      ev.phase = 1;
      ev.sender = 0;
      ev.batch_id = packet.batch_id;
      ev.index = index;
      bool any = false;
      for (std::size_t j = 0; j < k; ++j) {
        bool innovative = false;
        if (got[j]) {
          any = true;
          ++out.users[j].phase1_receipts[b];
          innovative = out.users[j].decoder.ingest(packet);
        }
        if (options.trace) {
          ev.outcomes.push_back({static_cast<std::uint32_t>(j + 1), got[j], innovative});
        }
      }
      if (any) ++out.group_receipts[b];
      if (options.trace) options.trace(ev);
    }
  }
  return out;
}

SimulationResult run_phase2(Phase1Outcome& phase1, const NetworkConfig& cfg,
                            std::uint64_t master_seed, const SimulationOptions& options) {
  cfg.validate();
  const std::size_t k = cfg.users;
  const std::size_t n = phase1.batches.size();
  const std::size_t m = cfg.batch_size;
  auto& users = phase1.users;
  if (users.size() != k) throw ConfigError("k", "k: Phase-1 outcome has a different user count");

  SimulationResult result;
  result.config = cfg;
  result.master_seed = master_seed;
  result.n_batches = n;
  result.source_tx = n * m;

  std::vector<TransmissionOrder> orders;
  orders.reserve(k);
  for (const auto& u : users) {
    orders.push_back(transmission_order(usefulness_matrix(u.phase1_receipts, cfg)));
  }

  // links[s * k + r]: s -> r; the diagonal is never used.
  std::vector<channel::ErasureChannel> links;
  links.reserve(k * k);
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t r = 0; r < k; ++r) {
      links.push_back(channel::ErasureChannel::for_link(
          cfg.peer_erasure, master_seed, StreamKind::peer_link,
          static_cast<std::uint32_t>(s + 1), static_cast<std::uint32_t>(r + 1)));
    }
  }
  std::vector<Rng> recoders;
  recoders.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    recoders.emplace_back(
        derive_seed(master_seed, StreamKind::recoder, static_cast<std::uint32_t>(j + 1)));
  }
  Rng access_rng(derive_seed(master_seed, StreamKind::access));

  std::size_t tx = 0;
  auto try_decode = [&](UserState& u) {
    if (u.decoded || u.decoder.total_rank() < cfg.file_packets) return;
    u.decoder.decode();
    if (!u.decoder.complete()) return;
    u.decoded = true;
    u.decode_tx_index = tx;
    u.decode_ranks = current_ranks(u, n);
  };
  for (auto& u : users) try_decode(u);

  const std::size_t cap = options.max_phase2_transmissions
                              ? options.max_phase2_transmissions
                              : 50 * k * n * m;
  const std::size_t stall_window = 2 * k * n * m;
  std::vector<std::size_t> cursor(k, 0);
  std::vector<std::size_t> received(k, 0);
  std::vector<std::vector<ReceiptSample>> samples(k);
  std::size_t last_innovation = 0;
  std::size_t turn = 0;

  auto all_decoded = [&] {
    return std::all_of(users.begin(), users.end(), [](const UserState& u) { return u.decoded; });
  };
  const bool anyone_holds = std::any_of(users.begin(), users.end(), [](const UserState& u) {
    return u.decoder.total_rank() > 0;
  });

  while (!all_decoded()) {
    if (!anyone_holds || tx >= cap || tx - last_innovation >= stall_window) {
      result.stalled = true;
      break;
    }
    const std::size_t s = options.access == AccessMode::round_robin
                              ? turn++ % k
                              : static_cast<std::size_t>(uniform_below(access_rng, k));
    UserState& sender = users[s];
    if (sender.decoder.total_rank() == 0) continue;

    const auto& order = orders[s].batch_ids;
    std::uint32_t batch_id = 0;
    while (batch_id == 0) {
      if (cursor[s] == order.size()) {
        cursor[s] = 0;
        ++result.order_restarts;
      }
      const auto id = order[cursor[s]++];
      if (sender.decoder.rank(id) > 0) batch_id = id;
    }
    const auto packet = bats::recode(sender.decoder.basis(batch_id), recoders[s]);
    ++tx;
    ++sender.tx_count;

    TraceEvent ev;
    ev.phase = 2;
    ev.sender = sender.user_id;
    ev.batch_id = batch_id;
    ev.index = tx;
    for (std::size_t r = 0; r < k; ++r) {
      if (r == s) continue;
      UserState& peer = users[r];
      const bool delivered = links[s * k + r].deliver();
      bool innovative = false;
      if (delivered) {
        ++received[r];
        ++peer.phase2_receipts[batch_id - 1];
        innovative = peer.decoder.ingest(packet);
        if (innovative) {
          ++peer.rx_innovative;
          last_innovation = tx;
          try_decode(peer);
        } else {
          ++peer.rx_redundant;
        }
      }
      if (options.trace) ev.outcomes.push_back({peer.user_id, delivered, innovative});
      if (options.record_receipts) samples[r].push_back({tx, received[r], peer.rx_innovative});
    }
    if (options.trace) options.trace(ev);
  }

  result.phase2_total_tx = tx;
  result.all_decoded = all_decoded();
  result.users.reserve(k);
  for (auto& u : users) {
    UserResult ur;
    ur.user_id = u.user_id;
    ur.phase1_receipts = u.phase1_total();
    ur.tx_count = u.tx_count;
    ur.rx_innovative = u.rx_innovative;
    ur.rx_redundant = u.rx_redundant;
    ur.decode_tx_index = u.decode_tx_index;
    if (u.decoded) {
      ur.innovative_at_decode =
          std::accumulate(u.decode_ranks.begin(), u.decode_ranks.end(), std::size_t{0});
      ur.decode_rank_histogram = rank_histogram(u.decode_ranks, m);
    }
    ur.final_rank_histogram = rank_histogram(current_ranks(u, n), m);
    ur.payload_verified = verify_payload(u, phase1.file);
    ur.receipts = std::move(samples[u.user_id - 1]);
    result.users.push_back(std::move(ur));
  }
  return result;
}

SimulationResult run_protocol(const NetworkConfig& cfg, const bats::DegreeDistribution& dist,
                              std::uint64_t master_seed, const SimulationOptions& options) {
  auto phase1 = run_phase1(cfg, dist, master_seed, options);
  return run_phase2(phase1, cfg, master_seed, options);
}

}  // namespace tpbats::protocol
