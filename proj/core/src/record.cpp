#include "tpbats/record.hpp"

#include <json.hpp>

#include "tpbats/errors.hpp"

namespace tpbats::record {
namespace {

using nlohmann::json;

json config_json(const protocol::NetworkConfig& c) {
  return json{{"k", c.users},          {"p1", c.source_erasure}, {"p2", c.peer_erasure},
              {"F", c.file_packets},   {"M", c.batch_size},      {"eta", c.overhead},
              {"eps", c.failure_prob}, {"L", c.packet_length}};
}

protocol::NetworkConfig config_from(const json& j) {
  protocol::NetworkConfig c;
  c.users = j.at("k").get<std::size_t>();
  c.source_erasure = j.at("p1").get<double>();
  c.peer_erasure = j.at("p2").get<double>();
  c.file_packets = j.at("F").get<std::size_t>();
  c.batch_size = j.at("M").get<std::size_t>();
  c.overhead = j.at("eta").get<double>();
  c.failure_prob = j.at("eps").get<double>();
  c.packet_length = j.at("L").get<std::size_t>();
  return c;
}

json user_json(const protocol::UserResult& u) {
  json receipts = json::array();
  for (const auto& s : u.receipts) receipts.push_back({s.transmission, s.received, s.innovative});
  return json{{"user_id", u.user_id},
              {"phase1_receipts", u.phase1_receipts},
              {"tx_count", u.tx_count},
              {"rx_innovative", u.rx_innovative},
              {"rx_redundant", u.rx_redundant},
              {"decode_tx_index", u.decode_tx_index ? json(*u.decode_tx_index) : json(nullptr)},
              {"innovative_at_decode", u.innovative_at_decode},
              {"payload_verified", u.payload_verified},
              {"decode_rank_histogram", u.decode_rank_histogram},
              {"final_rank_histogram", u.final_rank_histogram},
              {"receipts", receipts}};
}

protocol::UserResult user_from(const json& j) {
  protocol::UserResult u;
  u.user_id = j.at("user_id").get<std::uint32_t>();
  u.phase1_receipts = j.at("phase1_receipts").get<std::size_t>();
  u.tx_count = j.at("tx_count").get<std::size_t>();
  u.rx_innovative = j.at("rx_innovative").get<std::size_t>();
  u.rx_redundant = j.at("rx_redundant").get<std::size_t>();
  if (const auto& d = j.at("decode_tx_index"); !d.is_null()) {
    u.decode_tx_index = d.get<std::size_t>();
  }
  u.innovative_at_decode = j.at("innovative_at_decode").get<std::size_t>();
  u.payload_verified = j.at("payload_verified").get<bool>();
  u.decode_rank_histogram = j.at("decode_rank_histogram").get<std::vector<std::size_t>>();
  u.final_rank_histogram = j.at("final_rank_histogram").get<std::vector<std::size_t>>();
  for (const auto& s : j.at("receipts")) {
    u.receipts.push_back(
        {s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(), s.at(2).get<std::size_t>()});
  }
  return u;
}

json parse_object(std::string_view text, const char* kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("record", std::string("record: ") + e.what());
  }
  if (!j.is_object() || j.value("record", "") != kind) {
    throw ConfigError("record", std::string("record: expected a ") + kind + " record");
  }
  return j;
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError("record", std::string("record: ") + e.what());
  }
}

}  // namespace

std::string to_json_string(const protocol::SimulationResult& r, int indent) {
  json users = json::array();
  for (const auto& u : r.users) users.push_back(user_json(u));
  json j{{"record", "simulation"},
         {"config", config_json(r.config)},
         {"master_seed", r.master_seed},
         {"n_batches", r.n_batches},
         {"source_tx", r.source_tx},
         {"phase2_total_tx", r.phase2_total_tx},
         {"all_decoded", r.all_decoded},
         {"stalled", r.stalled},
         {"order_restarts", r.order_restarts},
         {"users", users}};
  return j.dump(indent);
}

std::string to_json_string(const analysis::AnalysisReport& r, int indent) {
  json curve = json::array();
  for (const auto& p : r.phase2.curve) curve.push_back({p.transmissions, p.innovative});
  json j{{"record", "analysis"},
         {"config", config_json(r.config)},
         {"master_seed", 0},
         {"n_batches", r.n_batches},
         {"source_tx", r.source_tx},
         {"phase2_transmissions", r.phase2.transmissions},
         {"target", r.phase2.target},
         {"saturation", r.phase2.saturation},
         {"innovative_curve", curve},
         {"rank_distribution", r.rank_dist.probs},
         {"single_phase_tx", r.single_phase_tx}};
  return j.dump(indent);
}

std::string to_json_string(const protocol::NetworkConfig& cfg, int indent) {
  return config_json(cfg).dump(indent);
}

protocol::SimulationResult parse_simulation(std::string_view text) {
  const json j = parse_object(text, "simulation");
  return guarded([&] {
    protocol::SimulationResult r;
    r.config = config_from(j.at("config"));
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.n_batches = j.at("n_batches").get<std::size_t>();
    r.source_tx = j.at("source_tx").get<std::size_t>();
    r.phase2_total_tx = j.at("phase2_total_tx").get<std::size_t>();
    r.all_decoded = j.at("all_decoded").get<bool>();
    r.stalled = j.at("stalled").get<bool>();
    r.order_restarts = j.at("order_restarts").get<std::size_t>();
    for (const auto& u : j.at("users")) r.users.push_back(user_from(u));
    return r;
  });
}

analysis::AnalysisReport parse_analysis(std::string_view text) {
  const json j = parse_object(text, "analysis");
  return guarded([&] {
    analysis::AnalysisReport r;
    r.config = config_from(j.at("config"));
    r.n_batches = j.at("n_batches").get<std::size_t>();
    r.source_tx = j.at("source_tx").get<std::size_t>();
    r.phase2.transmissions = j.at("phase2_transmissions").get<std::size_t>();
    r.phase2.target = j.at("target").get<double>();
    r.phase2.saturation = j.at("saturation").get<double>();
    for (const auto& p : j.at("innovative_curve")) {
      r.phase2.curve.push_back({p.at(0).get<std::size_t>(), p.at(1).get<double>()});
    }
    r.rank_dist.probs = j.at("rank_distribution").get<std::vector<double>>();
    r.single_phase_tx = j.at("single_phase_tx").get<std::size_t>();
    return r;
  });
}

protocol::NetworkConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("record", std::string("record: ") + e.what());
  }
  return guarded([&] { return config_from(j); });
}

std::string trace_line(const protocol::TraceEvent& ev) {
  json out = json::array();
  for (const auto& o : ev.outcomes) {
    out.push_back({{"user", o.user}, {"delivered", o.delivered}, {"innovative", o.innovative}});
  }
  return json{{"phase", ev.phase},
              {"index", ev.index},
              {"sender", ev.sender},
              {"batch_id", ev.batch_id},
              {"receivers", out}}
      .dump();
}

protocol::TraceEvent parse_trace_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ConfigError("record", std::string("record: ") + e.what());
  }
  return guarded([&] {
    protocol::TraceEvent ev;
    ev.phase = j.at("phase").get<int>();
    ev.index = j.at("index").get<std::size_t>();
    ev.sender = j.at("sender").get<std::uint32_t>();
    ev.batch_id = j.at("batch_id").get<std::uint32_t>();
    for (const auto& o : j.at("receivers")) {
      ev.outcomes.push_back({o.at("user").get<std::uint32_t>(), o.at("delivered").get<bool>(),
                             o.at("innovative").get<bool>()});
    }
    return ev;
  });
}

}  // namespace tpbats::record
