#pragma once

#include <string>
#include <string_view>

#include "tpbats/analysis.hpp"
#include "tpbats/protocol.hpp"

// JSON records for simulation results and analysis reports. Every record is
// an object with "record" ("simulation" | "analysis"), "config" and
// "master_seed" (analysis records carry 0) plus the payload fields.
namespace tpbats::record {

std::string to_json_string(const protocol::SimulationResult& r, int indent = 2);
std::string to_json_string(const analysis::AnalysisReport& r, int indent = 2);
std::string to_json_string(const protocol::NetworkConfig& cfg, int indent = 2);

/// Throws ConfigError (field "record") on malformed input.
protocol::SimulationResult parse_simulation(std::string_view text);
analysis::AnalysisReport parse_analysis(std::string_view text);
protocol::NetworkConfig parse_config(std::string_view text);

/// One line-delimited trace record, no trailing newline.
std::string trace_line(const protocol::TraceEvent& ev);
protocol::TraceEvent parse_trace_line(std::string_view line);

}  // namespace tpbats::record
