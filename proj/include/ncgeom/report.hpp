#pragma once

// Command reports and their serialized forms.  JSON output is canonical:
// object keys sort lexicographically and doubles print in shortest
// round-trip form, so equal payloads are equal bytes.

#include <string>

#include <json.hpp>

#include "core.hpp"

namespace ncgeom {

struct Report {
  std::string config_hash;
  std::string tool_version;
  std::string command;
  nlohmann::json payload = nlohmann::json::object();
  nlohmann::json diagnostics = nlohmann::json::object();
  double wall_time = 0.0;  // seconds; excluded from payload determinism
};

inline std::string canonical_dump(const nlohmann::json& j) { return j.dump(); }

inline nlohmann::json make_table(std::vector<std::string> header,
                                 std::vector<std::vector<double>> rows) {
  nlohmann::json t;
  t["header"] = std::move(header);
  t["rows"] = std::move(rows);
  return t;
}

inline std::string emit_csv(const nlohmann::json& payload) {
  if (!payload.contains("table") || !payload["table"].contains("header") ||
      !payload["table"].contains("rows"))
    throw ConfigError("this payload has no tabular section; use the JSON format");
  const nlohmann::json& table = payload["table"];
  std::string out;
  const auto& header = table["header"];
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i].get<std::string>();
  }
  out += '\n';
  for (const auto& row : table["rows"]) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i].dump();  // shortest round-trip number text
    }
    out += '\n';
  }
  return out;
}

inline std::string emit(const Report& report, const std::string& format) {
  if (format == "json") {
    nlohmann::json j;
    j["config_hash"] = report.config_hash;
    j["tool_version"] = report.tool_version;
    j["command"] = report.command;
    j["payload"] = report.payload;
    j["diagnostics"] = report.diagnostics;
    j["wall_time"] = report.wall_time;
    return j.dump(2) + "\n";
  }
  if (format == "csv") return emit_csv(report.payload);
  throw ConfigError("unknown output format '" + format + "'");
}

}  // namespace ncgeom
