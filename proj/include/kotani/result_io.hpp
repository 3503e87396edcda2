#pragma once

// Result serialization with reproducible bodies.
//
// A record is a small table plus identifying header fields. The body bytes
// (header + column table) depend only on the computation, never on wall
// time or output location; timing lives in a trailing meta section (CSV)
// or a separate "meta" object (JSON) so two runs of the same config can be
// compared byte for byte after stripping meta.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace kotani {

using Cell = std::variant<long long, double, std::string>;

struct ResultRecord {
  std::string command;
  std::uint64_t config_hash = 0;
  std::string tool_version;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  double wall_time_s = 0.0;
};

// shortest round-trip decimal rendering, locale independent
std::string format_double(double v);

std::string to_csv(const ResultRecord& r);
std::string to_json(const ResultRecord& r);

// format is "csv" or "json"; path "-" writes to stdout
void write_result(const ResultRecord& r, const std::string& path,
                  const std::string& format);

}  // namespace kotani
