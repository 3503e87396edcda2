#include "kotani/result_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kotani/errors.hpp"

namespace kotani {

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';  // double embedded quotes
    out += c;
  }
  out += '"';
  return out;
}

std::string cell_text(const Cell& c) {
  if (std::holds_alternative<long long>(c))
    return std::to_string(std::get<long long>(c));
  if (std::holds_alternative<double>(c))
    return format_double(std::get<double>(c));
  return csv_escape(std::get<std::string>(c));
}

nlohmann::json cell_json(const Cell& c) {
  if (std::holds_alternative<long long>(c)) return std::get<long long>(c);
  if (std::holds_alternative<double>(c)) {
    const double v = std::get<double>(c);
    if (std::isfinite(v)) return v;
    return format_double(v);  // inf/nan as strings, JSON has no literal for them
  }
  return std::get<std::string>(c);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw numeric_error("to_chars failed");
  return std::string(buf, p);
}

std::string to_csv(const ResultRecord& r) {
  std::string out;
  out += "# command=" + r.command + "\n";
  out += "# config=" + hash_hex(r.config_hash) + "\n";
  out += "# version=" + r.tool_version + "\n";
  out += "\n";
  for (std::size_t j = 0; j < r.columns.size(); ++j) {
    if (j) out += ',';
    out += csv_escape(r.columns[j]);
  }
  out += '\n';
  for (const auto& row : r.rows) {
    if (row.size() != r.columns.size())
      throw numeric_error("row width does not match column count");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += cell_text(row[j]);
    }
    out += '\n';
  }
  out += "\n#meta\n";
  out += "wall_time_s=" + format_double(r.wall_time_s) + "\n";
  return out;
}

std::string to_json(const ResultRecord& r) {
  nlohmann::json body;
  body["command"] = r.command;
  body["config"] = hash_hex(r.config_hash);
  body["version"] = r.tool_version;
  body["columns"] = r.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    if (row.size() != r.columns.size())
      throw numeric_error("row width does not match column count");
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& c : row) jr.push_back(cell_json(c));
    rows.push_back(jr);
  }
  body["rows"] = rows;
  nlohmann::json doc;
  doc["body"] = body;
  doc["meta"] = {{"wall_time_s", r.wall_time_s}};
  return doc.dump(2) + "\n";
}

void write_result(const ResultRecord& r, const std::string& path,
                  const std::string& format) {
  std::string text;
  if (format == "csv")
    text = to_csv(r);
  else if (format == "json")
    text = to_json(r);
  else
    throw model_error("output format must be csv or json");
  if (path == "-" || path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw model_error("cannot open output file: " + path);
  f << text;
  if (!f) throw model_error("write failed: " + path);
}

}  // namespace kotani
