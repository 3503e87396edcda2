#include "kotani/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "kotani/errors.hpp"

namespace kotani {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool is_block_key(const std::string& key, char prefix) {
  if (key.size() < 3 || key[0] != prefix || key[1] != '_') return false;
  for (std::size_t i = 2; i < key.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(key[i]))) return false;
  return true;
}

void check_key(const std::string& section, const std::string& key) {
  static const std::map<std::string, std::vector<std::string>> schema = {
      {"model",
       {"kind", "l", "seed", "alpha", "theta0", "lambda", "d_symbol",
        "d_const", "d_lo", "d_hi", "v_lo", "v_hi", "d_det_target", "period"}},
      {"run",
       {"z_re", "z_im", "n", "steps", "depth", "reorth_period", "orbit",
        "x_start", "x_stop", "x_count", "y_ladder", "x", "y", "column"}},
      {"output", {"path", "format"}},
  };
  auto it = schema.find(section);
  if (it == schema.end())
    throw model_error("unknown config section [" + section + "]");
  for (const auto& k : it->second)
    if (k == key) return;
  if (section == "model" && (is_block_key(key, 'd') || is_block_key(key, 'v')))
    return;  // periodic matrix blocks d_0, v_0, ...
  throw model_error("unknown config key " + section + "." + key);
}

Eigen::MatrixXd square_from_list(const std::vector<double>& vals, int l,
                                 const std::string& what) {
  if (static_cast<int>(vals.size()) != l * l)
    throw model_error(what + " needs " + std::to_string(l * l) +
                      " entries, got " + std::to_string(vals.size()));
  Eigen::MatrixXd m(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) m(i, j) = vals[static_cast<std::size_t>(i * l + j)];
  return m;
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(text);
  // commas and whitespace both separate entries
  std::string normalized = text;
  for (char& c : normalized)
    if (c == ',' || c == ';') c = ' ';
  std::stringstream ns(normalized);
  while (ns >> item) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw model_error("bad number in list: '" + item + "'");
    }
  }
  return out;
}

void Config::put(const std::string& section, const std::string& key,
                 const std::string& value) {
  check_key(section, key);
  kv_[section][key] = value;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw model_error("line " + std::to_string(line_no) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw model_error("line " + std::to_string(line_no) + ": empty section");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw model_error("line " + std::to_string(line_no) +
                        ": expected key = value");
    if (section.empty())
      throw model_error("line " + std::to_string(line_no) +
                        ": key before any [section]");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw model_error("line " + std::to_string(line_no) + ": empty key");
    cfg.put(section, key, value);
  }
  return cfg;
}

Config Config::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw model_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse(buf.str());
}

void Config::set(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw model_error("override must look like section.key=value");
  std::string lhs = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  auto dot = lhs.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == lhs.size())
    throw model_error("override must look like section.key=value");
  put(lhs.substr(0, dot), lhs.substr(dot + 1), value);
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = kv_.find(section);
  return s != kv_.end() && s->second.count(key) > 0;
}

std::string Config::get_string(const std::string& section,
                               const std::string& key) const {
  auto s = kv_.find(section);
  if (s != kv_.end()) {
    auto k = s->second.find(key);
    if (k != s->second.end()) return k->second;
  }
  throw model_error("missing config key " + section + "." + key);
}

std::string Config::get_string(const std::string& section,
                               const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_double(const std::string& section,
                          const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw model_error(section + "." + key + " is not a number: '" + v + "'");
  }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long long Config::get_int(const std::string& section,
                          const std::string& key) const {
  const std::string v = get_string(section, key);
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw model_error(section + "." + key + " is not an integer: '" + v + "'");
  return out;
}

long long Config::get_int(const std::string& section, const std::string& key,
                          long long fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::vector<double> Config::get_list(const std::string& section,
                                     const std::string& key) const {
  return parse_double_list(get_string(section, key));
}

std::string Config::canonical_model_run() const {
  std::string out;
  for (const char* section : {"model", "run"}) {
    auto s = kv_.find(section);
    if (s == kv_.end()) continue;
    out += '[';
    out += section;
    out += "]\n";
    for (const auto& [k, v] : s->second) {  // std::map: already sorted
      out += k;
      out += '=';
      out += v;
      out += '\n';
    }
  }
  return out;
}

std::uint64_t Config::hash() const {
  const std::string s = canonical_model_run();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

ErgodicModel Config::model() const {
  const std::string kind = get_string("model", "kind");
  const int l = static_cast<int>(get_int("model", "l", 1));
  if (kind == "free") return ErgodicModel::free_model(l);
  if (kind == "rotation") {
    const std::string sym = get_string("model", "d_symbol", "constant");
    RotationHop hop;
    if (sym == "constant")
      hop = RotationHop::Constant;
    else if (sym == "cosine")
      hop = RotationHop::Cosine;
    else
      throw model_error("model.d_symbol must be constant or cosine");
    return ErgodicModel::rotation(l, get_double("model", "alpha"),
                    get_double("model", "theta0", 0.0),
                    get_double("model", "lambda"), hop,
                    get_double("model", "d_const", 1.0));
  }
  if (kind == "iid") {
    return ErgodicModel::iid(l, static_cast<std::uint64_t>(get_int("model", "seed", 1)),
               get_double("model", "d_lo"), get_double("model", "d_hi"),
               get_double("model", "v_lo"), get_double("model", "v_hi"),
               get_double("model", "d_det_target", 0.05));
  }
  if (kind == "periodic") {
    const int p = static_cast<int>(get_int("model", "period"));
    if (p < 1) throw model_error("model.period must be >= 1");
    std::vector<Eigen::MatrixXd> ds, vs;
    for (int k = 0; k < p; ++k) {
      ds.push_back(square_from_list(get_list("model", "d_" + std::to_string(k)),
                                    l, "model.d_" + std::to_string(k)));
      vs.push_back(square_from_list(get_list("model", "v_" + std::to_string(k)),
                                    l, "model.v_" + std::to_string(k)));
    }
    return ErgodicModel::periodic(ds, vs);
  }
  throw model_error("unknown model.kind: " + kind);
}

}  // namespace kotani
