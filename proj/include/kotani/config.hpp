#pragma once

// INI-style run configuration.
//
// Three sections are recognized:
//   [model]   what operator family to sample (kind, l, and per-kind fields)
//   [run]     numerical knobs (z, steps, grids, ladders, ...)
//   [output]  where and how to write results (path, format)
//
// Unknown sections or keys are hard errors: a typo must never silently fall
// back to a default. The config hash covers [model] and [run] only, in a
// canonical sorted rendering, so moving the output file never changes the
// hash stamped into result bodies.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kotani/ergodic_model.hpp"

namespace kotani {

class Config {
 public:
  static Config parse(const std::string& text);
  static Config load_file(const std::string& path);

  // "section.key=value" override, validated like file input
  void set(const std::string& assignment);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long long get_int(const std::string& section, const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key,
                    long long fallback) const;
  std::vector<double> get_list(const std::string& section,
                               const std::string& key) const;

  // sorted [model] + [run] emit; identical content => identical bytes
  std::string canonical_model_run() const;
  std::uint64_t hash() const;  // FNV-1a 64 over canonical_model_run()

  ErgodicModel model() const;

 private:
  void put(const std::string& section, const std::string& key,
           const std::string& value);
  std::map<std::string, std::map<std::string, std::string>> kv_;
};

std::vector<double> parse_double_list(const std::string& text);

}  // namespace kotani
