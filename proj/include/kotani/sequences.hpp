#pragma once
// Two-sided finite windows of vector/matrix sequences indexed by lattice
// site.  `offset` is the site of the first stored entry; windows never wrap.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace kotani {

struct VectorSeq {
  long long offset = 0;
  std::vector<Eigen::VectorXcd> values;

  long long begin() const { return offset; }
  long long end() const { return offset + static_cast<long long>(values.size()); }
  bool contains(long long n) const { return n >= begin() && n < end(); }
  const Eigen::VectorXcd& at(long long n) const {
    if (!contains(n)) throw std::out_of_range("VectorSeq: site outside window");
    return values[static_cast<std::size_t>(n - offset)];
  }
  Eigen::VectorXcd& at(long long n) {
    if (!contains(n)) throw std::out_of_range("VectorSeq: site outside window");
    return values[static_cast<std::size_t>(n - offset)];
  }
};

// Matrix windows carry an optional per-block log scale: the represented
// value at site n is block(n) * exp(log_scale_at(n)).  An empty ledger
// means every scale is zero.  Scaled form keeps long windows of
// exponentially growing or decaying solutions inside double range.
struct MatrixSeq {
  long long offset = 0;
  std::vector<Eigen::MatrixXcd> values;
  std::vector<double> log_scale;

  long long begin() const { return offset; }
  long long end() const { return offset + static_cast<long long>(values.size()); }
  bool contains(long long n) const { return n >= begin() && n < end(); }

  const Eigen::MatrixXcd& block(long long n) const {
    if (!contains(n)) throw std::out_of_range("MatrixSeq: site outside window");
    return values[static_cast<std::size_t>(n - offset)];
  }
  double log_scale_at(long long n) const {
    if (!contains(n)) throw std::out_of_range("MatrixSeq: site outside window");
    if (log_scale.empty()) return 0.0;
    return log_scale[static_cast<std::size_t>(n - offset)];
  }
  // true value; may overflow to inf for strongly scaled blocks, by design
  Eigen::MatrixXcd value(long long n) const {
    return block(n) * std::exp(log_scale_at(n));
  }
};

}  // namespace kotani
