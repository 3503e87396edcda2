#include "kotani/operator_core.hpp"

#include <cmath>
#include <limits>

#include "kotani/errors.hpp"

namespace kotani {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

// bilinear pairing <a, conj(b)> = sum_i a_i b_i
Complex bilinear(const VectorXcd& a, const VectorXcd& b) {
  return (a.transpose() * b)(0);
}

constexpr double kRawEntryCap = 1e150;

}  // namespace

MatrixXd invert_hop(const MatrixXd& d, long long site) {
  Eigen::JacobiSVD<MatrixXd> svd(d, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  const double smax = s(0);
  if (!(smin > 0.0) || smax / smin > 1e12)
    throw singular_hop_error(site, smin > 0.0 ? smax / smin
                                              : std::numeric_limits<double>::infinity());
  return svd.solve(MatrixXd::Identity(d.rows(), d.cols()));
}

VectorSeq apply_operator(const ErgodicModel& model, const VectorSeq& u,
                         long long n_begin, long long n_end) {
  if (n_begin > n_end) throw std::invalid_argument("empty application range");
  if (!u.contains(n_begin - 1) || !u.contains(n_end + 1))
    throw std::out_of_range("apply_operator: window must cover the stencil");
  VectorSeq out;
  out.offset = n_begin;
  out.values.reserve(static_cast<std::size_t>(n_end - n_begin + 1));
  // walk the window once, reusing the shared hop between neighbors
  MatrixXd d_prev = sample_site(model, n_begin - 1).D;
  for (long long n = n_begin; n <= n_end; ++n) {
    auto site = sample_site(model, n);
    out.values.push_back(d_prev * u.at(n - 1) + site.D * u.at(n + 1) +
                         site.V * u.at(n));
    d_prev = site.D;
  }
  return out;
}

Complex wronskian(const ErgodicModel& model, const VectorSeq& u,
                  const VectorSeq& v, long long n) {
  const MatrixXd d = sample_site(model, n - 1).D;
  return bilinear(u.at(n), d * v.at(n - 1)) - bilinear(v.at(n), d * u.at(n - 1));
}

double green_formula_defect(const ErgodicModel& model, const VectorSeq& u,
                            const VectorSeq& v, long long m, long long n) {
  if (m > n) throw std::invalid_argument("empty summation range");
  VectorSeq hu = apply_operator(model, u, m, n);
  VectorSeq hv = apply_operator(model, v, m, n);
  Complex lhs = 0.0;
  for (long long k = m; k <= n; ++k)
    lhs += bilinear(hu.at(k), v.at(k)) - bilinear(hv.at(k), u.at(k));
  Complex rhs = wronskian(model, u, v, n + 1) - wronskian(model, u, v, m);
  return std::abs(lhs - rhs);
}

MatrixXcd matrix_wronskian(const ErgodicModel& model, const MatrixSeq& a,
                           const MatrixSeq& b, long long m) {
  const MatrixXd d = sample_site(model, m - 1).D;
  return a.value(m - 1).transpose() * d * b.value(m) -
         a.value(m).transpose() * d * b.value(m - 1);
}

SolutionPair dirichlet_neumann_solutions(const ErgodicModel& model, Complex z,
                                         long long n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  const int l = model.l;
  const bool scaled = n_max > 200 || std::abs(z) > 10.0;

  SolutionPair out;
  for (auto* seq : {&out.neumann, &out.dirichlet}) {
    seq->offset = 0;
    seq->values.reserve(static_cast<std::size_t>(n_max + 1));
    if (scaled) seq->log_scale.reserve(static_cast<std::size_t>(n_max + 1));
  }

  // carried frames; both solutions share one scale ledger so that linear
  // combinations of the pair remain meaningful blockwise
  MatrixXcd psi_prev = MatrixXcd::Identity(l, l);  // psi_0
  MatrixXcd psi_cur = MatrixXcd::Zero(l, l);       // psi_1
  MatrixXcd phi_prev = MatrixXcd::Zero(l, l);      // phi_0
  MatrixXcd phi_cur = MatrixXcd::Identity(l, l);   // phi_1
  double ledger = 0.0;

  auto push = [&](const MatrixXcd& psi, const MatrixXcd& phi) {
    out.neumann.values.push_back(psi);
    out.dirichlet.values.push_back(phi);
    if (scaled) {
      out.neumann.log_scale.push_back(ledger);
      out.dirichlet.log_scale.push_back(ledger);
    }
  };
  push(psi_prev, phi_prev);
  if (n_max >= 1) push(psi_cur, phi_cur);

  MatrixXd d_prev = sample_site(model, 0).D;
  for (long long n = 1; n < n_max; ++n) {
    auto site = sample_site(model, n);
    MatrixXd d_inv = invert_hop(site.D, n);
    MatrixXcd zv = z * MatrixXcd::Identity(l, l) - site.V;
    MatrixXcd psi_next = d_inv * (zv * psi_cur - d_prev * psi_prev);
    MatrixXcd phi_next = d_inv * (zv * phi_cur - d_prev * phi_prev);
    if (scaled) {
      double mag = std::max(psi_next.norm(), phi_next.norm());
      if (mag > 1e50) {
        psi_next /= mag;
        phi_next /= mag;
        psi_cur /= mag;
        phi_cur /= mag;
        ledger += std::log(mag);
      }
    } else {
      double mag = std::max(psi_next.cwiseAbs().maxCoeff(),
                            phi_next.cwiseAbs().maxCoeff());
      if (mag > kRawEntryCap)
        throw scale_error(
            "solution entries exceeded raw range; request the scaled form "
            "(n_max > 200) instead");
    }
    psi_prev = psi_cur;
    psi_cur = psi_next;
    phi_prev = phi_cur;
    phi_cur = phi_next;
    push(psi_cur, phi_cur);
    d_prev = site.D;
  }
  return out;
}

Eigen::MatrixXd finite_dirichlet_matrix(const ErgodicModel& model, long long N) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (N * model.l > 5000)
    throw std::invalid_argument("truncation budget exceeded: N*l must be <= 5000");
  const int l = model.l;
  const long long dim = N * l;
  MatrixXd h = MatrixXd::Zero(dim, dim);
  for (long long b = 0; b < N; ++b) {
    auto site = sample_site(model, b + 1);
    h.block(b * l, b * l, l, l) = site.V;
    if (b + 1 < N) {
      // coupling between site blocks b+1 and b+2 is D_{b+1}
      h.block((b + 1) * l, b * l, l, l) = site.D.transpose();
      h.block(b * l, (b + 1) * l, l, l) = site.D;
    }
  }
  return h;
}

BandedSym finite_dirichlet_banded(const ErgodicModel& model, long long N) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (N * model.l > 5000)
    throw std::invalid_argument("truncation budget exceeded: N*l must be <= 5000");
  const int l = model.l;
  BandedSym band;
  band.n = N * l;
  band.kd = 2 * l - 1;
  const int ld = band.kd + 1;
  band.ab.assign(static_cast<std::size_t>(ld) * band.n, 0.0);
  auto put = [&](long long i, long long j, double x) {
    // lower banded storage: A(i, j) with j <= i <= j + kd
    band.ab[static_cast<std::size_t>(j) * ld + (i - j)] = x;
  };
  for (long long b = 0; b < N; ++b) {
    auto site = sample_site(model, b + 1);
    for (int a = 0; a < l; ++a)
      for (int c = 0; c <= a; ++c) put(b * l + a, b * l + c, site.V(a, c));
    if (b + 1 < N)
      for (int a = 0; a < l; ++a)
        for (int c = 0; c < l; ++c)
          put((b + 1) * l + a, b * l + c, site.D(c, a));
  }
  return band;
}

}  // namespace kotani
