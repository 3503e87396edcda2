#include "kotani/weyl_green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kotani/errors.hpp"
#include "kotani/operator_core.hpp"

namespace kotani {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr int kDepthStart = 200;
constexpr int kDepthCap = 12800;

// One stripping step: given M at orbit position n, produce M at n-1.
// Sites enter through the (possibly reflected) model view only.
MatrixXcd strip_step(const ErgodicModel& model, std::complex<double> z,
                     long long n, const MatrixXcd& m_n) {
  auto site = sample_site(model, n);
  const int l = model.l;
  MatrixXcd core = site.V.cast<std::complex<double>>() -
                   z * MatrixXcd::Identity(l, l) -
                   site.D * m_n * site.D;
  Eigen::PartialPivLU<MatrixXcd> lu(core);
  MatrixXcd out = lu.solve(MatrixXcd::Identity(l, l));
  if (!out.allFinite())
    throw convergence_error("coefficient stripping produced non-finite values",
                            static_cast<int>(n), std::nan(""));
  return out;
}

// backward pass: seed at orbit position `top`, return M_0..M_{keep-1}
std::vector<MatrixXcd> strip_down(const ErgodicModel& model,
                                  std::complex<double> z, long long top,
                                  long long keep, const MatrixXcd& seed) {
  std::vector<MatrixXcd> out(static_cast<std::size_t>(keep));
  MatrixXcd m = seed;
  for (long long n = top; n >= 1; --n) {
    m = strip_step(model, z, n, m);
    if (n - 1 < keep) out[static_cast<std::size_t>(n - 1)] = m;
  }
  return out;
}

MatrixXcd default_seed(int l) {
  return std::complex<double>(0.0, 1.0) * MatrixXcd::Identity(l, l);
}

}  // namespace

WeylMatrix weyl_m(const ErgodicModel& model, std::complex<double> z,
                  int half_line, int depth, const Eigen::MatrixXcd& seed,
                  double tol) {
  if (z.imag() < 0.0)
    throw std::invalid_argument("weyl_m needs Im z >= 0");
  const ErgodicModel view = half_line >= 0 ? model : reflected(model);
  const MatrixXcd s = seed.size() ? seed : default_seed(model.l);

  WeylMatrix w;
  w.z = z;
  w.half_line = half_line >= 0 ? +1 : -1;

  const bool adaptive = depth <= 0;
  int d = adaptive ? kDepthStart : depth;
  double prev_residual = std::numeric_limits<double>::infinity();
  for (;;) {
    MatrixXcd m_full = strip_down(view, z, d, 1, s)[0];
    MatrixXcd m_less = strip_down(view, z, d - 5, 1, s)[0];
    w.m = m_full;
    w.depth = d;
    w.residual = (m_full - m_less).norm();
    w.converged = w.residual < tol * (1.0 + m_full.norm());
    if (w.converged || !adaptive || d >= kDepthCap) break;
    if (w.residual > 10.0 * prev_residual && std::isfinite(prev_residual))
      throw convergence_error("coefficient stripping is not contracting", d,
                              w.residual);
    prev_residual = w.residual;
    d *= 2;
  }
  return w;
}

std::vector<MatrixXcd> weyl_m_orbit(const ErgodicModel& model,
                                    std::complex<double> z, long long count,
                                    int depth) {
  if (count < 1) throw std::invalid_argument("orbit length must be >= 1");
  if (depth < 10) throw std::invalid_argument("orbit depth must be >= 10");
  return strip_down(model, z, count + depth, count, default_seed(model.l));
}

JostSequence jost_sequence(const ErgodicModel& model, std::complex<double> z,
                           long long n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");

  // depth chosen by the adaptive Weyl solve at the same z
  WeylMatrix w0 = weyl_m(model, z);
  auto orbit = weyl_m_orbit(model, z, n_max, w0.depth);

  JostSequence jost;
  jost.z = z;
  jost.blocks.offset = 0;
  jost.blocks.values.reserve(static_cast<std::size_t>(n_max + 1));
  jost.blocks.log_scale.reserve(static_cast<std::size_t>(n_max + 1));

  const int l = model.l;
  MatrixXcd f = MatrixXcd::Identity(l, l);
  double ledger = 0.0;
  jost.blocks.values.push_back(f);
  jost.blocks.log_scale.push_back(0.0);
  for (long long m = 0; m < n_max; ++m) {
    const MatrixXd d_m = sample_site(model, m).D;
    f = (-orbit[static_cast<std::size_t>(m)] * d_m * f).eval();
    const double mag = f.norm();
    if (!(mag > 0.0) || !std::isfinite(mag))
      throw numeric_error("square-summable solution recursion degenerated");
    ledger += std::log(mag);
    f /= mag;
    jost.blocks.values.push_back(f);
    jost.blocks.log_scale.push_back(ledger);
  }

  // geometric tail estimate from the trailing per-step decay
  const auto& ls = jost.blocks.log_scale;
  const int window = static_cast<int>(std::min<long long>(10, n_max));
  double rate = (ls[ls.size() - 1] - ls[ls.size() - 1 - window]) / window;
  double total = 0.0;
  const double s_max = *std::max_element(ls.begin() + 1, ls.end());
  for (std::size_t k = 1; k < ls.size(); ++k)
    total += std::exp(2.0 * (ls[k] - s_max));
  double rho = std::exp(2.0 * rate);
  if (rho < 1.0) {
    const double last = std::exp(2.0 * (ls.back() - s_max));
    const double tail = last * rho / (1.0 - rho);
    jost.tail_fraction = tail / (total + tail);
  } else {
    jost.tail_fraction = 1.0;  // no detected decay
  }
  return jost;
}

double m_sum_identity_defect(const ErgodicModel& model, std::complex<double> z,
                             long long n_max) {
  if (!(z.imag() > 0.0))
    throw std::invalid_argument("the summed identity needs Im z > 0");
  WeylMatrix w = weyl_m(model, z);
  JostSequence jost = jost_sequence(model, z, n_max);
  const MatrixXd d0 = sample_site(model, 0).D;
  const int l = model.l;
  MatrixXcd lhs = d0 * hermitian_imag(w.m) * d0;
  MatrixXcd sum = MatrixXcd::Zero(l, l);
  for (long long k = 1; k <= n_max; ++k) {
    const MatrixXcd& fb = jost.blocks.block(k);
    const double s = jost.blocks.log_scale_at(k);
    sum += std::exp(2.0 * s) * (fb.adjoint() * fb);
  }
  return (lhs - z.imag() * sum).norm() / lhs.norm();
}

GreenKernel::GreenKernel(const ErgodicModel& model, std::complex<double> z,
                         long long n_max)
    : z_(z), n_max_(n_max) {
  if (!(z.imag() > 0.0))
    throw std::invalid_argument("green kernel needs Im z > 0");
  if (n_max < 2 || n_max > 200)
    throw std::invalid_argument("green kernel cache window must be in [2, 200]");
  d0_inv_ = invert_hop(sample_site(model, 0).D, 0);
  SolutionPair sols = dirichlet_neumann_solutions(model, z, n_max);
  JostSequence jost = jost_sequence(model, z, n_max);
  phi_.reserve(static_cast<std::size_t>(n_max + 1));
  f_.reserve(static_cast<std::size_t>(n_max + 1));
  for (long long n = 0; n <= n_max; ++n) {
    phi_.push_back(sols.dirichlet.value(n));
    f_.push_back(jost.blocks.value(n));
  }
}

MatrixXcd GreenKernel::entry(long long p, long long q) const {
  if (p < 0 || q < 0 || p > n_max_ || q > n_max_)
    throw std::out_of_range("green kernel entry outside the cache window");
  const auto pi = static_cast<std::size_t>(p);
  const auto qi = static_cast<std::size_t>(q);
  if (p <= q) return -phi_[pi] * d0_inv_ * f_[qi].transpose();
  return -f_[pi] * d0_inv_ * phi_[qi].transpose();
}

VectorSeq GreenKernel::apply(const VectorSeq& u, long long p_begin,
                             long long p_end) const {
  VectorSeq out;
  out.offset = p_begin;
  for (long long p = p_begin; p <= p_end; ++p) {
    VectorXcd acc = VectorXcd::Zero(d0_inv_.rows());
    for (long long q = u.begin(); q < u.end(); ++q)
      acc += entry(p, q) * u.at(q);
    out.values.push_back(acc);
  }
  return out;
}

MatrixXcd hermitian_imag(const MatrixXcd& m) {
  return (m - m.adjoint()) / std::complex<double>(0.0, 2.0);
}

std::pair<Inertia, Inertia> inertia(const MatrixXcd& b, const MatrixXcd& x) {
  auto count = [](const MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    const VectorXd ev = es.eigenvalues();
    const double cut = 1e-10 * std::max(1e-300, ev.cwiseAbs().maxCoeff());
    Inertia in;
    for (int i = 0; i < ev.size(); ++i) {
      if (ev(i) > cut) ++in.positive;
      else if (ev(i) < -cut) ++in.negative;
      else ++in.zero;
    }
    return in;
  };
  return {count(b), count(x.adjoint() * b * x)};
}

int hermitian_rank(const MatrixXcd& m, double rel_eps) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  const VectorXd ev = es.eigenvalues().cwiseAbs();
  const double top = ev.maxCoeff();
  if (!(top > 0.0)) return 0;
  int rank = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > rel_eps * top) ++rank;
  return rank;
}

}  // namespace kotani
