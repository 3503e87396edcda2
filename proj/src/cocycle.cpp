#include "kotani/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kotani/errors.hpp"
#include "kotani/operator_core.hpp"

namespace kotani {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kRawEntryCap = 1e150;

MatrixXcd one_step(const ErgodicModel& model, std::complex<double> z,
                   long long site_index, int direction) {
  // direction -1 consumes sites -1, -2, ... via symplectic inverses
  if (direction > 0) {
    auto site = sample_site(model, site_index);
    return cocycle_matrix(site, z);
  }
  auto site = sample_site(model, -site_index - 1);
  return symplectic_inverse(cocycle_matrix(site, z));
}

}  // namespace

MatrixXcd cocycle_matrix(const SitePayload& site, std::complex<double> z) {
  const int l = static_cast<int>(site.D.rows());
  MatrixXd d_inv = invert_hop(site.D, -1);
  MatrixXcd a(2 * l, 2 * l);
  a.topLeftCorner(l, l) =
      d_inv * (z * MatrixXcd::Identity(l, l) - site.V.cast<std::complex<double>>());
  a.topRightCorner(l, l) = -d_inv.cast<std::complex<double>>();
  a.bottomLeftCorner(l, l) = site.D.cast<std::complex<double>>();
  a.bottomRightCorner(l, l).setZero();
  return a;
}

MatrixXcd symplectic_form(int l) {
  MatrixXcd j = MatrixXcd::Zero(2 * l, 2 * l);
  j.topRightCorner(l, l) = MatrixXcd::Identity(l, l);
  j.bottomLeftCorner(l, l) = -MatrixXcd::Identity(l, l);
  return j;
}

double symplectic_defect(const MatrixXcd& a) {
  const int l = static_cast<int>(a.rows()) / 2;
  MatrixXcd j = symplectic_form(l);
  return (a.transpose() * j * a - j).norm();
}

MatrixXcd symplectic_inverse(const MatrixXcd& a) {
  const int l = static_cast<int>(a.rows()) / 2;
  MatrixXcd j = symplectic_form(l);
  // J^{-1} = -J
  return -j * a.transpose() * j;
}

MatrixXcd transfer_product(const ErgodicModel& model, std::complex<double> z,
                           long long n) {
  if (std::llabs(n) > 30)
    throw std::invalid_argument(
        "transfer_product is capped at |n| <= 30; use lyapunov_spectrum for "
        "growth rates");
  const int l = model.l;
  MatrixXcd prod = MatrixXcd::Identity(2 * l, 2 * l);
  if (n >= 1) {
    for (long long k = 0; k < n; ++k) {
      prod = (cocycle_matrix(sample_site(model, k), z) * prod).eval();
      if (prod.cwiseAbs().maxCoeff() > kRawEntryCap)
        throw scale_error("transfer product left the representable range");
    }
  } else if (n <= -1) {
    for (long long k = -1; k >= n; --k) {
      prod = (symplectic_inverse(cocycle_matrix(sample_site(model, k), z)) *
              prod).eval();
      if (prod.cwiseAbs().maxCoeff() > kRawEntryCap)
        throw scale_error("transfer product left the representable range");
    }
  }
  return prod;
}

TransferAccumulator::TransferAccumulator(const ErgodicModel& model,
                                         std::complex<double> z, int direction,
                                         int reorth_period)
    : model_(model), z_(z), direction_(direction >= 0 ? +1 : -1),
      reorth_period_(reorth_period) {
  if (reorth_period < 1) throw std::invalid_argument("reorth_period must be >= 1");
  frame_ = MatrixXcd::Identity(2 * model.l, 2 * model.l);
  log_sums_ = VectorXd::Zero(2 * model.l);
}

void TransferAccumulator::reorthonormalize() {
  if (pending_ == 0) return;
  Eigen::HouseholderQR<MatrixXcd> qr(frame_);
  MatrixXcd q = qr.householderQ();
  MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < r.rows(); ++j) {
    const double mag = std::abs(r(j, j));
    if (!(mag > 0.0) || !std::isfinite(mag))
      throw numeric_error(
          "degenerate frame during re-orthonormalization; retry with a "
          "smaller reorth_period");
    // rotate column phases so diag(R) becomes positive real
    q.col(j) *= r(j, j) / mag;
    log_sums_(j) += std::log(mag);
  }
  frame_ = q;
  pending_ = 0;
}

void TransferAccumulator::advance(long long count) {
  for (long long k = 0; k < count; ++k) {
    frame_ = (one_step(model_, z_, steps_done_, direction_) * frame_).eval();
    ++steps_done_;
    if (++pending_ >= reorth_period_) reorthonormalize();
  }
  reorthonormalize();  // block boundaries always land on a clean frame
}

double TransferAccumulator::gram_defect() const {
  const auto dim = frame_.cols();
  return (frame_.adjoint() * frame_ - MatrixXcd::Identity(dim, dim)).norm();
}

double LyapunovSpectrum::partial_sum(int j) const {
  if (j < 1 || j > exponents.size())
    throw std::invalid_argument("partial sum order out of range");
  return exponents.head(j).sum();
}

double LyapunovSpectrum::partial_sum_se(int j) const {
  if (j < 1 || j > exponents.size())
    throw std::invalid_argument("partial sum order out of range");
  const int nb = static_cast<int>(block_means.rows());
  if (nb < 2) return 0.0;
  Eigen::VectorXd sums = block_means.leftCols(j).rowwise().sum();
  const double mean = sums.mean();
  const double var = (sums.array() - mean).square().sum() / (nb - 1);
  return std::sqrt(var / nb);
}

LyapunovSpectrum lyapunov_spectrum(const ErgodicModel& model,
                                   std::complex<double> z, long long steps,
                                   int reorth_period, int direction,
                                   int n_blocks) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (n_blocks < 1) throw std::invalid_argument("n_blocks must be >= 1");
  if (steps < 10LL * n_blocks)
    n_blocks = std::max(1, static_cast<int>(steps / 10));

  TransferAccumulator acc(model, z, direction, reorth_period);
  const int dim = 2 * model.l;
  Eigen::MatrixXd block_means(n_blocks, dim);
  Eigen::VectorXd prev = VectorXd::Zero(dim);
  long long done = 0;
  for (int b = 0; b < n_blocks; ++b) {
    const long long target = steps * (b + 1) / n_blocks;
    const long long len = target - done;
    acc.advance(len);
    done = target;
    block_means.row(b) = (acc.log_sums() - prev).transpose() / double(len);
    prev = acc.log_sums();
  }

  LyapunovSpectrum spec;
  spec.z = z;
  spec.steps = steps;
  spec.reorth_period = reorth_period;
  VectorXd raw = acc.log_sums() / double(steps);

  // sort descending, carrying block columns and errors along
  std::vector<int> order(dim);
  for (int i = 0; i < dim; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return raw(a) > raw(b); });
  spec.exponents.resize(dim);
  spec.std_error.resize(dim);
  spec.block_means.resize(n_blocks, dim);
  for (int i = 0; i < dim; ++i) {
    spec.exponents(i) = raw(order[i]);
    spec.block_means.col(i) = block_means.col(order[i]);
    const double mean = block_means.col(order[i]).mean();
    double se = 0.0;
    if (n_blocks >= 2) {
      const double var =
          (block_means.col(order[i]).array() - mean).square().sum() /
          (n_blocks - 1);
      se = std::sqrt(var / n_blocks);
    }
    spec.std_error(i) = se;
  }
  return spec;
}

}  // namespace kotani
