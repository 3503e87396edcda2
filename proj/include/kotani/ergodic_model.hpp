#pragma once
// Stationary site data for matrix Jacobi operators on l^2(Z; C^l):
//
//     (H u)_n = D_{n-1} u_{n-1} + D_n u_{n+1} + V_n u_n ,
//
// where D_n = D(T^n w) is real symmetric invertible and V_n = V(T^n w) is
// real symmetric.  A model bundles a base system T with the two matrix
// symbols.  Sampling is a pure function of (model, n): repeated evaluation
// at the same site is bit-identical, sites may be visited in any order,
// and both half-lines n -> +/-oo are reachable.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "kotani/errors.hpp"

namespace kotani {

// |det D_n| never drops below this; sampling enforces it by construction.
inline constexpr double kDetFloor = 1e-8;

struct SitePayload {
  Eigen::MatrixXd D;  // hop matrix, real symmetric, |det| >= kDetFloor
  Eigen::MatrixXd V;  // potential, real symmetric
};

enum class ModelKind { Free, Rotation, Iid, Periodic };

// Hop symbol choices for the rotation kind.
enum class RotationHop { Constant, Cosine };

// A model is value-semantic and cheap to copy.  The affine index map
// (sigma, tau_d, tau_v) realizes shifts and space reflection on top of the
// base sampler, so shifted/reflected views stay pure and allocation-free.
struct ErgodicModel {
  ModelKind kind = ModelKind::Free;
  int l = 1;

  // index transform: D_n is drawn at base index sigma*n + tau_d,
  // V_n at sigma*n + tau_v
  int sigma = 1;
  long long tau_d = 0;
  long long tau_v = 0;

  // rotation kind: theta_n = theta0 + n*alpha mod 1,
  // V(theta) = 2*lambda*cos(2*pi*theta)*I and a scalar hop symbol
  double alpha = 0.0;
  double theta0 = 0.0;
  double lambda = 0.0;
  RotationHop hop_symbol = RotationHop::Constant;
  double hop_const = 1.0;

  // iid kind: entrywise uniform draws keyed by (seed, site, entry)
  std::uint64_t seed = 0;
  double d_lo = 0.0, d_hi = 0.0;  // hop entry range
  double v_lo = 0.0, v_hi = 0.0;  // potential entry range
  // diagonal shift step and the |det| level the shift loop stops at;
  // the stop level may exceed kDetFloor but never undercuts it
  double d_shift = 0.5;
  double d_det_stop = 0.05;

  // periodic kind
  std::vector<Eigen::MatrixXd> period_d;
  std::vector<Eigen::MatrixXd> period_v;

  static ErgodicModel free_model(int l);
  static ErgodicModel rotation(int l, double alpha, double theta0,
                               double lambda, RotationHop hop,
                               double hop_const = 1.0);
  static ErgodicModel iid(int l, std::uint64_t seed, double d_lo, double d_hi,
                          double v_lo, double v_hi,
                          double d_det_stop = 0.05);
  static ErgodicModel periodic(std::vector<Eigen::MatrixXd> d_list,
                               std::vector<Eigen::MatrixXd> v_list);
};

// Site data at index n.  Throws model_error if the model is malformed.
SitePayload sample_site(const ErgodicModel& model, long long n);

// View of the same base realization with all indices moved by m:
// sample_site(shifted(model, m), n) == sample_site(model, n + m).
ErgodicModel shifted(const ErgodicModel& model, long long m);

// Space reflection n -> -n of the operator: the reflected model r satisfies
// r.D_n = D_{-n-1} and r.V_n = V_{-n}, so solutions of the reflected
// eigenvalue equation are exactly reflected solutions of the original.
ErgodicModel reflected(const ErgodicModel& model);

// (1/N) sum_{n=0}^{N-1} f(site_n), compensated summation.
double birkhoff_average(const ErgodicModel& model,
                        const std::function<double(const SitePayload&)>& f,
                        long long n_sites);

namespace detail {

// Counter-based generator: one 64-bit mix chain per (seed, site, entry).
// No stream state exists, which is what makes sampling order-free.
std::uint64_t site_hash(std::uint64_t seed, long long site, std::uint32_t entry);

// uniform double in [0, 1)
double unit_double(std::uint64_t seed, long long site, std::uint32_t entry);

}  // namespace detail

}  // namespace kotani
