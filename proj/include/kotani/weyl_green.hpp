#pragma once
// Half-line Weyl matrices, square-summable (Jost) solutions, and the Green
// kernel.
//
// M(z) is the Weyl matrix of the Dirichlet half-line operator at Im z > 0:
// symmetric (M = M^t, not Hermitian) with positive definite imaginary part
// Im M = (M - M^*)/(2i).  It obeys the coefficient stripping relation
//
//   M_{n-1} = (V_n - z I - D_n M_n D_n)^{-1},   M_n(w) = M_0(T^n w),
//
// which contracts downward from any Herglotz seed; the fixed point of the
// free scalar case solves M^2 + z M + 1 = 0.  The square-summable solution
// F normalized by F_0 = I is rebuilt forward,
//
//   F_{m+1} = -M_0(T^m w) D_m F_m ,
//
// consistent with M = -F_1 D_0^{-1}, and satisfies the summed identity
//
//   D_0 Im M(z) D_0 = Im z * sum_{k>=1} F_k^* F_k .
//
// The Green kernel couples F to the Dirichlet solution phi:
//
//   G(p, q) = -phi_p D_0^{-1} F_q^t  (p <= q),
//   G(p, q) = -F_p D_0^{-1} phi_q^t  (p > q),     G(1, 1) = M(z).

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "kotani/ergodic_model.hpp"
#include "kotani/sequences.hpp"

namespace kotani {

struct WeylMatrix {
  std::complex<double> z;
  int half_line = +1;       // +1: sites >= 1; -1: sites <= -1 (reflected)
  Eigen::MatrixXcd m;
  int depth = 0;            // stripping depth actually used
  double residual = 0.0;    // seed-insensitivity residual at that depth
  bool converged = false;
};

// Coefficient stripping with adaptive depth (depth = 0: start at 200 and
// double to 12800 until the residual beats tol).  The residual compares
// runs started at depth and depth-5; seed defaults to i*I.  Non-finite
// iterates raise convergence_error; a residual that merely misses tol is
// reported through `converged` so ladder scans can keep the rung.
WeylMatrix weyl_m(const ErgodicModel& model, std::complex<double> z,
                  int half_line = +1, int depth = 0,
                  const Eigen::MatrixXcd& seed = Eigen::MatrixXcd(),
                  double tol = 1e-10);

// M_0(T^n w) for n = 0..count-1 from one backward pass seeded count+depth
// strips up (+ half-line of the given model).
std::vector<Eigen::MatrixXcd> weyl_m_orbit(const ErgodicModel& model,
                                           std::complex<double> z,
                                           long long count, int depth);

struct JostSequence {
  std::complex<double> z;
  MatrixSeq blocks;          // F_0..F_n_max, always in scaled form
  double tail_fraction = 0.0;  // geometric estimate of sum_{k>n_max}/total
};

// F_0 = I and the forward reconstruction above, blocks unit-normalized with
// a per-block log ledger.
JostSequence jost_sequence(const ErgodicModel& model, std::complex<double> z,
                           long long n_max);

// Relative defect of the summed identity over k = 1..n_max.
double m_sum_identity_defect(const ErgodicModel& model, std::complex<double> z,
                             long long n_max);

// Green kernel with phi and F cached up to n_max; entries on demand.
class GreenKernel {
 public:
  GreenKernel(const ErgodicModel& model, std::complex<double> z,
              long long n_max);
  Eigen::MatrixXcd entry(long long p, long long q) const;
  // (G u)_p for p in [p_begin, p_end]; u supported inside the cache window
  VectorSeq apply(const VectorSeq& u, long long p_begin, long long p_end) const;
  std::complex<double> z() const { return z_; }

 private:
  std::complex<double> z_;
  long long n_max_;
  Eigen::MatrixXd d0_inv_;
  std::vector<Eigen::MatrixXcd> phi_;  // phi_0..phi_{n_max}
  std::vector<Eigen::MatrixXcd> f_;    // F_0..F_{n_max}
};

// (M - M^*) / (2i)
Eigen::MatrixXcd hermitian_imag(const Eigen::MatrixXcd& m);

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
  bool operator==(const Inertia&) const = default;
};

// Eigenvalue sign counts of Hermitian b and of x^* b x, with eigenvalues
// below 1e-10 * ||.|| counted as zero.  Congruence preserves the counts.
std::pair<Inertia, Inertia> inertia(const Eigen::MatrixXcd& b,
                                    const Eigen::MatrixXcd& x);

// Rank of a Hermitian PSD matrix with singular values below
// rel_eps * sigma_max counted as zero.
int hermitian_rank(const Eigen::MatrixXcd& m, double rel_eps = 1e-6);

}  // namespace kotani
