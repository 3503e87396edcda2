#pragma once
// Symplectic transfer cocycle of the operator.  With J = [[0, I], [-I, 0]],
// the one-step matrix at a site (D, V) and energy z,
//
//   A_z = [ D^{-1}(z - V)   -D^{-1} ]
//         [ D                 0     ]   (2l x 2l),
//
// satisfies A^t J A = J exactly in exact arithmetic, so its inverse is the
// symplectic inverse J^{-1} A^t J and its singular values come in pairs
// s, 1/s.  Products over a stationary orbit,
//
//   A_n = A_z(T^{n-1} w) ... A_z(w)     (n >= 1, A_0 = I),
//   A_n = A_z^{-1}(T^n w) ... A_z^{-1}(T^{-1} w)     (n <= -1),
//
// have Lyapunov exponents g_1 >= ... >= g_{2l} with g_j = -g_{2l+1-j};
// partial sums of the leading j exponents measure exterior-power growth.

#include <complex>

#include <Eigen/Dense>

#include "kotani/ergodic_model.hpp"

namespace kotani {

Eigen::MatrixXcd cocycle_matrix(const SitePayload& site, std::complex<double> z);

// J for block size l
Eigen::MatrixXcd symplectic_form(int l);

// || A^t J A - J ||_F
double symplectic_defect(const Eigen::MatrixXcd& a);

// J^{-1} A^t J; exact inverse for symplectic A, no factorization involved
Eigen::MatrixXcd symplectic_inverse(const Eigen::MatrixXcd& a);

// A_n with the conventions above.  Raw products only: |n| <= 30, and entry
// growth beyond 1e150 raises scale_error (use lyapunov_spectrum for rates).
Eigen::MatrixXcd transfer_product(const ErgodicModel& model,
                                  std::complex<double> z, long long n);

struct LyapunovSpectrum {
  std::complex<double> z;
  Eigen::VectorXd exponents;    // descending, size 2l
  Eigen::VectorXd std_error;    // per exponent, from block averaging
  Eigen::MatrixXd block_means;  // n_blocks x 2l per-step growth rates
  long long steps = 0;
  int reorth_period = 0;

  // sum of the leading j exponents and its block standard error
  double partial_sum(int j) const;
  double partial_sum_se(int j) const;
};

// QR growth estimator: carry an orthonormal frame, multiply one-step
// matrices, re-factor every reorth_period steps, and accumulate
// log |diag R| (diagonal sign-fixed to positive reals).
struct TransferAccumulator {
  TransferAccumulator(const ErgodicModel& model, std::complex<double> z,
                      int direction = +1, int reorth_period = 5);

  // multiply `count` further one-step matrices into the frame
  void advance(long long count);

  // accumulated log-diagonal sums (unsorted frame order)
  const Eigen::VectorXd& log_sums() const { return log_sums_; }
  long long steps_done() const { return steps_done_; }
  // || Q^* Q - I ||_F of the carried frame
  double gram_defect() const;

 private:
  void reorthonormalize();

  ErgodicModel model_;
  std::complex<double> z_;
  int direction_;
  int reorth_period_;
  long long steps_done_ = 0;
  long long pending_ = 0;
  Eigen::MatrixXcd frame_;
  Eigen::VectorXd log_sums_;
};

LyapunovSpectrum lyapunov_spectrum(const ErgodicModel& model,
                                   std::complex<double> z,
                                   long long steps = 100000,
                                   int reorth_period = 5, int direction = +1,
                                   int n_blocks = 100);

}  // namespace kotani
