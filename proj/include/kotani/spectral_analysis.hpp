#pragma once
// Density of states and the identities tying it to exponent sums and Weyl
// boundary data.
//
// Empirical integrated density of states of the truncation to sites 1..N:
// k_N(x) = #{eigenvalues <= x} / N, so k_N(+oo) = l.  The log-potential
// identity ties the exponent sum to it:
//
//   g(z) := g_1(z) + ... + g_l(z)
//         = integral log|z - x| dk(x) - E[ log |det D| ] ,
//
// and for Im z = y > 0 the mean boundary identity and its relatives hold:
//
//   E[ log |det( I + y * (D_n Im M_n D_n)^{-1} )| ]  = 2 g(z) ,
//   E[ 1 / ( tr[D_n Im M_n D_n] + y/2 ) ]           <= 2 g(z) / y ,
//   sum_{k<=j} E[ log(1 + y/mu_k) ]                 <= 2 (g_{l-j+1}+...+g_l) ,
//
// with mu_1 >= ... >= mu_l the eigenvalues of D_n Im M_n D_n.  The AC scan
// classifies spectral multiplicity on a real energy grid by combining the
// count of vanishing exponents with the rank of the boundary limit of Im M
// on both half-lines.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kotani/cocycle.hpp"
#include "kotani/ergodic_model.hpp"
#include "kotani/weyl_green.hpp"

namespace kotani {

struct IDSHistogram {
  long long N = 0;
  int l = 1;
  Eigen::VectorXd eigenvalues;  // sorted ascending, size N*l

  // k_N(x) = #{lambda <= x} / N
  double value(double x) const;
};

// Dirichlet truncation eigenvalues via a banded symmetric eigensolver.
IDSHistogram ids_empirical(const ErgodicModel& model, long long N);

// sup_x | k_a(x) - k_b(x) |
double ids_sup_distance(const IDSHistogram& a, const IDSHistogram& b);

struct ThoulessReport {
  std::complex<double> z;
  double gamma = 0.0;      // exponent partial sum g(z)
  double gamma_se = 0.0;
  double log_term = 0.0;   // (1/N) sum_k log|z - lambda_k|
  double det_term = 0.0;   // orbit average of log|det D|
  double rhs = 0.0;        // log_term - det_term
  double defect = 0.0;     // |gamma - rhs|
  long long N = 0;
  long long steps = 0;
};

ThoulessReport thouless_check(const ErgodicModel& model,
                              std::complex<double> z, long long N,
                              long long steps);

struct NormalDerivativeReport {
  double x = 0.0;
  double gamma_x = 0.0;
  double gamma_x_se = 0.0;
  std::vector<double> ladder;     // y rungs, descending
  std::vector<double> quotients;  // (g(x+iy) - g(x)) / y per rung
  double limit = 0.0;             // linear extrapolation from the two smallest rungs
  double surrogate = 0.0;         // (1/N) sum_k 1/|x - lambda_k|
  bool surrogate_finite = false;
  double min_eig_distance = 0.0;  // distance from x to the nearest eigenvalue
};

NormalDerivativeReport gamma_normal_derivative(
    const ErgodicModel& model, double x, const std::vector<double>& y_ladder,
    long long N, long long steps);

struct KotaniReport {
  std::complex<double> z;
  long long orbit = 0;
  long long steps = 0;
  double lhs = 0.0;         // orbit mean of log|det(I + y (D Im M D)^{-1})|
  double lhs_se = 0.0;
  double two_gamma = 0.0;   // 2 g(z) from the exponent estimator
  double two_gamma_se = 0.0;
  double defect = 0.0;
  double rel_defect = 0.0;
  double trace_bound_lhs = 0.0;  // orbit mean of 1/(tr[D Im M D] + y/2)
  double trace_bound_rhs = 0.0;  // 2 g(z)/y
  bool trace_bound_holds = false;
  std::vector<double> partial_lhs;  // per j = 1..l
  std::vector<double> partial_rhs;  // 2 * (sum of j smallest positive exponents)
  std::vector<bool> partial_holds;
  Eigen::VectorXd mu0;  // eigenvalues of D_0 Im M_0 D_0, descending
};

KotaniReport kotani_mean_identity(const ErgodicModel& model,
                                  std::complex<double> z, long long orbit,
                                  long long steps = 100000);

struct ACScanRow {
  double x = 0.0;
  int n_zero_exponents = 0;
  double zero_tol = 0.0;
  double gamma_min_abs = 0.0;  // smallest |exponent|
  double gamma_top = 0.0;      // largest exponent
  int rank_plus = 0;
  int rank_minus = 0;
  bool ranks_agree = false;
  int r = 0;              // min(rank_plus, rank_minus)
  int multiplicity = 0;   // 2r, even by construction
  bool trace_divergent_plus = false;
  bool trace_divergent_minus = false;
  std::vector<double> trace_plus;   // tr Im M^+ per converged rung
  std::vector<double> trace_minus;
  std::string status = "ok";
};

struct ACScanReport {
  std::vector<double> y_ladder;
  long long steps = 0;
  std::vector<ACScanRow> rows;
};

// Scan real energies: exponent zero count (tolerance max(1e-2, 3*SE)),
// boundary rank of Im M on both half-lines from the smallest converged
// rungs, trace-divergence flags, and the resulting multiplicity 2r.
// Per-energy failures land in `status`, never abort the scan.
ACScanReport ac_scan(const ErgodicModel& model, const std::vector<double>& x_grid,
                     const std::vector<double>& y_ladder, long long steps);

inline std::vector<double> default_y_ladder() {
  return {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
}

struct MonotonicityReport {
  double x = 0.0, y = 0.0;
  int column = 0;
  long long n_max = 0;
  bool precondition_ok = false;  // real-energy solution found and square-summable
  double tail_ratio = 0.0;       // trailing-quarter energy ratio, < 1 means decay
  double norm_sq_real = 0.0;     // sum_{m>=1} |f_m(x)|^2 for the chosen column
  double norm_sq_lifted = 0.0;   // same at x + iy
  bool holds = false;            // lifted <= real (within roundoff slack)
};

// Square-summable column norms never grow when the energy moves off the
// real axis.  The real-energy solution is built by stripping at Im z = 0,
// which requires the energy to sit where that iteration converges; failures
// are reported through precondition_ok.
MonotonicityReport solution_norm_monotonicity_check(const ErgodicModel& model,
                                                    double x, double y,
                                                    int column,
                                                    long long n_max);

}  // namespace kotani
