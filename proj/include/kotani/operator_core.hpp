#pragma once
// The operator itself and its solution machinery.
//
//   (H u)_n = D_{n-1} u_{n-1} + D_n u_{n+1} + V_n u_n
//
// Wronskian of two sequences (bilinear, no conjugation):
//
//   W(n) = u_n^t D_{n-1} v_{n-1} - v_n^t D_{n-1} u_{n-1} ,
//
// constant in n when u, v solve (H - z)u = 0 for the same z.  Summation by
// parts gives the Green identity
//
//   sum_{k=m}^{n} [ <(Hu)_k, conj(v_k)> - <(Hv)_k, conj(u_k)> ]
//       = W(n+1) - W(m) ,
//
// where <a, conj(b)> = sum_i a_i b_i.  The matrix solutions psi (Neumann:
// psi_0 = I, psi_1 = 0) and phi (Dirichlet: phi_0 = 0, phi_1 = I) span all
// solutions and satisfy the pairing identities
//
//   psi_n D_0^{-1} phi_n^t     = phi_n D_0^{-1} psi_n^t ,
//   psi_n D_0^{-1} phi_{n+1}^t - phi_n D_0^{-1} psi_{n+1}^t =  D_n^{-1} ,
//   psi_{n+1} D_0^{-1} phi_n^t - phi_{n+1} D_0^{-1} psi_n^t = -D_n^{-1} .

#include <complex>

#include <Eigen/Dense>

#include "kotani/ergodic_model.hpp"
#include "kotani/sequences.hpp"

namespace kotani {

using Complex = std::complex<double>;

// (H u)_n for n in [n_begin, n_end]; u must cover [n_begin-1, n_end+1].
VectorSeq apply_operator(const ErgodicModel& model, const VectorSeq& u,
                         long long n_begin, long long n_end);

// W(n); u and v must cover {n-1, n}.
Complex wronskian(const ErgodicModel& model, const VectorSeq& u,
                  const VectorSeq& v, long long n);

// | lhs(m..n) - (W(n+1) - W(m)) | for the Green identity above.
double green_formula_defect(const ErgodicModel& model, const VectorSeq& u,
                            const VectorSeq& v, long long m, long long n);

// Matrix Wronskian of two matrix solution windows:
//   W_[A,B](m) = A_{m-1}^t D_{m-1} B_m - A_m^t D_{m-1} B_{m-1}.
Eigen::MatrixXcd matrix_wronskian(const ErgodicModel& model,
                                  const MatrixSeq& a, const MatrixSeq& b,
                                  long long m);

struct SolutionPair {
  MatrixSeq neumann;    // psi
  MatrixSeq dirichlet;  // phi
};

// Forward three-term recursion from the seed blocks at sites 0 and 1 up to
// n_max.  Blocks are emitted in scaled form (per-block log ledger) when
// n_max > 200 or |z| > 10; otherwise ledgers are empty and raw entry growth
// beyond 1e150 raises scale_error.
SolutionPair dirichlet_neumann_solutions(const ErgodicModel& model, Complex z,
                                         long long n_max);

// Truncation to sites 1..N with zero boundary conditions at 0 and N+1:
// real symmetric block tridiagonal, diagonal blocks V_1..V_N, coupling
// blocks D_1..D_{N-1}.  Budget guard: N*l <= 5000.
Eigen::MatrixXd finite_dirichlet_matrix(const ErgodicModel& model, long long N);

// Same truncation in banded lower storage (column-major LAPACK layout,
// bandwidth 2l-1), for eigensolves that only need the band.
struct BandedSym {
  long long n = 0;   // matrix dimension N*l
  int kd = 0;        // number of subdiagonals stored
  std::vector<double> ab;  // (kd+1) x n, column j at ab[j*(kd+1)]
};
BandedSym finite_dirichlet_banded(const ErgodicModel& model, long long N);

// Stable inverse of a hop matrix; throws singular_hop_error when the
// condition number exceeds 1e12.
Eigen::MatrixXd invert_hop(const Eigen::MatrixXd& d, long long site);

}  // namespace kotani
