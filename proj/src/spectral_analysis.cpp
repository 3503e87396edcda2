#include "kotani/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include <lapacke.h>

#include "kotani/errors.hpp"
#include "kotani/operator_core.hpp"

namespace kotani {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd banded_eigenvalues(BandedSym band) {
  VectorXd w(band.n);
  // jobz 'N': values only; ab is clobbered, which is why band is a copy
  lapack_int info = LAPACKE_dsbevd(
      LAPACK_COL_MAJOR, 'N', 'L', static_cast<lapack_int>(band.n),
      static_cast<lapack_int>(band.kd), band.ab.data(),
      static_cast<lapack_int>(band.kd + 1), w.data(), nullptr, 1);
  if (info != 0)
    throw numeric_error("banded eigensolver failed with info " +
                        std::to_string(info));
  return w;
}

// eigenvalues of D (Im M) D, descending
VectorXd boundary_weights(const MatrixXd& d, const MatrixXcd& m) {
  MatrixXcd x = d * hermitian_imag(m) * d;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(x, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

unsigned worker_cap(std::size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("KOTANI_LAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
  }
  return static_cast<unsigned>(std::min<std::size_t>(hw, jobs));
}

// deterministic result placement regardless of scheduling
template <typename Fn>
void parallel_indexed(std::size_t jobs, Fn&& fn) {
  const unsigned workers = worker_cap(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < jobs; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct SideScan {
  int rank = 0;
  bool divergent = false;
  bool enough_rungs = false;
  std::vector<double> traces;  // per converged rung
};

// Walk the rung ladder at x + iy, keep converged rungs, and decide the
// boundary rank of Im M from stabilization between the two smallest
// converged rungs: an eigenvalue direction counts only when it neither
// collapses with y (vanishing limit) nor blows up (pole passage), and
// clears the relative floor within the limit matrix.
SideScan scan_side(const ErgodicModel& view, double x,
                   const std::vector<double>& ladder) {
  SideScan out;
  std::vector<VectorXd> eigs;
  for (double y : ladder) {
    WeylMatrix w;
    try {
      w = weyl_m(view, {x, y});
    } catch (const convergence_error&) {
      continue;  // rung diverged; smaller rungs may still converge
    }
    if (!w.converged) continue;
    // rank decided on D (Im M) D: congruent to Im M, so same rank, and it is
    // the matrix whose null directions the classification cares about
    VectorXd e = boundary_weights(sample_site(view, 0).D, w.m);
    eigs.push_back(e);
    out.traces.push_back(hermitian_imag(w.m).trace().real());
  }
  if (eigs.size() < 2) return out;
  out.enough_rungs = true;
  const VectorXd& last = eigs.back();
  const VectorXd& prev = eigs[eigs.size() - 2];
  const double top = std::max(last.maxCoeff(), 0.0);
  const double floor_abs = 1e-6 * top;
  int rank = 0;
  for (int k = 0; k < last.size(); ++k) {
    if (!(last(k) > floor_abs)) continue;
    if (!(prev(k) > 0.0)) continue;
    const double ratio = last(k) / prev(k);
    if (ratio > 0.4 && ratio < 2.5) ++rank;
  }
  out.rank = rank;
  const double t_last = out.traces[out.traces.size() - 1];
  const double t_prev = out.traces[out.traces.size() - 2];
  out.divergent = t_last > 5.0 * t_prev;
  return out;
}

}  // namespace

double IDSHistogram::value(double x) const {
  const double* base = eigenvalues.data();
  const double* end = base + eigenvalues.size();
  return static_cast<double>(std::upper_bound(base, end, x) - base) /
         static_cast<double>(N);
}

IDSHistogram ids_empirical(const ErgodicModel& model, long long N) {
  IDSHistogram h;
  h.N = N;
  h.l = model.l;
  h.eigenvalues = banded_eigenvalues(finite_dirichlet_banded(model, N));
  return h;
}

double ids_sup_distance(const IDSHistogram& a, const IDSHistogram& b) {
  double sup = 0.0;
  auto probe = [&](double t) {
    sup = std::max(sup, std::abs(a.value(t) - b.value(t)));
    // left limit: counts strictly below t
    auto below = [&](const IDSHistogram& h) {
      const double* base = h.eigenvalues.data();
      const double* end = base + h.eigenvalues.size();
      return static_cast<double>(std::lower_bound(base, end, t) - base) /
             static_cast<double>(h.N);
    };
    sup = std::max(sup, std::abs(below(a) - below(b)));
  };
  for (long long i = 0; i < a.eigenvalues.size(); ++i) probe(a.eigenvalues(i));
  for (long long i = 0; i < b.eigenvalues.size(); ++i) probe(b.eigenvalues(i));
  return sup;
}

ThoulessReport thouless_check(const ErgodicModel& model, std::complex<double> z,
                              long long N, long long steps) {
  ThoulessReport rep;
  rep.z = z;
  rep.N = N;
  rep.steps = steps;

  IDSHistogram ids = ids_empirical(model, N);
  double acc = 0.0, comp = 0.0;
  for (long long k = 0; k < ids.eigenvalues.size(); ++k) {
    const double dist = std::abs(z - std::complex<double>(ids.eigenvalues(k), 0.0));
    if (!(dist > 0.0))
      throw numeric_error("energy collides with a truncation eigenvalue");
    const double term = std::log(dist) - comp;
    const double next = acc + term;
    comp = (next - acc) - term;
    acc = next;
  }
  rep.log_term = acc / static_cast<double>(N);

  rep.det_term = birkhoff_average(
      model,
      [](const SitePayload& s) { return std::log(std::abs(s.D.determinant())); },
      steps);

  LyapunovSpectrum spec = lyapunov_spectrum(model, z, steps);
  rep.gamma = spec.partial_sum(model.l);
  rep.gamma_se = spec.partial_sum_se(model.l);
  rep.rhs = rep.log_term - rep.det_term;
  rep.defect = std::abs(rep.gamma - rep.rhs);
  return rep;
}

NormalDerivativeReport gamma_normal_derivative(
    const ErgodicModel& model, double x, const std::vector<double>& y_ladder,
    long long N, long long steps) {
  if (y_ladder.size() < 2)
    throw std::invalid_argument("need at least two ladder rungs");
  std::vector<double> ladder = y_ladder;
  std::sort(ladder.rbegin(), ladder.rend());

  NormalDerivativeReport rep;
  rep.x = x;
  rep.ladder = ladder;

  LyapunovSpectrum base = lyapunov_spectrum(model, {x, 0.0}, steps);
  rep.gamma_x = base.partial_sum(model.l);
  rep.gamma_x_se = base.partial_sum_se(model.l);

  for (double y : ladder) {
    LyapunovSpectrum lift = lyapunov_spectrum(model, {x, y}, steps);
    rep.quotients.push_back((lift.partial_sum(model.l) - rep.gamma_x) / y);
  }
  // linear-in-y extrapolation through the two smallest rungs
  const double y1 = ladder[ladder.size() - 2], q1 = rep.quotients[ladder.size() - 2];
  const double y2 = ladder[ladder.size() - 1], q2 = rep.quotients[ladder.size() - 1];
  rep.limit = (q2 * y1 - q1 * y2) / (y1 - y2);

  IDSHistogram ids = ids_empirical(model, N);
  double min_dist = std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (long long k = 0; k < ids.eigenvalues.size(); ++k) {
    const double dist = std::abs(x - ids.eigenvalues(k));
    min_dist = std::min(min_dist, dist);
    if (dist > 0.0) acc += 1.0 / dist;
  }
  rep.surrogate = acc / static_cast<double>(N);
  rep.min_eig_distance = min_dist;
  const double span =
      ids.eigenvalues(ids.eigenvalues.size() - 1) - ids.eigenvalues(0);
  const double spacing = span / static_cast<double>(ids.eigenvalues.size());
  rep.surrogate_finite = min_dist > 0.5 * spacing;
  if (!rep.surrogate_finite)
    rep.surrogate = std::numeric_limits<double>::infinity();
  return rep;
}

KotaniReport kotani_mean_identity(const ErgodicModel& model,
                                  std::complex<double> z, long long orbit,
                                  long long steps) {
  if (!(z.imag() > 0.0))
    throw std::invalid_argument("mean identity needs Im z > 0");
  if (orbit < 1) throw std::invalid_argument("orbit length must be >= 1");
  const double y = z.imag();
  const int l = model.l;

  KotaniReport rep;
  rep.z = z;
  rep.orbit = orbit;
  rep.steps = steps;

  WeylMatrix w0 = weyl_m(model, z);
  if (!w0.converged)
    throw convergence_error("stripping did not converge for the mean identity",
                            w0.depth, w0.residual);
  auto ms = weyl_m_orbit(model, z, orbit, w0.depth);

  std::vector<double> terms_det(orbit), terms_trace(orbit);
  std::vector<std::vector<double>> terms_partial(
      static_cast<std::size_t>(l), std::vector<double>(orbit));
  for (long long n = 0; n < orbit; ++n) {
    const MatrixXd d = sample_site(model, n).D;
    VectorXd mu = boundary_weights(d, ms[static_cast<std::size_t>(n)]);
    if (!(mu.minCoeff() > 0.0))
      throw numeric_error("boundary weight matrix lost positivity");
    if (n == 0) rep.mu0 = mu;
    double part = 0.0;
    for (int k = 0; k < l; ++k) {
      part += std::log1p(y / mu(k));
      terms_partial[static_cast<std::size_t>(k)][n] = part;
    }
    terms_det[n] = part;  // j = l partial sum equals the full determinant term
    terms_trace[n] = 1.0 / (mu.sum() + y / 2.0);
  }

  auto mean_and_se = [](const std::vector<double>& v) {
    const int nb = 20;
    const long long n = static_cast<long long>(v.size());
    double mean = 0.0;
    for (double t : v) mean += t;
    mean /= static_cast<double>(n);
    if (n < 2 * nb) return std::pair<double, double>(mean, 0.0);
    double var = 0.0;
    long long done = 0;
    std::vector<double> bm;
    for (int b = 0; b < nb; ++b) {
      const long long hi = n * (b + 1) / nb;
      double s = 0.0;
      for (long long i = done; i < hi; ++i) s += v[i];
      bm.push_back(s / static_cast<double>(hi - done));
      done = hi;
    }
    for (double m : bm) var += (m - mean) * (m - mean);
    var /= (nb - 1);
    return std::pair<double, double>(mean, std::sqrt(var / nb));
  };

  auto [lhs, lhs_se] = mean_and_se(terms_det);
  rep.lhs = lhs;
  rep.lhs_se = lhs_se;

  LyapunovSpectrum spec = lyapunov_spectrum(model, z, steps);
  rep.two_gamma = 2.0 * spec.partial_sum(l);
  rep.two_gamma_se = 2.0 * spec.partial_sum_se(l);
  rep.defect = std::abs(rep.lhs - rep.two_gamma);
  rep.rel_defect = rep.defect / std::max(1e-300, std::abs(rep.two_gamma));

  auto [tb, tb_se] = mean_and_se(terms_trace);
  (void)tb_se;
  rep.trace_bound_lhs = tb;
  rep.trace_bound_rhs = rep.two_gamma / y;
  rep.trace_bound_holds =
      rep.trace_bound_lhs <= rep.trace_bound_rhs + 3.0 * rep.two_gamma_se / y;

  for (int j = 1; j <= l; ++j) {
    auto [pl, pl_se] = mean_and_se(terms_partial[static_cast<std::size_t>(j - 1)]);
    // sum of the j smallest positive exponents
    const double tail_sum =
        spec.partial_sum(l) - (j == l ? 0.0 : spec.partial_sum(l - j));
    const double pr = 2.0 * tail_sum;
    rep.partial_lhs.push_back(pl);
    rep.partial_rhs.push_back(pr);
    rep.partial_holds.push_back(pl <= pr + 3.0 * (pl_se + rep.two_gamma_se));
  }
  return rep;
}

ACScanReport ac_scan(const ErgodicModel& model, const std::vector<double>& x_grid,
                     const std::vector<double>& y_ladder, long long steps) {
  ACScanReport rep;
  rep.y_ladder = y_ladder;
  rep.steps = steps;
  rep.rows.resize(x_grid.size());

  std::vector<double> ladder = y_ladder;
  std::sort(ladder.rbegin(), ladder.rend());
  const ErgodicModel mirrored = reflected(model);

  parallel_indexed(x_grid.size(), [&](std::size_t i) {
    ACScanRow& row = rep.rows[i];
    row.x = x_grid[i];
    try {
      LyapunovSpectrum spec = lyapunov_spectrum(model, {row.x, 0.0}, steps);
      row.zero_tol = std::max(1e-2, 3.0 * spec.std_error.maxCoeff());
      row.gamma_min_abs = spec.exponents.cwiseAbs().minCoeff();
      row.gamma_top = spec.exponents(0);
      for (int j = 0; j < spec.exponents.size(); ++j)
        if (std::abs(spec.exponents(j)) < row.zero_tol) ++row.n_zero_exponents;

      SideScan plus = scan_side(model, row.x, ladder);
      SideScan minus = scan_side(mirrored, row.x, ladder);
      row.rank_plus = plus.rank;
      row.rank_minus = minus.rank;
      row.trace_plus = plus.traces;
      row.trace_minus = minus.traces;
      row.trace_divergent_plus = plus.divergent;
      row.trace_divergent_minus = minus.divergent;
      row.ranks_agree = plus.rank == minus.rank;
      row.r = std::min(plus.rank, minus.rank);
      row.multiplicity = 2 * row.r;
      if (!plus.enough_rungs || !minus.enough_rungs)
        row.status = "ladder_unconverged";
    } catch (const std::exception& e) {
      row.status = e.what();
    }
  });
  return rep;
}

MonotonicityReport solution_norm_monotonicity_check(const ErgodicModel& model,
                                                    double x, double y,
                                                    int column,
                                                    long long n_max) {
  if (!(y > 0.0)) throw std::invalid_argument("y must be positive");
  if (column < 0 || column >= model.l)
    throw std::invalid_argument("column outside 0..l-1");

  MonotonicityReport rep;
  rep.x = x;
  rep.y = y;
  rep.column = column;
  rep.n_max = n_max;

  // real-energy square-summable solution via stripping at Im z = 0
  WeylMatrix w;
  try {
    w = weyl_m(model, {x, 0.0});
  } catch (const convergence_error&) {
    return rep;  // precondition_ok stays false
  }
  if (!w.converged) return rep;

  auto column_energy = [&](const JostSequence& jost) {
    double sum = 0.0;
    for (long long m = 1; m <= n_max; ++m) {
      const double s = jost.blocks.log_scale_at(m);
      sum += std::exp(2.0 * s) * jost.blocks.block(m).col(column).squaredNorm();
    }
    return sum;
  };
  auto quarter_energy = [&](const JostSequence& jost, long long lo, long long hi) {
    double sum = 0.0;
    for (long long m = lo; m < hi; ++m) {
      const double s = jost.blocks.log_scale_at(m);
      sum += std::exp(2.0 * s) * jost.blocks.block(m).col(column).squaredNorm();
    }
    return sum;
  };

  JostSequence real_jost = jost_sequence(model, {x, 0.0}, n_max);
  const long long q = n_max / 4;
  const double third = quarter_energy(real_jost, n_max - 2 * q, n_max - q);
  const double fourth = quarter_energy(real_jost, n_max - q, n_max);
  rep.tail_ratio = third > 0.0 ? fourth / third : 1.0;
  if (!(rep.tail_ratio < 0.9)) return rep;  // not convincingly square-summable
  rep.precondition_ok = true;

  rep.norm_sq_real = column_energy(real_jost);
  JostSequence lifted = jost_sequence(model, {x, y}, n_max);
  rep.norm_sq_lifted = column_energy(lifted);
  rep.holds =
      rep.norm_sq_lifted <= rep.norm_sq_real * (1.0 + 1e-9) + 1e-12;
  return rep;
}

}  // namespace kotani
