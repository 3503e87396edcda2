#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "kotani/errors.hpp"
#include "kotani/operator_core.hpp"
#include "test_models.hpp"

using kotani::Complex;
using kotani::ErgodicModel;
using kotani::MatrixSeq;
using kotani::VectorSeq;

namespace {

VectorSeq random_window(int l, long long begin, long long end,
                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  VectorSeq u;
  u.offset = begin;
  for (long long n = begin; n <= end; ++n) {
    Eigen::VectorXcd v(l);
    for (int i = 0; i < l; ++i) v(i) = Complex(uni(rng), uni(rng));
    u.values.push_back(v);
  }
  return u;
}

VectorSeq scalar_window(long long begin, long long end,
                        const std::function<double(long long)>& f) {
  VectorSeq u;
  u.offset = begin;
  for (long long n = begin; n <= end; ++n) {
    Eigen::VectorXcd v(1);
    v(0) = f(n);
    u.values.push_back(v);
  }
  return u;
}

}  // namespace

TEST_CASE("free chain maps a delta to its neighbors") {
  auto model = testpack::free1();
  VectorSeq u;
  u.offset = -3;
  for (long long n = -3; n <= 3; ++n)
    u.values.push_back(n == 0 ? Eigen::VectorXcd::Ones(1)
                              : Eigen::VectorXcd::Zero(1));
  auto hu = kotani::apply_operator(model, u, -2, 2);
  for (long long n = -2; n <= 2; ++n) {
    const double expect = (n == -1 || n == 1) ? 1.0 : 0.0;
    CHECK(std::abs(hu.at(n)(0) - expect) == 0.0);
  }
}

TEST_CASE("windowed apply matches a dense window matrix") {
  auto model = testpack::periodic2();
  const int l = model.l;
  std::mt19937_64 rng(11);
  VectorSeq u = random_window(l, -5, 7, rng);
  auto hu = kotani::apply_operator(model, u, -4, 6);
  for (long long n = -4; n <= 6; ++n) {
    auto sm = kotani::sample_site(model, n);
    auto sp = kotani::sample_site(model, n - 1);
    Eigen::VectorXcd expect =
        sp.D * u.at(n - 1) + sm.V * u.at(n) + sm.D * u.at(n + 1);
    CHECK((hu.at(n) - expect).norm() <= 1e-14);
  }
}

TEST_CASE("scalar wronskian of free plane waves is the angle sine") {
  auto model = testpack::free1();
  const double theta = 1.05;
  VectorSeq u = scalar_window(-10, 10, [&](long long n) {
    return std::sin(static_cast<double>(n) * theta);
  });
  VectorSeq v = scalar_window(-10, 10, [&](long long n) {
    return std::cos(static_cast<double>(n) * theta);
  });
  for (long long n = -8; n <= 10; ++n) {
    Complex w = kotani::wronskian(model, u, v, n);
    CHECK(std::abs(w - std::sin(theta)) <= 1e-12);
  }
}

TEST_CASE("wronskian of a window with itself vanishes") {
  auto model = testpack::iid2();
  std::mt19937_64 rng(5);
  VectorSeq u = random_window(model.l, -4, 4, rng);
  for (long long n = -3; n <= 4; ++n)
    CHECK(std::abs(kotani::wronskian(model, u, u, n)) == 0.0);
}

TEST_CASE("green identity telescopes over arbitrary windows") {
  auto model = testpack::periodic2();
  std::mt19937_64 rng(17);
  VectorSeq u = random_window(model.l, -6, 9, rng);
  VectorSeq v = random_window(model.l, -6, 9, rng);
  CHECK(kotani::green_formula_defect(model, u, v, -4, 7) <= 1e-12);
  CHECK(kotani::green_formula_defect(model, u, v, 0, 0) <= 1e-13);
}

TEST_CASE("fundamental solutions carry their seed blocks") {
  auto model = testpack::periodic2();
  auto sol = kotani::dirichlet_neumann_solutions(model, {0.7, 0.2}, 6);
  const int l = model.l;
  CHECK((sol.neumann.block(0) - Eigen::MatrixXcd::Identity(l, l)).norm() == 0.0);
  CHECK(sol.neumann.block(1).norm() == 0.0);
  CHECK(sol.dirichlet.block(0).norm() == 0.0);
  CHECK((sol.dirichlet.block(1) - Eigen::MatrixXcd::Identity(l, l)).norm() ==
        0.0);
}

TEST_CASE("free dirichlet solution is the sine ratio") {
  auto model = testpack::free1();
  const double theta = 1.05;
  const double z = 2.0 * std::cos(theta);
  auto sol = kotani::dirichlet_neumann_solutions(model, z, 40);
  for (long long n = 0; n <= 40; ++n) {
    const double expect = std::sin(static_cast<double>(n) * theta) / std::sin(theta);
    CHECK(std::abs(sol.dirichlet.value(n)(0, 0) - expect) <=
          1e-10 * (1.0 + std::abs(expect)));
  }
}

TEST_CASE("solution columns satisfy the eigenvalue equation") {
  auto model = testpack::periodic2();
  const Complex z(0.5, 0.1);
  auto sol = kotani::dirichlet_neumann_solutions(model, z, 20);
  for (int c = 0; c < model.l; ++c) {
    VectorSeq u;
    u.offset = 0;
    for (long long n = 0; n <= 20; ++n)
      u.values.push_back(sol.dirichlet.value(n).col(c));
    auto hu = kotani::apply_operator(model, u, 1, 19);
    for (long long n = 1; n <= 19; ++n) {
      const double scale = 1.0 + u.at(n).norm();
      CHECK((hu.at(n) - z * u.at(n)).norm() <= 1e-9 * scale);
    }
  }
}

TEST_CASE("solution pairings are constant in the site index") {
  struct Probe {
    ErgodicModel model;
    long long n_cap;
  };
  std::vector<Probe> probes = {{testpack::free1(), 12},
                               {testpack::periodic2(), 12},
                               {testpack::iid2(), 12}};
  const double res[] = {-2.0, -1.0, 0.0, 1.3, 2.0};
  const double ims[] = {0.0, 0.15, 0.3};
  for (const auto& probe : probes) {
    for (double re : res) {
      for (double im : ims) {
        const Complex z(re, im);
        auto sol =
            kotani::dirichlet_neumann_solutions(probe.model, z, probe.n_cap);
        Eigen::MatrixXcd mixed_ref =
            kotani::matrix_wronskian(probe.model, sol.neumann, sol.dirichlet, 1);
        for (long long m = 1; m <= probe.n_cap; ++m) {
          // constancy is a cancellation statement: measure the defect
          // against the magnitude of the terms being cancelled
          const double d_norm = kotani::sample_site(probe.model, m - 1).D.norm();
          auto scale = [&](const MatrixSeq& a, const MatrixSeq& b) {
            return std::max(1.0, d_norm * (a.value(m - 1).norm() * b.value(m).norm() +
                                           a.value(m).norm() * b.value(m - 1).norm()));
          };
          auto self_n = kotani::matrix_wronskian(probe.model, sol.neumann,
                                                 sol.neumann, m);
          auto self_d = kotani::matrix_wronskian(probe.model, sol.dirichlet,
                                                 sol.dirichlet, m);
          auto mixed = kotani::matrix_wronskian(probe.model, sol.neumann,
                                                sol.dirichlet, m);
          CHECK(self_n.norm() <= 1e-9 * scale(sol.neumann, sol.neumann));
          CHECK(self_d.norm() <= 1e-9 * scale(sol.dirichlet, sol.dirichlet));
          CHECK((mixed - mixed_ref).norm() <=
                1e-9 * scale(sol.neumann, sol.dirichlet));
        }
      }
    }
  }
}

TEST_CASE("pairings stay put over long in band windows") {
  // inside the free band at real energy nothing grows, so the window can be
  // long without the cancellation floor eps * e^{2 gamma n} taking over
  auto model = testpack::free1();
  for (double re : {-1.5, 0.0, 1.5}) {
    auto sol = kotani::dirichlet_neumann_solutions(model, re, 50);
    auto ref = kotani::matrix_wronskian(model, sol.neumann, sol.dirichlet, 1);
    for (long long m = 1; m <= 50; ++m) {
      CHECK(kotani::matrix_wronskian(model, sol.neumann, sol.neumann, m)
                .norm() <= 1e-12);
      CHECK((kotani::matrix_wronskian(model, sol.neumann, sol.dirichlet, m) -
             ref)
                .norm() <= 1e-12);
    }
  }
}

TEST_CASE("mixed pairing starts at the boundary hop") {
  auto model = testpack::periodic2();
  auto sol = kotani::dirichlet_neumann_solutions(model, {0.3, 0.2}, 4);
  Eigen::MatrixXcd w =
      kotani::matrix_wronskian(model, sol.neumann, sol.dirichlet, 1);
  Eigen::MatrixXcd d0 = kotani::sample_site(model, 0).D.cast<Complex>();
  CHECK((w - d0).norm() <= 1e-14);
}

TEST_CASE("two site free truncation is the adjacency block") {
  auto model = testpack::free1();
  Eigen::MatrixXd h = kotani::finite_dirichlet_matrix(model, 2);
  CHECK(h.rows() == 2);
  CHECK(h(0, 0) == 0.0);
  CHECK(h(1, 1) == 0.0);
  CHECK(h(0, 1) == 1.0);
  CHECK(h(1, 0) == 1.0);
}

TEST_CASE("truncation matrix is symmetric") {
  auto model = testpack::iid2();
  Eigen::MatrixXd h = kotani::finite_dirichlet_matrix(model, 13);
  CHECK((h - h.transpose()).norm() == 0.0);
}

TEST_CASE("free truncation spectrum is the discrete sine basis") {
  auto model = testpack::free1();
  const long long N = 50;
  Eigen::MatrixXd h = kotani::finite_dirichlet_matrix(model, N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  for (long long k = 1; k <= N; ++k) {
    const double expect =
        2.0 * std::cos(static_cast<double>(N + 1 - k) * M_PI /
                       static_cast<double>(N + 1));
    CHECK(std::abs(es.eigenvalues()(k - 1) - expect) <= 1e-12);
  }
}

TEST_CASE("banded storage expands to the dense truncation") {
  auto model = testpack::periodic2();
  const long long N = 9;
  Eigen::MatrixXd dense = kotani::finite_dirichlet_matrix(model, N);
  auto band = kotani::finite_dirichlet_banded(model, N);
  CHECK(band.n == dense.rows());
  CHECK(band.kd == 2 * model.l - 1);
  Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(band.n, band.n);
  for (long long j = 0; j < band.n; ++j) {
    for (long long i = j; i <= std::min(band.n - 1, j + band.kd); ++i) {
      const double v = band.ab[static_cast<std::size_t>(j * (band.kd + 1) + (i - j))];
      rebuilt(i, j) = v;
      rebuilt(j, i) = v;
    }
  }
  CHECK((rebuilt - dense).norm() == 0.0);
}

TEST_CASE("hop inversion works and rejects near singular blocks") {
  Eigen::MatrixXd good(2, 2);
  good << 1.2, 0.2, 0.2, 0.9;
  Eigen::MatrixXd inv = kotani::invert_hop(good, 0);
  CHECK((inv * good - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-13);

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 1.0, 1.0, 1.0 + 1e-14;
  CHECK_THROWS_AS(kotani::invert_hop(bad, 3), kotani::singular_hop_error);
}

TEST_CASE("hop determinant product matches the truncation spectrum") {
  auto model = testpack::periodic2();
  const long long N = 6;
  Eigen::MatrixXd h = kotani::finite_dirichlet_matrix(model, N);
  Eigen::VectorXd lam =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h, Eigen::EigenvaluesOnly)
          .eigenvalues();
  double det_hops = 1.0;
  for (long long k = 1; k <= N - 1; ++k)
    det_hops *= kotani::sample_site(model, k).D.determinant();
  const Complex zs[] = {{0.3, 0.4}, {-1.2, 0.1}, {2.5, 0.0}, {0.8, -0.3}, {1.7, 2.0}};
  for (Complex z : zs) {
    auto sol = kotani::dirichlet_neumann_solutions(model, z, N + 1);
    const Complex lhs =
        (kotani::sample_site(model, N).D.cast<Complex>() *
         sol.dirichlet.value(N + 1))
            .determinant() *
        det_hops;
    Complex rhs = 1.0;
    for (long long k = 0; k < lam.size(); ++k) rhs *= z - lam(k);
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::abs(rhs));
  }
}

TEST_CASE("raw recursion reports blow up and the ledger absorbs it") {
  auto model = testpack::free1();
  CHECK_THROWS_AS(kotani::dirichlet_neumann_solutions(model, 9.9, 200),
                  kotani::scale_error);
  auto sol = kotani::dirichlet_neumann_solutions(model, 9.9, 300);
  const double rate = std::acosh(9.9 / 2.0);
  const double logged =
      sol.dirichlet.log_scale_at(300) +
      std::log(std::abs(sol.dirichlet.block(300)(0, 0)));
  CHECK(logged == doctest::Approx(300.0 * rate).epsilon(0.02));
}
