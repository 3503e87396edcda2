#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "kotani/errors.hpp"
#include "kotani/operator_core.hpp"
#include "kotani/weyl_green.hpp"
#include "test_models.hpp"

using Complex = std::complex<double>;

namespace {

// scalar free half line matrix: the Herglotz root of m^2 + z m + 1 = 0
Complex free_m(Complex z) {
  const Complex root = std::sqrt(z * z - 4.0);
  Complex m = (-z + root) / 2.0;
  if (m.imag() <= 0.0) m = (-z - root) / 2.0;
  return m;
}

kotani::ErgodicModel shifted_free(double c) {
  Eigen::MatrixXd d(1, 1), v(1, 1);
  d << 1.0;
  v << c;
  return kotani::ErgodicModel::periodic({d}, {v});
}

}  // namespace

TEST_CASE("free half line matrix hits the golden ratio point") {
  auto w = kotani::weyl_m(testpack::free1(), {0.0, 1.0});
  CHECK(w.converged);
  const Complex expect(0.0, 0.6180339887498949);
  CHECK(std::abs(w.m(0, 0) - expect) <= 1e-10);
}

TEST_CASE("constant potential only translates the energy") {
  auto w = kotani::weyl_m(shifted_free(1.0), {1.0, 1.0});
  CHECK(std::abs(w.m(0, 0) - free_m({0.0, 1.0})) <= 1e-9);
  auto w2 = kotani::weyl_m(shifted_free(-0.7), {0.2, 0.8});
  CHECK(std::abs(w2.m(0, 0) - free_m({0.9, 0.8})) <= 1e-9);
}

TEST_CASE("half line matrix is complex symmetric") {
  auto model = kotani::ErgodicModel::iid(3, 11, -0.3, 0.3, -1.0, 1.0);
  auto w = kotani::weyl_m(model, {0.4, 0.9});
  CHECK(w.converged);
  CHECK((w.m - w.m.transpose()).norm() <= 1e-9 * w.m.norm());
}

TEST_CASE("imaginary part stays positive across a grid") {
  for (const auto& model :
       {testpack::free1(), testpack::periodic2(), testpack::iid2()}) {
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        const double re = -3.0 + 6.0 * i / 9.0;
        const double im = 0.1 + 0.9 * j / 9.0;
        auto w = kotani::weyl_m(model, {re, im});
        CHECK(w.converged);
        CHECK((w.m - w.m.transpose()).norm() <= 1e-8 * w.m.norm());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
            kotani::hermitian_imag(w.m));
        CHECK(es.eigenvalues().minCoeff() > 0.0);
      }
    }
  }
}

TEST_CASE("deep stripping forgets its seed") {
  auto model = testpack::periodic2();
  const Complex z(0.3, 0.8);
  Eigen::MatrixXcd seed1 =
      Complex(0, 1) * Eigen::MatrixXcd::Identity(model.l, model.l);
  auto wa = kotani::weyl_m(model, z, +1, 900, seed1);
  auto wb = kotani::weyl_m(model, z, +1, 900, 2.0 * seed1);
  CHECK((wa.m - wb.m).norm() <= 1e-10);
}

TEST_CASE("stripping does not converge inside the free band") {
  auto w = kotani::weyl_m(testpack::free1(), {0.5, 0.0});
  CHECK_FALSE(w.converged);
}

TEST_CASE("jost blocks start at the identity and decay at the free rate") {
  auto jost = kotani::jost_sequence(testpack::free1(), {0.0, 1.0}, 40);
  CHECK((jost.blocks.value(0) - Eigen::MatrixXcd::Identity(1, 1)).norm() ==
        0.0);
  const double rho = 0.6180339887498949;
  for (long long n = 1; n <= 40; ++n) {
    const double mag = jost.blocks.log_scale_at(n) +
                       std::log(std::abs(jost.blocks.block(n)(0, 0)));
    CHECK(std::abs(mag - static_cast<double>(n) * std::log(rho)) <=
          1e-8 * (1.0 + std::abs(mag)));
  }
  CHECK(jost.tail_fraction < 1e-8);
}

TEST_CASE("jost columns satisfy the eigenvalue equation") {
  auto model = testpack::periodic2();
  const Complex z(0.5, 0.8);
  auto jost = kotani::jost_sequence(model, z, 30);
  for (int c = 0; c < model.l; ++c) {
    kotani::VectorSeq u;
    u.offset = 0;
    for (long long n = 0; n <= 30; ++n)
      u.values.push_back(jost.blocks.value(n).col(c));
    auto hu = kotani::apply_operator(model, u, 1, 29);
    for (long long n = 1; n <= 29; ++n) {
      const double scale =
          u.at(n - 1).norm() + u.at(n).norm() + u.at(n + 1).norm();
      if (scale < 1e-200) continue;
      CHECK((hu.at(n) - z * u.at(n)).norm() <= 1e-8 * scale);
    }
  }
}

TEST_CASE("one step of stripping is one step along the orbit") {
  auto model = testpack::iid2();
  const Complex z(0.2, 0.9);
  auto jost = kotani::jost_sequence(model, z, 6);
  Eigen::MatrixXcd f1 = jost.blocks.value(1);
  Eigen::MatrixXcd f2 = jost.blocks.value(2);
  Eigen::MatrixXcd d1 = kotani::sample_site(model, 1).D.cast<Complex>();
  Eigen::MatrixXcd recovered = -f2 * f1.inverse() * d1.inverse();
  auto direct = kotani::weyl_m(kotani::shifted(model, 1), z);
  CHECK((recovered - direct.m).norm() <= 1e-8 * direct.m.norm());
}

TEST_CASE("orbit pass reproduces shifted half line matrices") {
  auto model = testpack::periodic2();
  const Complex z(-0.4, 0.7);
  auto base = kotani::weyl_m(model, z);
  auto orbit = kotani::weyl_m_orbit(model, z, 5, base.depth);
  for (long long n = 0; n < 5; ++n) {
    auto direct = kotani::weyl_m(kotani::shifted(model, n), z);
    CHECK((orbit[static_cast<std::size_t>(n)] - direct.m).norm() <=
          1e-8 * direct.m.norm());
  }
}

TEST_CASE("summed boundary identity closes") {
  CHECK(kotani::m_sum_identity_defect(testpack::free1(), {0.0, 1.0}, 200) <=
        1e-8);
  CHECK(kotani::m_sum_identity_defect(testpack::periodic2(), {0.0, 2.0}, 200) <=
        1e-6);
  CHECK(kotani::m_sum_identity_defect(testpack::iid2(), {0.2, 0.6}, 200) <=
        1e-6);

  // slow decay near the band makes the truncation error visible, so the
  // window growth must buy accuracy
  const Complex slow(0.0, 0.05);
  const double coarse =
      kotani::m_sum_identity_defect(testpack::free1(), slow, 50);
  const double fine =
      kotani::m_sum_identity_defect(testpack::free1(), slow, 200);
  // tail is geometric: rho^{2 n_max} with rho = |m(0.05i)| = 0.97531
  CHECK(coarse == doctest::Approx(0.0821).epsilon(0.02));
  CHECK(fine == doctest::Approx(4.545e-5).epsilon(0.02));
  CHECK(fine < 0.01 * coarse);
}

TEST_CASE("kernel corner is the half line matrix") {
  auto model = testpack::periodic2();
  const Complex z(0.4, 1.0);
  kotani::GreenKernel g(model, z, 60);
  auto w = kotani::weyl_m(model, z);
  CHECK((g.entry(1, 1) - w.m).norm() <= 1e-9 * w.m.norm());

  kotani::GreenKernel gf(testpack::free1(), {0.0, 1.0}, 60);
  CHECK(std::abs(gf.entry(1, 1)(0, 0) - Complex(0.0, 0.6180339887498949)) <=
        1e-9);
}

TEST_CASE("kernel inverts the truncated resolvent equation") {
  auto model = testpack::periodic2();
  const Complex z(0.0, 1.0);
  kotani::GreenKernel g(model, z, 80);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  kotani::VectorSeq u;
  u.offset = 1;
  for (long long m = 1; m <= 60; ++m) {
    Eigen::VectorXcd a(model.l);
    for (int i = 0; i < model.l; ++i) a(i) = Complex(uni(rng), uni(rng));
    u.values.push_back(a);
  }
  auto gu = g.apply(u, 0, 62);
  auto back = kotani::apply_operator(model, gu, 1, 61);
  for (long long m = 1; m <= 60; ++m)
    CHECK((back.at(m) - z * gu.at(m) - u.at(m)).norm() <= 1e-7);

  // independent oracle: direct dense solve of the Dirichlet truncation
  const long long N = 120;
  const long long dim = N * model.l;
  Eigen::MatrixXcd h =
      kotani::finite_dirichlet_matrix(model, N).cast<Complex>() -
      z * Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
  for (long long m = 1; m <= 60; ++m)
    rhs.segment((m - 1) * model.l, model.l) = u.at(m);
  Eigen::VectorXcd sol = h.partialPivLu().solve(rhs);
  for (long long m = 1; m <= 40; ++m)
    CHECK((gu.at(m) - sol.segment((m - 1) * model.l, model.l)).norm() <= 1e-6);
}

TEST_CASE("inertia counts survive congruence") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(3, 3);
  b(0, 0) = 1.0;
  b(1, 1) = -1.0;
  b(2, 2) = 0.0;
  Eigen::MatrixXcd x(3, 3);
  do {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) x(i, j) = Complex(uni(rng), uni(rng));
  } while (std::abs(x.determinant()) < 0.1);
  auto [before, after] = kotani::inertia(b, x);
  CHECK(before == kotani::Inertia{1, 1, 1});
  CHECK(after == before);

  // eigencount oracle on a bigger random Hermitian block
  Eigen::MatrixXcd a(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) a(i, j) = Complex(uni(rng), uni(rng));
  Eigen::MatrixXcd herm = (a + a.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  kotani::Inertia oracle;
  for (int k = 0; k < 5; ++k) {
    if (es.eigenvalues()(k) > 0)
      ++oracle.positive;
    else
      ++oracle.negative;
  }
  auto [direct, moved] =
      kotani::inertia(herm, Eigen::MatrixXcd::Identity(5, 5));
  CHECK(direct == oracle);
  CHECK(moved == oracle);
}

TEST_CASE("boundary rank transports through the hop congruence") {
  auto model = testpack::iid2();
  auto w = kotani::weyl_m(model, {0.3, 0.7});
  Eigen::MatrixXcd im = kotani::hermitian_imag(w.m);
  Eigen::MatrixXcd d0 =
      kotani::sample_site(model, 0).D.cast<Complex>();
  auto [plain, moved] = kotani::inertia(im, d0);
  CHECK(plain == moved);
  CHECK(plain.positive == model.l);
  CHECK(kotani::hermitian_rank(im) == model.l);
  CHECK(kotani::hermitian_rank(d0.adjoint() * im * d0) == model.l);
}

TEST_CASE("rank floor zeroes noise directions") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 1e-3;
  m(2, 2) = 1e-9;
  CHECK(kotani::hermitian_rank(m) == 2);
  CHECK(kotani::hermitian_rank(m, 1e-10) == 3);
}
