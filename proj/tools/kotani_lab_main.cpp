// kotani-lab: command line front end.
//
// Exit codes: 0 success, 1 invalid input (config, grid, output location),
// 2 numerical failure (divergence, lost convergence, blow-up). Invalid
// input prints "error: <token>" on stderr so scripts can branch on the
// token without parsing prose.

#include <chrono>
#include <complex>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kotani/cocycle.hpp"
#include "kotani/config.hpp"
#include "kotani/errors.hpp"
#include "kotani/operator_core.hpp"
#include "kotani/result_io.hpp"
#include "kotani/spectral_analysis.hpp"
#include "kotani/version.hpp"
#include "kotani/weyl_green.hpp"

namespace {

using kotani::Cell;
using kotani::Config;
using kotani::ErgodicModel;
using kotani::ResultRecord;

struct CliError {
  std::string token;
};

[[noreturn]] void fail(const std::string& token) { throw CliError{token}; }

long long positive_count(const Config& cfg, const std::string& key,
                         long long fallback) {
  long long v = cfg.get_int("run", key, fallback);
  if (v <= 0) fail("count_nonpositive");
  return v;
}

std::complex<double> run_z(const Config& cfg, double re0, double im0) {
  return {cfg.get_double("run", "z_re", re0), cfg.get_double("run", "z_im", im0)};
}

std::vector<double> run_ladder(const Config& cfg) {
  std::vector<double> ladder = cfg.has("run", "y_ladder")
                                   ? cfg.get_list("run", "y_ladder")
                                   : kotani::default_y_ladder();
  if (ladder.size() < 2) fail("grid_invalid");
  for (double y : ladder)
    if (!(y > 0.0)) fail("grid_invalid");
  return ladder;
}

ResultRecord do_lyapunov(const Config& cfg, const ErgodicModel& model) {
  const auto z = run_z(cfg, 0.0, 0.0);
  const long long steps = positive_count(cfg, "steps", 100000);
  const long long reorth = positive_count(cfg, "reorth_period", 5);
  auto spec = kotani::lyapunov_spectrum(model, z, steps,
                                        static_cast<int>(reorth));
  ResultRecord rec;
  rec.command = "lyapunov";
  rec.columns = {"j", "exponent", "std_error", "partial_sum", "partial_sum_se"};
  for (int j = 1; j <= 2 * model.l; ++j)
    rec.rows.push_back({static_cast<long long>(j), spec.exponents(j - 1),
                        spec.std_error(j - 1), spec.partial_sum(j),
                        spec.partial_sum_se(j)});
  return rec;
}

ResultRecord do_ids(const Config& cfg, const ErgodicModel& model) {
  const long long n = positive_count(cfg, "n", 1000);
  auto ids = kotani::ids_empirical(model, n);
  ResultRecord rec;
  rec.command = "ids";
  rec.columns = {"eigenvalue", "k"};
  for (long long i = 0; i < ids.eigenvalues.size(); ++i) {
    const double lam = ids.eigenvalues(i);
    rec.rows.push_back({lam, ids.value(lam)});
  }
  return rec;
}

ResultRecord do_thouless(const Config& cfg, const ErgodicModel& model) {
  const auto z = run_z(cfg, 0.0, 1.0);
  const long long n = positive_count(cfg, "n", 1500);
  const long long steps = positive_count(cfg, "steps", 100000);
  auto rep = kotani::thouless_check(model, z, n, steps);
  ResultRecord rec;
  rec.command = "thouless";
  rec.columns = {"z_re",     "z_im",     "gamma", "gamma_se", "log_term",
                 "det_term", "rhs",      "defect", "n",       "steps"};
  rec.rows.push_back({rep.z.real(), rep.z.imag(), rep.gamma, rep.gamma_se,
                      rep.log_term, rep.det_term, rep.rhs, rep.defect,
                      rep.N, rep.steps});
  return rec;
}

ResultRecord do_weyl(const Config& cfg, const ErgodicModel& model) {
  const auto z = run_z(cfg, 0.0, 1.0);
  if (!(z.imag() > 0.0)) fail("im_z_nonpositive");
  const long long depth = cfg.get_int("run", "depth", 0);
  if (depth < 0) fail("count_nonpositive");
  auto w = kotani::weyl_m(model, z, +1, depth);
  ResultRecord rec;
  rec.command = "weyl";
  rec.columns = {"i", "j", "m_re", "m_im", "depth", "residual", "converged"};
  for (int i = 0; i < model.l; ++i)
    for (int j = 0; j < model.l; ++j)
      rec.rows.push_back({static_cast<long long>(i), static_cast<long long>(j),
                          w.m(i, j).real(), w.m(i, j).imag(), w.depth,
                          w.residual, static_cast<long long>(w.converged)});
  return rec;
}

ResultRecord do_kotani(const Config& cfg, const ErgodicModel& model) {
  const auto z = run_z(cfg, 0.0, 1.0);
  if (!(z.imag() > 0.0)) fail("im_z_nonpositive");
  const long long orbit = positive_count(cfg, "orbit", 10000);
  const long long steps = positive_count(cfg, "steps", 100000);
  auto rep = kotani::kotani_mean_identity(model, z, orbit, steps);
  ResultRecord rec;
  rec.command = "kotani";
  rec.columns = {"j",          "partial_lhs", "partial_rhs", "partial_holds",
                 "lhs",        "lhs_se",      "two_gamma",   "two_gamma_se",
                 "defect",     "rel_defect",  "trace_lhs",   "trace_rhs",
                 "trace_holds"};
  for (int j = 1; j <= model.l; ++j)
    rec.rows.push_back(
        {static_cast<long long>(j), rep.partial_lhs[j - 1],
         rep.partial_rhs[j - 1],
         static_cast<long long>(static_cast<bool>(rep.partial_holds[j - 1])),
         rep.lhs, rep.lhs_se, rep.two_gamma, rep.two_gamma_se, rep.defect,
         rep.rel_defect, rep.trace_bound_lhs, rep.trace_bound_rhs,
         static_cast<long long>(rep.trace_bound_holds)});
  return rec;
}

ResultRecord do_ac_scan(const Config& cfg, const ErgodicModel& model) {
  const double x0 = cfg.get_double("run", "x_start", -3.0);
  const double x1 = cfg.get_double("run", "x_stop", 3.0);
  const long long count = cfg.get_int("run", "x_count", 13);
  if (count < 1 || x1 < x0) fail("grid_invalid");
  const long long steps = positive_count(cfg, "steps", 100000);
  std::vector<double> grid;
  for (long long i = 0; i < count; ++i)
    grid.push_back(count == 1 ? x0
                              : x0 + (x1 - x0) * static_cast<double>(i) /
                                         static_cast<double>(count - 1));
  auto rep = kotani::ac_scan(model, grid, run_ladder(cfg), steps);
  ResultRecord rec;
  rec.command = "ac-scan";
  rec.columns = {"x",          "zero_exponents", "zero_tol",
                 "gamma_min",  "gamma_top",      "rank_plus",
                 "rank_minus", "ranks_agree",    "r",
                 "multiplicity", "trace_div_plus", "trace_div_minus",
                 "status"};
  for (const auto& row : rep.rows)
    rec.rows.push_back({row.x, static_cast<long long>(row.n_zero_exponents),
                        row.zero_tol, row.gamma_min_abs, row.gamma_top,
                        static_cast<long long>(row.rank_plus),
                        static_cast<long long>(row.rank_minus),
                        static_cast<long long>(row.ranks_agree),
                        static_cast<long long>(row.r),
                        static_cast<long long>(row.multiplicity),
                        static_cast<long long>(row.trace_divergent_plus),
                        static_cast<long long>(row.trace_divergent_minus),
                        row.status});
  return rec;
}

// Fast identity sweep over the configured model. Every row is an exact
// structural property; failure means the build is wrong, not unlucky.
ResultRecord do_verify(const Config& cfg, const ErgodicModel& model,
                       bool& all_pass) {
  ResultRecord rec;
  rec.command = "verify";
  rec.columns = {"check", "value", "threshold", "pass"};
  all_pass = true;
  auto push = [&](const std::string& name, double value, double threshold) {
    const bool ok = value <= threshold;
    all_pass = all_pass && ok;
    rec.rows.push_back({name, value, threshold, static_cast<long long>(ok)});
  };
  (void)cfg;

  std::mt19937_64 rng(20260818ull);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);

  {  // symplectic structure of the one-step matrices
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      std::complex<double> z(uni(rng), std::abs(uni(rng)) * 0.5);
      auto a = kotani::cocycle_matrix(kotani::sample_site(model, k), z);
      worst = std::max(worst,
                       kotani::symplectic_defect(a) / a.squaredNorm());
    }
    push("symplectic_defect", worst, 1e-12);
  }

  const std::complex<double> z(0.4, 0.3);
  // pairing constancy is a cancellation statement, so defects are measured
  // against the magnitude of the products being cancelled
  auto pairing_scale = [&](const kotani::MatrixSeq& a, const kotani::MatrixSeq& b,
                           long long m) {
    const double dn = kotani::sample_site(model, m - 1).D.norm();
    return std::max(1.0, dn * (a.value(m - 1).norm() * b.value(m).norm() +
                               a.value(m).norm() * b.value(m - 1).norm()));
  };
  {  // Wronskian constancy for the fundamental solutions
    auto sol = kotani::dirichlet_neumann_solutions(model, z, 12);
    Eigen::MatrixXcd w1 =
        kotani::matrix_wronskian(model, sol.neumann, sol.dirichlet, 1);
    double worst = 0.0;
    for (long long m = 2; m <= 11; ++m) {
      Eigen::MatrixXcd wm =
          kotani::matrix_wronskian(model, sol.neumann, sol.dirichlet, m);
      worst = std::max(worst, (wm - w1).norm() /
                                  pairing_scale(sol.neumann, sol.dirichlet, m));
    }
    push("wronskian_constancy", worst, 1e-9);
  }

  {  // discrete Green identity on random finitely supported vectors
    std::vector<Eigen::VectorXcd> u, v;
    for (long long m = -5; m <= 25; ++m) {
      Eigen::VectorXcd a(model.l), b(model.l);
      for (int i = 0; i < model.l; ++i) {
        a(i) = std::complex<double>(uni(rng), uni(rng));
        b(i) = std::complex<double>(uni(rng), uni(rng));
      }
      u.push_back(a);
      v.push_back(b);
    }
    kotani::VectorSeq us{-5, u}, vs{-5, v};
    push("green_identity", kotani::green_formula_defect(model, us, vs, 0, 19),
         1e-9);
  }

  {  // constancy of the three solution pairings
    auto sol = kotani::dirichlet_neumann_solutions(model, z, 12);
    double worst = 0.0;
    for (long long n = 1; n <= 10; ++n) {
      Eigen::MatrixXcd wpp =
          kotani::matrix_wronskian(model, sol.neumann, sol.neumann, n);
      Eigen::MatrixXcd wff =
          kotani::matrix_wronskian(model, sol.dirichlet, sol.dirichlet, n);
      Eigen::MatrixXcd wpf =
          kotani::matrix_wronskian(model, sol.neumann, sol.dirichlet, n);
      worst = std::max(
          {worst, wpp.norm() / pairing_scale(sol.neumann, sol.neumann, n),
           wff.norm() / pairing_scale(sol.dirichlet, sol.dirichlet, n),
           (wpf - kotani::matrix_wronskian(model, sol.neumann, sol.dirichlet,
                                           1))
                   .norm() /
               pairing_scale(sol.neumann, sol.dirichlet, n)});
    }
    push("pairing_constancy", worst, 1e-9);
  }

  {  // half line matrix: convergence, symmetry, positive imaginary part
    auto w = kotani::weyl_m(model, {0.0, 1.0});
    push("weyl_residual", w.converged ? w.residual : 1.0, 1e-9);
    push("weyl_symmetry", (w.m - w.m.transpose()).norm() / w.m.norm(), 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        kotani::hermitian_imag(w.m));
    push("weyl_herglotz", es.eigenvalues().minCoeff() > 0.0 ? 0.0 : 1.0, 0.5);
  }

  {  // summed boundary identity for the decaying solution
    push("m_sum_identity",
         kotani::m_sum_identity_defect(model, {0.3, 0.8}, 200), 1e-6);
  }

  {  // Green kernel corner equals the half line matrix; resolvent equation
    kotani::GreenKernel g(model, {0.0, 1.0}, 80);
    auto w = kotani::weyl_m(model, {0.0, 1.0});
    push("green_corner", (g.entry(1, 1) - w.m).norm() / w.m.norm(), 1e-9);

    std::vector<Eigen::VectorXcd> uv;
    for (long long m = 1; m <= 60; ++m) {
      Eigen::VectorXcd a(model.l);
      for (int i = 0; i < model.l; ++i)
        a(i) = std::complex<double>(uni(rng), uni(rng));
      uv.push_back(a);
    }
    kotani::VectorSeq u{1, uv};
    auto gu = g.apply(u, 0, 62);
    auto back = kotani::apply_operator(model, gu, 1, 61);
    double worst = 0.0;
    for (long long m = 1; m <= 60; ++m)
      worst = std::max(
          (back.at(m) - std::complex<double>(0.0, 1.0) * gu.at(m) - u.at(m))
              .norm(),
          worst);
    push("resolvent_defect", worst, 1e-7);
  }

  {  // short orbit mean identity, normalized by its statistical error
    auto rep = kotani::kotani_mean_identity(model, {0.0, 1.0}, 400, 40000);
    const double scale = 3.0 * (rep.lhs_se + rep.two_gamma_se) +
                         0.02 * std::abs(rep.two_gamma) + 1e-9;
    push("kotani_identity", rep.defect / scale, 1.0);
  }
  return rec;
}

int dispatch(const std::string& cmd, const Config& cfg) {
  ErgodicModel model = [&] {
    try {
      return cfg.model();
    } catch (const std::exception&) {
      fail("model_invalid");
    }
  }();

  const auto t0 = std::chrono::steady_clock::now();
  ResultRecord rec;
  bool verify_pass = true;
  if (cmd == "lyapunov")
    rec = do_lyapunov(cfg, model);
  else if (cmd == "ids")
    rec = do_ids(cfg, model);
  else if (cmd == "thouless")
    rec = do_thouless(cfg, model);
  else if (cmd == "weyl")
    rec = do_weyl(cfg, model);
  else if (cmd == "kotani")
    rec = do_kotani(cfg, model);
  else if (cmd == "ac-scan")
    rec = do_ac_scan(cfg, model);
  else if (cmd == "verify")
    rec = do_verify(cfg, model, verify_pass);
  else
    fail("config_parse_error");

  rec.config_hash = cfg.hash();
  rec.tool_version = kotani::kVersion;
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const std::string path = cfg.get_string("output", "path", "-");
  const std::string format = cfg.get_string("output", "format", "csv");
  if (format != "csv" && format != "json") fail("config_parse_error");
  try {
    kotani::write_result(rec, path, format);
  } catch (const std::exception&) {
    fail("io_unwritable");
  }
  if (cmd == "verify" && !verify_pass) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for ergodic block Jacobi operators"};
  app.require_subcommand(1);

  std::string config_path, out_path, format;
  std::vector<std::string> overrides;
  std::string cmd;
  for (const char* name :
       {"lyapunov", "ids", "thouless", "weyl", "kotani", "ac-scan", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI config file");
    sub->add_option("--out", out_path, "output path ('-' for stdout)");
    sub->add_option("--format", format, "csv or json");
    sub->add_option("--set", overrides,
                    "override, section.key=value (repeatable)");
    sub->callback([&cmd, name]() { cmd = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    Config cfg;
    try {
      if (!config_path.empty()) cfg = Config::load_file(config_path);
      for (const auto& s : overrides) cfg.set(s);
      if (!cfg.has("model", "kind")) cfg.set("model.kind=free");
    } catch (const kotani::model_error& e) {
      const std::string what = e.what();
      fail(what.find("unknown config") != std::string::npos
               ? "unknown_key"
               : "config_parse_error");
    }
    if (!out_path.empty()) cfg.set("output.path=" + out_path);
    if (!format.empty()) cfg.set("output.format=" + format);
    return dispatch(cmd, cfg);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.token << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
