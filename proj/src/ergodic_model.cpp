#include "kotani/ergodic_model.hpp"

#include <cmath>
#include <numbers>

namespace kotani {

namespace detail {

namespace {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// two-sided site index -> unsigned, injective
inline std::uint64_t zigzag(long long n) {
  return n >= 0 ? 2ull * static_cast<std::uint64_t>(n)
                : 2ull * static_cast<std::uint64_t>(-(n + 1)) + 1ull;
}

}  // namespace

std::uint64_t site_hash(std::uint64_t seed, long long site, std::uint32_t entry) {
  std::uint64_t h = mix64(seed ^ 0x8f1bbcdcbfa53e0bull);
  h = mix64(h ^ zigzag(site));
  h = mix64(h ^ entry);
  return h;
}

double unit_double(std::uint64_t seed, long long site, std::uint32_t entry) {
  // top 53 bits -> [0, 1)
  return static_cast<double>(site_hash(seed, site, entry) >> 11) * 0x1.0p-53;
}

}  // namespace detail

namespace {

using Eigen::MatrixXd;

void require(bool ok, const char* what) {
  if (!ok) throw model_error(what);
}

double wrap_unit(double x) {
  double t = std::fmod(x, 1.0);
  return t < 0.0 ? t + 1.0 : t;
}

// symmetric matrix with independent uniform(lo, hi) entries on and above
// the diagonal, mirrored exactly so D == D^T holds bitwise
MatrixXd symmetric_uniform(int l, std::uint64_t seed, long long site,
                           std::uint32_t entry_base, double lo, double hi) {
  MatrixXd a(l, l);
  std::uint32_t entry = entry_base;
  for (int i = 0; i < l; ++i)
    for (int j = i; j < l; ++j) {
      double u = detail::unit_double(seed, site, entry++);
      a(i, j) = lo + (hi - lo) * u;
      a(j, i) = a(i, j);
    }
  return a;
}

double theta_at(const ErgodicModel& m, long long n) {
  return wrap_unit(m.theta0 + static_cast<double>(n) * m.alpha);
}

MatrixXd rotation_hop(const ErgodicModel& m, long long n) {
  double d;
  switch (m.hop_symbol) {
    case RotationHop::Constant: d = m.hop_const; break;
    case RotationHop::Cosine:
      d = 2.0 + std::cos(2.0 * std::numbers::pi * theta_at(m, n));
      break;
    default: throw model_error("unknown rotation hop symbol");
  }
  return d * MatrixXd::Identity(m.l, m.l);
}

MatrixXd iid_hop(const ErgodicModel& m, long long n) {
  MatrixXd d = symmetric_uniform(m.l, m.seed, n, 0, m.d_lo, m.d_hi);
  // Shift the diagonal until the determinant clears the stop level.  The
  // stop level sits well above kDetFloor so that no sampled hop is
  // borderline invertible; each shift moves every eigenvalue by d_shift,
  // so the loop terminates after finitely many rounds.
  double stop = std::max(m.d_det_stop, kDetFloor);
  for (int round = 0; round < 128; ++round) {
    if (std::abs(d.determinant()) >= stop) return d;
    d.diagonal().array() += m.d_shift;
  }
  throw model_error("iid hop shift loop failed to reach the det stop level");
}

long long period_index(long long n, long long p) { return ((n % p) + p) % p; }

}  // namespace

ErgodicModel ErgodicModel::free_model(int l) {
  require(l >= 1, "l must be >= 1");
  ErgodicModel m;
  m.kind = ModelKind::Free;
  m.l = l;
  return m;
}

ErgodicModel ErgodicModel::rotation(int l, double alpha, double theta0,
                                    double lambda, RotationHop hop,
                                    double hop_const) {
  require(l >= 1, "l must be >= 1");
  require(std::isfinite(alpha) && std::isfinite(theta0) && std::isfinite(lambda),
          "rotation parameters must be finite");
  if (hop == RotationHop::Constant)
    require(std::pow(std::abs(hop_const), l) >= kDetFloor,
            "constant hop violates the determinant floor");
  ErgodicModel m;
  m.kind = ModelKind::Rotation;
  m.l = l;
  m.alpha = alpha;
  m.theta0 = theta0;
  m.lambda = lambda;
  m.hop_symbol = hop;
  m.hop_const = hop_const;
  return m;
}

ErgodicModel ErgodicModel::iid(int l, std::uint64_t seed, double d_lo,
                               double d_hi, double v_lo, double v_hi,
                               double d_det_stop) {
  require(l >= 1, "l must be >= 1");
  require(d_lo <= d_hi && v_lo <= v_hi, "entry ranges must be ordered");
  require(d_det_stop >= kDetFloor, "det stop level below the floor");
  ErgodicModel m;
  m.kind = ModelKind::Iid;
  m.l = l;
  m.seed = seed;
  m.d_lo = d_lo;
  m.d_hi = d_hi;
  m.v_lo = v_lo;
  m.v_hi = v_hi;
  m.d_det_stop = d_det_stop;
  return m;
}

ErgodicModel ErgodicModel::periodic(std::vector<Eigen::MatrixXd> d_list,
                                    std::vector<Eigen::MatrixXd> v_list) {
  require(!d_list.empty() && d_list.size() == v_list.size(),
          "periodic model needs matching nonempty D and V lists");
  const int l = static_cast<int>(d_list.front().rows());
  require(l >= 1, "l must be >= 1");
  for (auto* list : {&d_list, &v_list})
    for (auto& a : *list) {
      require(a.rows() == l && a.cols() == l, "periodic blocks must be l x l");
      require((a - a.transpose()).norm() <= 1e-12 * (1.0 + a.norm()),
              "periodic blocks must be symmetric");
      a = ((a + a.transpose()) / 2.0).eval();  // make symmetry exact
    }
  for (const auto& d : d_list)
    require(std::abs(d.determinant()) >= kDetFloor,
            "periodic hop violates the determinant floor");
  ErgodicModel m;
  m.kind = ModelKind::Periodic;
  m.l = l;
  m.period_d = std::move(d_list);
  m.period_v = std::move(v_list);
  return m;
}

SitePayload sample_site(const ErgodicModel& model, long long n) {
  require(model.l >= 1, "l must be >= 1");
  const long long nd = model.sigma * n + model.tau_d;
  const long long nv = model.sigma * n + model.tau_v;
  SitePayload site;
  switch (model.kind) {
    case ModelKind::Free:
      site.D = MatrixXd::Identity(model.l, model.l);
      site.V = MatrixXd::Zero(model.l, model.l);
      break;
    case ModelKind::Rotation:
      site.D = rotation_hop(model, nd);
      site.V = 2.0 * model.lambda *
               std::cos(2.0 * std::numbers::pi * theta_at(model, nv)) *
               MatrixXd::Identity(model.l, model.l);
      break;
    case ModelKind::Iid: {
      site.D = iid_hop(model, nd);
      const auto base = static_cast<std::uint32_t>(model.l * model.l);
      site.V = symmetric_uniform(model.l, model.seed, nv, base, model.v_lo,
                                 model.v_hi);
      break;
    }
    case ModelKind::Periodic: {
      const auto p = static_cast<long long>(model.period_d.size());
      site.D = model.period_d[period_index(nd, p)];
      site.V = model.period_v[period_index(nv, p)];
      break;
    }
    default:
      throw model_error("unknown model kind");
  }
  return site;
}

ErgodicModel shifted(const ErgodicModel& model, long long m) {
  ErgodicModel out = model;
  out.tau_d += model.sigma * m;
  out.tau_v += model.sigma * m;
  return out;
}

ErgodicModel reflected(const ErgodicModel& model) {
  ErgodicModel out = model;
  out.sigma = -model.sigma;
  out.tau_d = model.tau_d - model.sigma;
  return out;
}

double birkhoff_average(const ErgodicModel& model,
                        const std::function<double(const SitePayload&)>& f,
                        long long n_sites) {
  if (n_sites <= 0) throw std::invalid_argument("n_sites must be positive");
  double sum = 0.0, comp = 0.0;
  for (long long n = 0; n < n_sites; ++n) {
    double term = f(sample_site(model, n)) - comp;
    double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum / static_cast<double>(n_sites);
}

}  // namespace kotani
