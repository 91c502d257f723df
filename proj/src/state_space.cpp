#include "affine/state_space.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace affine {

namespace {

double psd_tolerance(const Mat& a) { return 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()); }

bool is_symmetric(const Mat& a) {
  if (a.rows() != a.cols()) return false;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_psd(const Mat& a) { return is_symmetric(a) && min_eigenvalue(a) >= -psd_tolerance(a); }

Mat unvec(const Vec& v, int d) { return Eigen::Map<const Mat>(v.data(), d, d); }
Vec vec(const Mat& x) { return Eigen::Map<const Vec>(x.data(), x.size()); }

std::string idx(int k) { return std::to_string(k); }

void require(bool ok, const std::string& what) {
  if (!ok) throw StructuralError(what);
}

}  // namespace

StateSpace StateSpace::canonical(int m, int n) {
  require(m >= 0 && n >= 0 && m + n >= 1, "canonical state space needs m, n >= 0 and m + n >= 1");
  return StateSpace{CanonicalSpace{m, n}};
}

StateSpace StateSpace::matrix_cone(int d) {
  require(d >= 2, "matrix cone needs d >= 2; represent d = 1 as the canonical space R_{>=0} (m = 1, n = 0)");
  return StateSpace{MatrixConeSpace{d}};
}

int StateSpace::dimension() const {
  if (is_canonical()) return canonical_space().dim();
  const int d = matrix_space().d;
  return d * d;
}

bool StateSpace::contains(const Vec& x) const {
  if (x.size() != dimension()) return false;
  if (!x.allFinite()) return false;
  if (is_canonical()) {
    for (int k = 0; k < canonical_space().m; ++k) {
      if (x[k] < 0.0) return false;
    }
    return true;
  }
  return is_psd(unvec(x, matrix_space().d));
}

std::vector<bool> StateSpace::nonnegative_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(dimension()), false);
  if (is_canonical()) {
    for (int k = 0; k < canonical_space().m; ++k) mask[static_cast<std::size_t>(k)] = true;
  }
  return mask;
}

std::string StateSpace::describe() const {
  std::ostringstream os;
  if (is_canonical()) {
    os << "R_{>=0}^" << canonical_space().m << " x R^" << canonical_space().n;
  } else {
    os << "S_" << matrix_space().d << "^+";
  }
  return os.str();
}

Mat linear_drift_from(const Mat& M) {
  const auto d = M.rows();
  Mat B = Mat::Zero(d * d, d * d);
  for (Eigen::Index c = 0; c < d * d; ++c) {
    Mat e = Mat::Zero(d, d);
    e(c % d, c / d) = 1.0;
    B.col(c) = vec(M * e + e * M.transpose());
  }
  return B;
}

bool ValidationReport::has(const std::string& id) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.id == id; });
}

void ValidationReport::add(std::string id, std::string message) {
  passed = false;
  violations.push_back({std::move(id), std::move(message)});
}

ValidationReport validate_canonical(const AffineParams& params) {
  require(params.space.is_canonical(), "validate_canonical needs a canonical state space");
  require(std::holds_alternative<CanonicalParams>(params.coefficients), "canonical space with matrix coefficients");
  const auto& cs = params.space.canonical_space();
  const auto& p = params.canonical();
  const int d = cs.dim();
  const int m = cs.m;
  auto in_I = [m](int k) { return k < m; };

  require(p.a.rows() == d && p.a.cols() == d, "a must be " + idx(d) + " x " + idx(d));
  require(static_cast<int>(p.alpha.size()) == d, "alpha needs one matrix per coordinate");
  require(p.b.size() == d, "b must have length " + idx(d));
  require(static_cast<int>(p.beta.size()) == d, "beta needs one vector per coordinate");
  require(static_cast<int>(p.mu.size()) == d, "mu needs one measure per coordinate");
  for (int i = 0; i < d; ++i) {
    require(p.alpha[i].rows() == d && p.alpha[i].cols() == d, "alpha[" + idx(i) + "] must be " + idx(d) + " x " + idx(d));
    require(p.beta[i].size() == d, "beta[" + idx(i) + "] must have length " + idx(d));
    p.mu[i].check_dimension(d);
  }
  p.m.check_dimension(d);

  ValidationReport rep;
  const auto mask = params.space.nonnegative_mask();

  if (!is_psd(p.a)) rep.add("a_psd", "a must be symmetric positive semidefinite");
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      if ((in_I(k) || in_I(l)) && p.a(k, l) != 0.0) {
        rep.add("a_I_zero", "a[" + idx(k) + "][" + idx(l) + "] must vanish since an index lies in I");
      }
    }
  }
  for (int i = 0; i < d; ++i) {
    const Mat& al = p.alpha[i];
    if (!is_psd(al)) rep.add("alpha_psd", "alpha[" + idx(i) + "] must be symmetric positive semidefinite");
    if (!in_I(i)) {
      if (al.cwiseAbs().maxCoeff() != 0.0) rep.add("alpha_J_zero", "alpha[" + idx(i) + "] must vanish for j in J");
      continue;
    }
    for (int k = 0; k < d; ++k) {
      for (int l = 0; l < d; ++l) {
        const bool off = (in_I(k) && k != i) || (in_I(l) && l != i);
        if (off && al(k, l) != 0.0) {
          rep.add("alpha_support",
                  "alpha[" + idx(i) + "][" + idx(k) + "][" + idx(l) + "] must vanish outside {i} u J");
        }
      }
    }
  }

  for (int k = 0; k < m; ++k) {
    const double drift = p.b[k] - p.m.truncated_mean(k);
    if (!(drift >= 0.0)) {
      rep.add("b_in_D", "b in D violated: b[" + idx(k) + "] - int h_k dm = " + std::to_string(drift) + " < 0");
    }
  }

  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      if (k == i) continue;
      const double v = p.beta[i][k] - p.mu[i].truncated_mean(k);
      if (!(v >= 0.0)) {
        rep.add("beta_cross", "beta[" + idx(i) + "][" + idx(k) + "] - int h_k dmu[" + idx(i) + "] = " + std::to_string(v) +
                                  " < 0");
      }
    }
  }
  for (int j = m; j < d; ++j) {
    for (int k = 0; k < m; ++k) {
      if (p.beta[j][k] != 0.0) rep.add("beta_J_on_I", "beta[" + idx(j) + "][" + idx(k) + "] must vanish for j in J, k in I");
    }
  }

  std::vector<int> I;
  for (int k = 0; k < m; ++k) I.push_back(k);

  auto positive_weights = [](const JumpMeasure& mu) {
    if (const auto* pm = std::get_if<PointMassMixture>(&mu.variant())) {
      for (const auto& a : pm->atoms) {
        if (!(a.weight > 0.0)) return false;
      }
    }
    if (const auto* e = std::get_if<OneSidedExponential>(&mu.variant())) return e->intensity > 0.0;
    if (const auto* g = std::get_if<GaussianFactor>(&mu.variant())) return g->intensity > 0.0;
    return true;
  };
  auto levy_ok = [](const JumpMeasure& mu) {
    auto r = mu.levy_moment();
    return r.converged && std::isfinite(r.value);
  };

  if (!positive_weights(p.m) || !levy_ok(p.m)) rep.add("levy_measure", "m must be a Levy measure with positive weights");
  if (!p.m.support_within(mask)) rep.add("jump_support", "support of m must lie in D");
  {
    auto r = p.m.small_abs_moment(I);
    if (!r.converged || !std::isfinite(r.value)) rep.add("m_small_I_integrable", "int_{|xi|<=1} |xi_I| m(dxi) diverges");
  }
  for (int i = 0; i < d; ++i) {
    const auto& mu = p.mu[i];
    if (!in_I(i)) {
      if (!mu.is_zero()) rep.add("mu_J_zero", "mu[" + idx(i) + "] must vanish for j in J");
      continue;
    }
    if (!positive_weights(mu) || !levy_ok(mu)) {
      rep.add("levy_measure", "mu[" + idx(i) + "] must be a Levy measure with positive weights");
    }
    if (!mu.support_within(mask)) rep.add("jump_support", "support of mu[" + idx(i) + "] must lie in D");
    std::vector<int> I_minus;
    for (int k : I) {
      if (k != i) I_minus.push_back(k);
    }
    auto r = mu.small_abs_moment(I_minus);
    if (!r.converged || !std::isfinite(r.value)) {
      rep.add("mu_small_integrable", "int_{|xi|<=1} |xi_{I\\{" + idx(i) + "}}| mu[" + idx(i) + "](dxi) diverges");
    }
  }
  return rep;
}

namespace {

// Orthogonal unit pairs (v, w) probing the boundary of S_d^+ through the
// rank-one matrices u = v v^T, x = w w^T with tr(u x) = <v, w>^2 = 0.
std::vector<std::pair<Vec, Vec>> boundary_pairs(int d) {
  std::vector<std::pair<Vec, Vec>> pairs;
  auto rotated = [d](int i, int j, double angle) {
    Vec v = Vec::Zero(d), w = Vec::Zero(d);
    v[i] = std::cos(angle);
    v[j] = std::sin(angle);
    w[i] = -std::sin(angle);
    w[j] = std::cos(angle);
    return std::make_pair(v, w);
  };
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      pairs.push_back(rotated(i, j, 0.0));
      pairs.push_back(rotated(i, j, std::numbers::pi / 4.0));
    }
  }
  for (int i = 0; i < d; ++i) {
    const int j = (i + 1) % d;
    pairs.push_back(rotated(i, j, std::numbers::pi / 3.0));
    pairs.push_back(rotated(i, j, std::numbers::pi / 6.0));
  }
  std::mt19937_64 rng(0x5eed'1a7e'0b0dULL);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 100; ++k) {
    Vec v(d), w(d);
    for (int c = 0; c < d; ++c) v[c] = normal(rng);
    for (int c = 0; c < d; ++c) w[c] = normal(rng);
    v.normalize();
    w -= w.dot(v) * v;
    if (w.norm() < 1e-8) continue;
    w.normalize();
    pairs.emplace_back(v, w);
  }
  return pairs;
}

}  // namespace

ValidationReport validate_matrix(const AffineParams& params) {
  require(!params.space.is_canonical(), "validate_matrix needs the matrix cone; d = 1 is the canonical space R_{>=0}");
  require(std::holds_alternative<MatrixParams>(params.coefficients), "matrix space with canonical coefficients");
  const int d = params.space.matrix_space().d;
  const int N = d * d;
  const auto& p = params.matrix();
  require(p.alpha.rows() == d && p.alpha.cols() == d, "alpha must be " + idx(d) + " x " + idx(d));
  require(p.b.rows() == d && p.b.cols() == d, "b must be " + idx(d) + " x " + idx(d));
  require(p.B.rows() == N && p.B.cols() == N, "B must act on vec(x): " + idx(N) + " x " + idx(N));
  require(p.m.is_zero() || std::holds_alternative<PointMassMixture>(p.m.variant()),
          "constant jumps on the matrix cone must be point masses");
  p.m.check_dimension(N);
  for (const auto& a : p.mu.atoms) {
    require(a.location.rows() == d && a.location.cols() == d && a.weight.rows() == d && a.weight.cols() == d,
            "mu atoms must be " + idx(d) + " x " + idx(d));
  }

  ValidationReport rep;
  if (!is_psd(p.alpha)) rep.add("alpha_psd", "alpha must lie in S_d^+");
  if (!is_psd(p.b)) rep.add("b_psd", "b must lie in S_d^+");
  {
    const Mat gap = p.b - (d - 1) * p.alpha;
    if (!is_symmetric(gap) || min_eigenvalue(gap) < -psd_tolerance(gap)) {
      rep.add("b_dominates_alpha", "b - (d-1) alpha must be positive semidefinite; smallest eigenvalue " +
                                       std::to_string(min_eigenvalue(gap)));
    }
  }
  if (const auto* pm = std::get_if<PointMassMixture>(&p.m.variant())) {
    for (const auto& a : pm->atoms) {
      const Mat xi = unvec(a.location, d);
      if (!is_psd(xi) || xi.norm() == 0.0) rep.add("m_support", "m must live on S_d^+ \\ {0}");
      if (!(a.weight > 0.0) || !std::isfinite(a.weight)) rep.add("m_integrable", "m must have finite positive weights");
    }
  }
  for (const auto& a : p.mu.atoms) {
    if (!is_psd(a.location) || a.location.norm() == 0.0) rep.add("mu_support", "mu must live on S_d^+ \\ {0}");
    if (!is_psd(a.weight) || !a.weight.allFinite()) rep.add("mu_psd_valued", "mu weights must lie in S_d^+");
  }

  // B must map S_d into S_d.
  for (int c = 0; c < N; ++c) {
    Mat e = Mat::Zero(d, d);
    e(c % d, c / d) += 0.5;
    e(c / d, c % d) += 0.5;
    const Mat image = unvec(p.B * vec(e), d);
    if (!is_symmetric(image)) {
      rep.add("B_symmetric", "B must map symmetric matrices to symmetric matrices");
      break;
    }
  }

  double worst = kInf;
  for (const auto& [v, w] : boundary_pairs(d)) {
    const Mat u = v * v.transpose();
    const Mat image = unvec(p.B * vec(u), d);
    worst = std::min(worst, w.dot(image * w));
  }
  rep.inward_margin = worst;
  const double scale = std::max(1.0, p.B.cwiseAbs().maxCoeff());
  if (worst < -1e-12 * scale) {
    rep.add("B_inward", "B is not inward pointing: tr(x B(u)) = " + std::to_string(worst) + " < 0 for some boundary pair");
  }
  return rep;
}

ValidationReport validate(const AffineParams& params) {
  return params.space.is_canonical() ? validate_canonical(params) : validate_matrix(params);
}

bool check_complex_assumption(const AffineParams& params) {
  if (params.space.is_canonical()) return true;
  const Mat& alpha = params.matrix().alpha;
  const double scale = alpha.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  Eigen::SelfAdjointEigenSolver<Mat> es(alpha, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().minCoeff() > 1e-12 * scale;
}

AffineParams embed_discounting(const AffineParams& params, double l, const Vec& lambda) {
  if (!params.space.is_canonical()) {
    throw UnsupportedError("state-space extension D x R is only available for canonical state spaces");
  }
  const auto& cs = params.space.canonical_space();
  const auto& p = params.canonical();
  const int d = cs.dim();
  require(lambda.size() == d, "lambda must have length " + idx(d));

  auto pad = [d](const Mat& a) {
    Mat out = Mat::Zero(d + 1, d + 1);
    out.topLeftCorner(d, d) = a;
    return out;
  };
  CanonicalParams q;
  q.a = pad(p.a);
  q.b = Vec::Zero(d + 1);
  q.b.head(d) = p.b;
  q.b[d] = l;
  q.m = p.m.lifted(d + 1);
  for (int i = 0; i < d; ++i) {
    q.alpha.push_back(pad(p.alpha[i]));
    Vec bi = Vec::Zero(d + 1);
    bi.head(d) = p.beta[i];
    bi[d] = lambda[i];
    q.beta.push_back(bi);
    q.mu.push_back(p.mu[i].lifted(d + 1));
  }
  q.alpha.push_back(Mat::Zero(d + 1, d + 1));
  q.beta.push_back(Vec::Zero(d + 1));
  q.mu.push_back(JumpMeasure::zero());

  AffineParams out;
  out.space = StateSpace::canonical(cs.m, cs.n + 1);
  out.coefficients = std::move(q);
  return out;
}

}  // namespace affine
