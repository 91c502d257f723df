#include "affine/levy_functionals.hpp"

#include <algorithm>
#include <cmath>

namespace affine {

double eval_real(const LKFunctional& f, const Vec& y) {
  const double jumps = f.measure.integral(y, f.truncation);
  if (!std::isfinite(jumps)) return kInf;
  return 0.5 * y.dot(f.quadratic * y) + f.linear.dot(y) + jumps;
}

namespace {

bool try_eval_complex(const LKFunctional& f, const CVec& u, Complex& out) {
  Complex jumps;
  if (!f.measure.integral(u, f.truncation, jumps)) return false;
  const CVec Qu = f.quadratic.cast<Complex>() * u;
  // Bilinear, not sesquilinear: sum u_k (Q u)_k without conjugation.
  out = 0.5 * (u.transpose() * Qu)(0, 0) + (f.linear.cast<Complex>().transpose() * u)(0, 0) + jumps;
  return true;
}

}  // namespace

Complex eval_complex(const LKFunctional& f, const CVec& u) {
  Complex out;
  if (!try_eval_complex(f, u, out)) {
    const Vec re = real_part(u);
    const DomainY tail = f.measure.tail_domain(static_cast<int>(u.size()));
    throw DomainError("Re u is not interior to the tail domain (" + tail.describe() + "), nearest constraint: " +
                      tail.nearest_constraint(re));
  }
  return out;
}

FunctionalFamily FunctionalFamily::raw(int dim, RawReal real, DomainY domain, RawComplex complex) {
  if (dim < 1 || !real) throw StructuralError("raw functional family needs a dimension and a real callback");
  FunctionalFamily fam;
  fam.dim_ = dim;
  fam.domain_ = std::move(domain);
  fam.diffusion_ = false;
  fam.r_offset_ = Vec::Zero(dim);
  fam.raw_real_ = std::move(real);
  fam.raw_complex_ = std::move(complex);
  return fam;
}

bool FunctionalFamily::eval(const Vec& y, double& f, Vec& r) const {
  if (raw_real_) {
    if (domain_.classify(y) == DomainClass::Outside) return false;
    r.resize(dim_);
    if (!raw_real_(y, f, r)) return false;
  } else {
    f = eval_real(F_, y);
    if (!std::isfinite(f)) return false;
    r.resize(dim_);
    for (int i = 0; i < dim_; ++i) {
      r[i] = eval_real(R_[static_cast<std::size_t>(i)], y);
      if (!std::isfinite(r[i])) return false;
    }
  }
  f += f_offset_;
  r += r_offset_;
  return std::isfinite(f) && r.allFinite();
}

bool FunctionalFamily::eval(const CVec& u, Complex& f, CVec& r) const {
  if (raw_real_) {
    if (!raw_complex_) throw UnsupportedError("raw functional family has no complex extension");
    if (domain_.classify(real_part(u)) != DomainClass::Interior) return false;
    r.resize(dim_);
    if (!raw_complex_(u, f, r)) return false;
  } else {
    if (!try_eval_complex(F_, u, f)) return false;
    r.resize(dim_);
    for (int i = 0; i < dim_; ++i) {
      if (!try_eval_complex(R_[static_cast<std::size_t>(i)], u, r[i])) return false;
    }
  }
  f += f_offset_;
  r += r_offset_.cast<Complex>();
  return std::isfinite(f.real()) && std::isfinite(f.imag()) && r.allFinite();
}

FunctionalFamily FunctionalFamily::with_offsets(double f_offset, const Vec& r_offset) const {
  if (r_offset.size() != dim_) throw StructuralError("offset vector has the wrong dimension");
  FunctionalFamily out = *this;
  out.f_offset_ += f_offset;
  out.r_offset_ += r_offset;
  return out;
}

namespace {

// Coordinate functionals of the matrix-cone R(u) = 2 u alpha u + B^T(u) + int (e^{tr(u xi)} - 1) mu(dxi)
// on column-major vec(u).
std::vector<LKFunctional> matrix_R(const MatrixParams& p, int d) {
  const int N = d * d;
  auto at = [d](int r, int c) { return r + c * d; };
  std::vector<LKFunctional> R;
  for (int s = 0; s < d; ++s) {
    for (int r = 0; r < d; ++r) {
      // (u alpha u)_{rs} = sum_{a,b} u_{ra} alpha_{ab} u_{bs}
      Mat E = Mat::Zero(N, N);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) E(at(r, a), at(b, s)) += p.alpha(a, b);
      }
      LKFunctional f;
      f.quadratic = 2.0 * (E + E.transpose());
      f.linear = p.B.col(at(r, s));
      std::vector<PointMass> atoms;
      for (const auto& atom : p.mu.atoms) {
        const double w = atom.weight(r, s);
        if (w != 0.0) atoms.push_back({Eigen::Map<const Vec>(atom.location.data(), N), w});
      }
      f.measure = atoms.empty() ? JumpMeasure::zero() : JumpMeasure::point_masses(std::move(atoms));
      f.truncation = Truncation::None;
      R.push_back(std::move(f));
    }
  }
  return R;
}

}  // namespace

FunctionalFamily build_family(const AffineParams& params) {
  const ValidationReport rep = validate(params);
  if (!rep.passed) {
    std::string msg = "parameters are not admissible:";
    for (const auto& v : rep.violations) msg += " [" + v.id + "] " + v.message + ";";
    throw ValidationError(msg);
  }
  FunctionalFamily fam;
  const int dim = params.space.dimension();
  fam.dim_ = dim;
  fam.r_offset_ = Vec::Zero(dim);
  fam.source_ = std::make_shared<const AffineParams>(params);

  if (params.space.is_canonical()) {
    const auto& p = params.canonical();
    fam.F_ = LKFunctional{p.a, p.b, p.m, Truncation::Unit};
    fam.domain_ = p.m.tail_domain(dim);
    fam.diffusion_ = p.m.is_zero();
    for (int i = 0; i < dim; ++i) {
      const auto k = static_cast<std::size_t>(i);
      fam.R_.push_back(LKFunctional{p.alpha[k], p.beta[k], p.mu[k], Truncation::Unit});
      fam.domain_ = fam.domain_.intersect(p.mu[k].tail_domain(dim));
      fam.diffusion_ = fam.diffusion_ && p.mu[k].is_zero();
    }
  } else {
    const auto& p = params.matrix();
    const int d = params.space.matrix_space().d;
    fam.F_ = LKFunctional{Mat::Zero(dim, dim), Eigen::Map<const Vec>(p.b.data(), dim), p.m, Truncation::None};
    fam.R_ = matrix_R(p, d);
    fam.domain_ = DomainY::full_space();
    fam.diffusion_ = p.m.is_zero() && p.mu.is_zero();
  }
  return fam;
}

DomainClass domain_classify(const FunctionalFamily& family, const Vec& y) { return family.domain().classify(y); }

double growth_function(const AffineParams& params, const Vec& y) {
  if (!params.space.is_canonical()) throw UnsupportedError("growth estimate is defined on canonical state spaces");
  const auto& p = params.canonical();
  const int m = params.space.canonical_space().m;
  const int d = params.space.dimension();
  const int n = d - m;
  const double exp_norm = std::exp(2.0 * y.norm());

  double g = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Vec& beta = p.beta[k];
    const Mat& alpha = p.alpha[k];
    const auto& mu = p.mu[k];

    const double drift = beta.head(m).norm() + beta.tail(n).norm();
    const double diffusion = 0.5 * alpha(i, i) * std::max(y[i], 0.0) + alpha.row(i).tail(n).norm() +
                             0.5 * alpha.bottomRightCorner(n, n).norm();

    const double large = mu.large_jump_exp(y) + mu.large_jump_mass();
    if (!std::isfinite(large)) return kInf;

    std::vector<int> I_minus, J_plus{i};
    for (int c = 0; c < m; ++c) {
      if (c != i) I_minus.push_back(c);
    }
    for (int c = m; c < d; ++c) J_plus.push_back(c);
    const double small_moments = mu.small_abs_moment(I_minus).value + mu.small_sq_moment(J_plus).value;
    const double small = (1.0 + exp_norm) * small_moments + mu.small_exp_term(i, std::max(y[i], 0.0));

    g += drift + diffusion + large + small;
  }
  return g;
}

GrowthBound growth_bound(const FunctionalFamily& family, const CVec& u) {
  const AffineParams* src = family.source();
  if (src == nullptr || !src->space.is_canonical()) {
    throw UnsupportedError("growth estimate needs a family built from canonical parameters");
  }
  const Vec re = real_part(u);
  if (family.domain().classify(re) != DomainClass::Interior) {
    throw DomainError("Re u is not interior to the effective domain (" + family.domain().describe() + ")");
  }
  const int m = src->space.canonical_space().m;
  const int n = family.dim() - m;
  double lhs = 0.0;
  for (int i = 0; i < m; ++i) {
    const Complex Ri = eval_complex(family.R()[static_cast<std::size_t>(i)], u);
    lhs += (std::conj(u[i]) * Ri).real();
  }
  const double uI = u.head(m).squaredNorm();
  const double uJ = u.tail(n).squaredNorm();
  return {lhs, growth_function(*src, re) * (1.0 + uJ) * (1.0 + uI)};
}

ScalarBound verify_complex_inequality(Complex z) {
  const double p = z.real();
  const double q = z.imag();
  double lhs;
  if (std::abs(z) < 1e-2) {
    // (e^z - 1 - z)/z = sum_k z^{k+1}/(k+2)!
    Complex term = z / 2.0;
    Complex acc = term;
    for (int k = 1; k < 12; ++k) {
      term *= z / static_cast<double>(k + 2);
      acc += term;
    }
    lhs = acc.real();
  } else {
    const double ep = std::exp(p);
    lhs = (p * (ep * std::cos(q) - 1.0 - p) + q * (ep * std::sin(q) - q)) / (p * p + q * q);
  }
  return {lhs, std::expm1(std::max(p, 0.0))};
}

}  // namespace affine
