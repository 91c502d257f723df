#include "affine/transform.hpp"

#include <cmath>

namespace affine {

namespace {

void check_state(const FunctionalFamily& family, const Vec& x) {
  if (x.size() != family.dim()) {
    throw StructuralError("state has dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(family.dim()));
  }
  if (const AffineParams* src = family.source(); src != nullptr && !src->space.contains(x)) {
    throw DomainError("x is not a point of the state space " + src->space.describe());
  }
}

}  // namespace

MomentResult exp_moment(const FunctionalFamily& family, const Vec& x, const Vec& y, double T,
                        const SolveOptions& opts) {
  check_state(family, x);
  MomentResult out;
  const DomainClass cls = family.domain().classify(y);
  if (cls == DomainClass::Outside && T > 0.0) {
    out.verdict = InfiniteMoment{0.0};
    return out;
  }
  if (T == 0.0) {
    out.verdict = FiniteMoment{std::exp(y.dot(x)), 0.0, y};
    out.certificate = Certificate::FullDomain;
    return out;
  }

  const RiccatiTrajectory tr = solve_extended(family, y, T, opts);
  out.certificate = tr.certificate;
  out.status = tr.status;
  if (tr.completed()) {
    if (tr.certificate == Certificate::Unknown) {
      out.verdict = IndeterminateMoment{"solution reaches T but no minimality clause could be verified"};
    } else {
      out.verdict = FiniteMoment{std::exp(tr.p_end() + tr.q_end().dot(x)), tr.p_end(), tr.q_end()};
    }
    return out;
  }
  if (cls == DomainClass::Boundary) {
    out.verdict = IndeterminateMoment{"y on the boundary of the effective domain: " + describe(tr.status)};
    return out;
  }
  if (const auto* b = std::get_if<BlowUp>(&tr.status)) {
    out.verdict = InfiniteMoment{b->t_star};
  } else if (const auto* e = std::get_if<DomainExit>(&tr.status)) {
    out.verdict = InfiniteMoment{e->t};
  } else {
    out.verdict = IndeterminateMoment{describe(tr.status)};
  }
  return out;
}

MomentResult exp_moment(const AffineParams& params, const Vec& x, const Vec& y, double T, const SolveOptions& opts) {
  return exp_moment(build_family(params), x, y, T, opts);
}

std::pair<double, Vec> conditional_exponent(const FunctionalFamily& family, const Vec& y, double T, double t,
                                            const SolveOptions& opts) {
  if (!(t >= 0.0 && t <= T)) throw std::invalid_argument("conditioning time must lie in [0, T]");
  const RiccatiTrajectory full = solve_extended(family, y, T, opts);
  if (!full.completed() || full.certificate == Certificate::Unknown) {
    throw UnsupportedError("moment at horizon T is not certified finite: " + describe(full.status));
  }
  if (t == 0.0) return {full.p_end(), full.q_end()};
  if (t == T) return {0.0, y};
  const RiccatiTrajectory part = solve_extended(family, y, T - t, opts);
  return {part.p_end(), part.q_end()};
}

CFResult char_function(const FunctionalFamily& family, const Vec& x, const CVec& u, double T,
                       const SolveOptions& opts) {
  check_state(family, x);
  if (const AffineParams* src = family.source(); src != nullptr && !check_complex_assumption(*src)) {
    return CFUnsupported{"assumption", "matrix alpha is neither zero nor invertible"};
  }
  const Vec re = real_part(u);
  if (family.domain().classify(re) != DomainClass::Interior) {
    return CFUnsupported{"domain", "Re u is not interior to the effective domain (" + family.domain().describe() + ")"};
  }
  const RiccatiTrajectory real = solve_extended(family, re, T, opts);
  if (!real.completed() || !interior_path(family, real)) {
    return CFUnsupported{"interior_path", "real solution from Re u does not stay interior on [0, T]: " +
                                              describe(real.status)};
  }
  const ComplexTrajectory cplx = solve_complex(family, u, T, opts);
  if (!cplx.completed()) {
    throw NumericError("complex Riccati solve did not reach T: " + describe(cplx.status), cplx.t_end());
  }
  const Complex phi = cplx.p_end();
  const CVec psi = cplx.q_end();
  const Complex value = std::exp(phi + (psi.transpose() * x.cast<Complex>())(0, 0));
  const double bound = std::exp(real.p_end() + real.q_end().dot(x));
  const double slack = bound - std::abs(value);
  if (slack < -1e-10 * std::max(1.0, bound)) {
    throw NumericError("modulus bound |E e^{<u,X>}| <= E e^{<Re u,X>} violated", -slack);
  }
  return CFValue{value, phi, psi, slack};
}

CFResult char_function(const AffineParams& params, const Vec& x, const CVec& u, double T, const SolveOptions& opts) {
  return char_function(build_family(params), x, u, T, opts);
}

}  // namespace affine
