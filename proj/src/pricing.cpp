#include "affine/pricing.hpp"

#include "affine/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace affine {

ShortRateSpec ShortRateSpec::constant(double r, int dim) { return {r, Vec::Zero(dim)}; }

void ShortRateSpec::check(int dim) const {
  if (lambda.size() != dim) {
    throw StructuralError("short rate lambda has dimension " + std::to_string(lambda.size()) + ", expected " +
                          std::to_string(dim));
  }
}

FunctionalFamily discounted_family(const FunctionalFamily& family, const ShortRateSpec& rate, double q_disc) {
  rate.check(family.dim());
  if (q_disc == 0.0) return family;
  return family.with_offsets(rate.l * q_disc, rate.lambda * q_disc);
}

RiccatiTrajectory discounted_exponent(const FunctionalFamily& family, const ShortRateSpec& rate, const Vec& u,
                                      double q_disc, double T, const SolveOptions& opts) {
  return solve_extended(discounted_family(family, rate, q_disc), u, T, opts);
}

ComplexTrajectory discounted_exponent(const FunctionalFamily& family, const ShortRateSpec& rate, const CVec& u,
                                      double q_disc, double T, const SolveOptions& opts) {
  return solve_complex(discounted_family(family, rate, q_disc), u, T, opts);
}

BondResult bond_price(const FunctionalFamily& family, const ShortRateSpec& rate, const Vec& x, double t, double T,
                      const SolveOptions& opts) {
  if (!(t <= T)) throw std::invalid_argument("bond requires t <= T");
  if (x.size() != family.dim()) throw StructuralError("state has the wrong dimension");
  const double tau = T - t;
  if (tau == 0.0) return BondPrice{1.0, 0.0, Vec::Zero(family.dim()), Certificate::FullDomain, 0.0};

  const FunctionalFamily disc = discounted_family(family, rate, -1.0);
  const Vec zero = Vec::Zero(family.dim());
  if (disc.domain().classify(zero) == DomainClass::Outside) {
    return InfiniteDiscount{"u = 0 lies outside the effective domain"};
  }
  const RiccatiTrajectory tr = solve_extended(disc, zero, tau, opts);
  if (!tr.completed()) return InfiniteDiscount{"discounted system not solvable on [0, T - t]: " + describe(tr.status)};
  const double A = -tr.p_end();
  const Vec B = -tr.q_end();
  const double price = std::exp(-A - B.dot(x));
  return BondPrice{price, A, B, tr.certificate, price * tr.error_estimate * (1.0 + x.cwiseAbs().sum())};
}

const Diagnostic* MartingaleReport::find(const std::string& clause) const {
  for (const auto& d : necessary_conditions) {
    if (d.clause == clause) return &d;
  }
  return nullptr;
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

MartingaleReport martingale_check(const FunctionalFamily& family, const Vec& theta, const ShortRateSpec& rate,
                                  double horizon, const SolveOptions& opts) {
  rate.check(family.dim());
  if (theta.size() != family.dim()) throw StructuralError("theta has the wrong dimension");
  MartingaleReport rep;
  rep.horizon = horizon;
  constexpr double tol = 1e-10;

  const DomainClass cls = family.domain().classify(theta);
  rep.necessary_conditions.push_back({"theta_in_Y", cls != DomainClass::Outside, std::string("theta is ") + to_string(cls)});
  const bool interior = cls == DomainClass::Interior;
  rep.necessary_conditions.push_back({"theta_in_Y_interior", interior, std::string("theta is ") + to_string(cls)});

  double f = 0.0;
  Vec r(family.dim());
  const bool evaluated = cls != DomainClass::Outside && family.eval(theta, f, r);
  bool f_ok = false, r_ok = false;
  if (evaluated) {
    const double df = f - rate.l;
    f_ok = std::abs(df) <= tol * std::max(1.0, std::abs(rate.l));
    rep.necessary_conditions.push_back({"F(theta)=l", f_ok, "F(theta) - l = " + num(df)});
    const double dr = (r - rate.lambda).cwiseAbs().maxCoeff();
    r_ok = dr <= tol * std::max(1.0, rate.lambda.cwiseAbs().maxCoeff());
    rep.necessary_conditions.push_back({"R(theta)=lambda", r_ok, "max |R(theta) - lambda| = " + num(dr)});
  } else {
    rep.necessary_conditions.push_back({"F(theta)=l", false, "F(theta) is not finite"});
    rep.necessary_conditions.push_back({"R(theta)=lambda", false, "R(theta) is not finite"});
  }

  bool stationary = false;
  std::string detail = "not attempted: theta outside the effective domain";
  if (evaluated) {
    const RiccatiTrajectory tr = discounted_exponent(family, rate, theta, -1.0, horizon, opts);
    if (!tr.completed()) {
      detail = "discounted system from (theta, -1): " + describe(tr.status);
    } else if (tr.certificate == Certificate::Unknown) {
      detail = "solution completes but is not certified minimal";
    } else {
      double dev = 0.0;
      for (std::size_t k = 0; k < tr.times.size(); ++k) {
        dev = std::max(dev, std::abs(tr.p[k]));
        dev = std::max(dev, (tr.q[k] - theta).cwiseAbs().maxCoeff());
      }
      stationary = dev <= tol;
      detail = "max deviation from (0, theta) on [0, " + num(horizon) + "] = " + num(dev);
    }
  }
  rep.necessary_conditions.push_back({"stationary_on_horizon", stationary, detail});
  rep.sufficient = interior && f_ok && r_ok;
  return rep;
}

ExplosionVerdict asset_explosion_time(const FunctionalFamily& family, const Vec& theta, const Vec& y, double t_max,
                                      double tol, const SolveOptions& opts) {
  if (family.domain().classify(theta) == DomainClass::Outside) {
    throw DomainError("theta lies outside the effective domain");
  }
  return explosion_time(family, y + theta, t_max, tol, opts);
}

namespace {

// Fourier transform of (e^x - K)^+ or (K - e^x)^+ at z = v + i lambda, with
// the 1/(2 pi) of the inversion folded in. The same expression serves both,
// only the admissible strip of Re z differs.
std::function<Complex(double)> vanilla_transform(double strike, double damping) {
  return [strike, damping](double lambda) {
    const Complex z(damping, lambda);
    return std::exp((1.0 - z) * std::log(strike)) / (2.0 * std::numbers::pi * z * (z - 1.0));
  };
}

PayoffTransform vanilla(int dim, int asset, double strike, double damping) {
  if (asset < 0 || asset >= dim) throw StructuralError("asset coordinate out of range");
  if (!(strike > 0.0)) throw std::invalid_argument("strike must be positive");
  PayoffTransform p;
  p.v = Vec::Zero(dim);
  p.v[asset] = damping;
  p.k = Vec::Zero(dim);
  p.k[asset] = 1.0;
  p.g_tilde = vanilla_transform(strike, damping);
  return p;
}

}  // namespace

PayoffTransform PayoffTransform::call(int dim, int asset, double strike, double damping) {
  if (!(damping > 1.0)) throw std::invalid_argument("call transform needs damping > 1");
  return vanilla(dim, asset, strike, damping);
}

PayoffTransform PayoffTransform::put(int dim, int asset, double strike, double damping) {
  if (!(damping < 0.0)) throw std::invalid_argument("put transform needs damping < 0");
  return vanilla(dim, asset, strike, damping);
}

PayoffTransform PayoffTransform::zero_payoff(int dim, int asset) {
  PayoffTransform p = vanilla(dim, asset, 1.0, 1.5);
  p.g_tilde = [](double) { return Complex(0.0); };
  p.zero = true;
  return p;
}

FourierResult fourier_price(const FunctionalFamily& family, const ShortRateSpec& rate, const PayoffTransform& payoff,
                            const Vec& x, double t, double T, const QuadOptions& quad, const SolveOptions& opts) {
  const int d = family.dim();
  if (x.size() != d || payoff.v.size() != d || payoff.k.size() != d) {
    throw StructuralError("state, damping and direction must match the family dimension");
  }
  if (!(t < T)) return FourierUnsupported{"horizon", "fourier_price needs t < T"};
  if (payoff.zero) return FourierPrice{0.0, 0.0, 0.0, 0};
  const double tau = T - t;

  const FunctionalFamily disc = discounted_family(family, rate, -1.0);
  for (const Vec& start : {Vec(Vec::Zero(d)), payoff.v}) {
    if (disc.domain().classify(start) != DomainClass::Interior) {
      return FourierUnsupported{"domain", "initial value is not interior to the effective domain"};
    }
    const RiccatiTrajectory tr = solve_extended(disc, start, tau, opts);
    if (!tr.completed() || !interior_path(disc, tr)) {
      return FourierUnsupported{"interior_path",
                                "discounted real solution does not stay interior on [0, T - t]: " + describe(tr.status)};
    }
  }

  long evaluations = 0;
  const CVec xc = x.cast<Complex>();
  auto integrand = [&](double lambda) -> Complex {
    if (++evaluations > quad.max_evaluations) {
      throw NumericError("Fourier integrand budget of " + std::to_string(quad.max_evaluations) + " evaluations exhausted",
                         std::numeric_limits<double>::infinity());
    }
    const CVec u = payoff.v.cast<Complex>() + Complex(0.0, lambda) * payoff.k.cast<Complex>();
    const ComplexTrajectory tr = solve_complex(disc, u, tau, opts);
    if (!tr.completed()) {
      throw NumericError("complex solve failed at lambda = " + num(lambda) + ": " + describe(tr.status), lambda);
    }
    return std::exp(tr.p_end() + (tr.q_end().transpose() * xc)(0, 0)) * payoff.g_tilde(lambda);
  };

  // Conjugate symmetry folds the real line onto [0, inf) as twice the real part.
  auto piece = [&](double a, double b, double total) {
    const double abs_tol = std::max(quad.abs_tol, 0.1 * quad.rel_tol * std::abs(total));
    if (payoff.conjugate_symmetric) {
      return quad::integrate([&](double s) { return 2.0 * integrand(s).real(); }, a, b, quad.rel_tol, abs_tol);
    }
    auto sym = [&](double s) { return integrand(s).real() + integrand(-s).real(); };
    return quad::integrate(sym, a, b, quad.rel_tol, abs_tol);
  };

  double lo = 0.0, hi = quad.initial_cutoff;
  double total = 0.0, error = 0.0;
  while (true) {
    const quad::Result r = piece(lo, hi, total);
    if (!r.converged) {
      throw NumericError("Fourier quadrature did not converge on [" + num(lo) + ", " + num(hi) + "]", r.error);
    }
    total += r.value;
    error += r.error;
    const double tol = std::max(quad.rel_tol * std::abs(total), quad.abs_tol);
    const double edge = std::abs(2.0 * integrand(hi).real()) * (hi - lo);
    if (lo > 0.0 && std::abs(r.value) < 0.1 * tol && edge < 0.1 * tol) {
      error += std::abs(r.value);
      break;
    }
    if (hi >= quad.max_cutoff) {
      throw NumericError("Fourier tail still above tolerance at cutoff " + num(hi), std::abs(r.value));
    }
    lo = hi;
    hi *= 2.0;
  }
  return FourierPrice{total, error, hi, evaluations};
}

}  // namespace affine
