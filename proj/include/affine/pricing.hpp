#pragma once

#include "affine/riccati.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace affine {

/// Short rate L(x) = l + <lambda, x>.
struct ShortRateSpec {
  double l = 0.0;
  Vec lambda;

  static ShortRateSpec constant(double r, int dim);
  void check(int dim) const;
};

/// The family with F + l q_disc and R + lambda q_disc: the exponents of
/// E[exp(q_disc int_0^T L(X_s) ds + <u, X_T>)].
FunctionalFamily discounted_family(const FunctionalFamily& family, const ShortRateSpec& rate, double q_disc);

RiccatiTrajectory discounted_exponent(const FunctionalFamily& family, const ShortRateSpec& rate, const Vec& u,
                                      double q_disc, double T, const SolveOptions& opts = {});
ComplexTrajectory discounted_exponent(const FunctionalFamily& family, const ShortRateSpec& rate, const CVec& u,
                                      double q_disc, double T, const SolveOptions& opts = {});

struct BondPrice {
  double price;
  /// price = exp(-A - <B, x>).
  double A;
  Vec B;
  Certificate certificate;
  /// Integrator error propagated to the price to first order.
  double error_estimate;
};
struct InfiniteDiscount {
  std::string reason;
};
using BondResult = std::variant<BondPrice, InfiniteDiscount>;

/// Zero-coupon bond P(t, T) at state x.
BondResult bond_price(const FunctionalFamily& family, const ShortRateSpec& rate, const Vec& x, double t, double T,
                      const SolveOptions& opts = {});

struct Diagnostic {
  std::string clause;
  bool pass;
  std::string detail;
};

/// Whether exp(<theta, X_t> - int_0^t L(X_s) ds) is a martingale.
/// `sufficient` is the open-domain clause. The stationarity diagnostic can
/// only be checked on [0, horizon], so a full pass is horizon-limited.
struct MartingaleReport {
  bool sufficient = false;
  std::vector<Diagnostic> necessary_conditions;
  double horizon = 1.0;
  bool horizon_limited = true;

  const Diagnostic* find(const std::string& clause) const;
};

MartingaleReport martingale_check(const FunctionalFamily& family, const Vec& theta, const ShortRateSpec& rate,
                                  double horizon = 1.0, const SolveOptions& opts = {});

/// Explosion time of E[S_T^y]-type moments: the lifetime from y + theta.
/// Throws DomainError when theta is outside the effective domain.
ExplosionVerdict asset_explosion_time(const FunctionalFamily& family, const Vec& theta, const Vec& y, double t_max,
                                      double tol, const SolveOptions& opts = {});

/// g(x) = int exp(<v + i lambda k, x>) g_tilde(lambda) dlambda over the real
/// line, with k the direction of the single integration variable.
struct PayoffTransform {
  Vec v;
  Vec k;
  std::function<Complex(double)> g_tilde;
  /// g_tilde(-lambda) = conj(g_tilde(lambda)), so the integral is twice the
  /// real part over [0, inf).
  bool conjugate_symmetric = true;
  /// The integrand vanishes identically.
  bool zero = false;

  /// (e^{x_asset} - strike)^+ with damping > 1 on the asset coordinate.
  static PayoffTransform call(int dim, int asset, double strike, double damping = 1.5);
  /// (strike - e^{x_asset})^+ with damping < 0 on the asset coordinate.
  static PayoffTransform put(int dim, int asset, double strike, double damping = -0.5);
  static PayoffTransform zero_payoff(int dim, int asset);
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  double initial_cutoff = 16.0;
  double max_cutoff = 1e6;
  /// Integrand evaluations before giving up with NumericError.
  long max_evaluations = 20'000;
};

struct FourierPrice {
  double value;
  double error_estimate;
  double cutoff;
  long evaluations;
};
struct FourierUnsupported {
  std::string clause;
  std::string reason;
};
using FourierResult = std::variant<FourierPrice, FourierUnsupported>;

/// E[exp(-int_t^T L(X_s) ds) g(X_T) | X_t = x]. Throws NumericError when the
/// quadrature does not converge within `quad`.
FourierResult fourier_price(const FunctionalFamily& family, const ShortRateSpec& rate, const PayoffTransform& payoff,
                            const Vec& x, double t, double T, const QuadOptions& quad = {},
                            const SolveOptions& opts = {});

}  // namespace affine
