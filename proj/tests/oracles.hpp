#pragma once

// Closed-form reference values coded independently of the library. Nothing
// here calls into affine::; each formula is derived directly from the
// corresponding scalar ODE or classical pricing identity.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

/// Scalar Riccati q' = sigma^2 q^2 / 2 - kappa q, q(0) = y, through w = 1/q.
struct CirExponent {
  double p;
  double q;
};

inline CirExponent cir_exponent(double kappa, double theta, double sigma, double y, double t) {
  if (y == 0.0) return {0.0, 0.0};
  const double c = sigma * sigma / (2.0 * kappa);
  const double w = c + (1.0 / y - c) * std::exp(kappa * t);
  const double p = (2.0 * kappa * kappa * theta / (sigma * sigma)) * (t - std::log(y * w) / kappa);
  return {p, 1.0 / w};
}

/// Finite iff y < 2 kappa / sigma^2 or t < blow-up time.
inline double cir_blowup_time(double kappa, double sigma, double y) {
  const double c = sigma * sigma / (2.0 * kappa);
  return std::log(c / (c - 1.0 / y)) / kappa;
}

inline double cir_mgf(double kappa, double theta, double sigma, double x, double y, double t) {
  const auto e = cir_exponent(kappa, theta, sigma, y, t);
  return std::exp(e.p + e.q * x);
}

/// Zero-coupon bond under a CIR short rate.
inline double cir_bond(double kappa, double theta, double sigma, double x, double tau) {
  const double g = std::sqrt(kappa * kappa + 2.0 * sigma * sigma);
  const double eg = std::exp(g * tau) - 1.0;
  const double den = (g + kappa) * eg + 2.0 * g;
  const double B = 2.0 * eg / den;
  const double A = std::pow(2.0 * g * std::exp(0.5 * (kappa + g) * tau) / den, 2.0 * kappa * theta / (sigma * sigma));
  return A * std::exp(-B * x);
}

inline double cir_mean(double kappa, double theta, double x, double t) {
  return x * std::exp(-kappa * t) + theta * (1.0 - std::exp(-kappa * t));
}

/// Heston E[exp(u log S_T)] with variance v0, log-price x0, rate r.
/// psi_v solves psi' = A psi^2 + B psi + C, psi(0) = 0, via the root ratio
/// g = r1 / r2 and the decaying exponential e^{-D t}.
inline cd heston_cf(double kappa, double theta, double sigma, double rho, double r, double v0, double x0, cd u,
                    double t) {
  const double A = 0.5 * sigma * sigma;
  const cd B = rho * sigma * u - kappa;
  const cd C = 0.5 * (u * u - u);
  const cd D = std::sqrt(B * B - 4.0 * A * C);
  const cd r1 = (-B - D) / (2.0 * A);
  const cd r2 = (-B + D) / (2.0 * A);
  const cd g = r1 / r2;
  const cd e = std::exp(-D * t);
  const cd psi = (r1 - r2 * g * e) / (1.0 - g * e);
  const cd int_psi = r1 * t - std::log((1.0 - g * e) / (1.0 - g)) / A;
  return std::exp(kappa * theta * int_psi + r * u * t + psi * v0 + u * x0);
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double bs_call(double S, double K, double sigma, double r, double T) {
  const double sd = sigma * std::sqrt(T);
  const double d1 = (std::log(S / K) + (r + 0.5 * sigma * sigma) * T) / sd;
  return S * norm_cdf(d1) - K * std::exp(-r * T) * norm_cdf(d1 - sd);
}

/// E[exp(u X_T)] for X_T ~ N(x + m T, s^2 T).
inline cd gaussian_cf(double x, double m, double s, cd u, double T) {
  return std::exp(u * (x + m * T) + 0.5 * s * s * T * u * u);
}

/// Composite Simpson rule, for scalar integrals in oracles.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

}  // namespace oracle
