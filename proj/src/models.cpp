#include "affine/models.hpp"

namespace affine::models {

namespace {

CanonicalParams zero_params(int d) {
  CanonicalParams p;
  p.a = Mat::Zero(d, d);
  p.b = Vec::Zero(d);
  p.m = JumpMeasure::zero();
  for (int i = 0; i < d; ++i) {
    p.alpha.push_back(Mat::Zero(d, d));
    p.beta.push_back(Vec::Zero(d));
    p.mu.push_back(JumpMeasure::zero());
  }
  return p;
}

AffineParams make(int m, int n, CanonicalParams p) {
  AffineParams out;
  out.space = StateSpace::canonical(m, n);
  out.coefficients = std::move(p);
  return out;
}

// int (e^{xi} - 1 - h(xi)) nu(dxi) for a jump measure on a single coordinate k of R^d.
double jump_exponent_at_unit(const JumpMeasure& nu, int d, int k) {
  Vec e = Vec::Zero(d);
  e[k] = 1.0;
  return nu.integral(e, Truncation::Unit);
}

}  // namespace

AffineParams cir(double kappa, double theta, double sigma) {
  auto p = zero_params(1);
  p.alpha[0](0, 0) = sigma * sigma;
  p.b[0] = kappa * theta;
  p.beta[0][0] = -kappa;
  return make(1, 0, std::move(p));
}

AffineParams vasicek(double kappa, double theta, double sigma) {
  auto p = zero_params(1);
  p.a(0, 0) = sigma * sigma;
  p.b[0] = kappa * theta;
  p.beta[0][0] = -kappa;
  return make(0, 1, std::move(p));
}

AffineParams black_scholes(double sigma, double r) {
  auto p = zero_params(1);
  p.a(0, 0) = sigma * sigma;
  p.b[0] = r - 0.5 * sigma * sigma;
  return make(0, 1, std::move(p));
}

AffineParams heston(double kappa, double theta, double sigma, double rho, double r) {
  auto p = zero_params(2);
  p.alpha[0] << sigma * sigma, rho * sigma, rho * sigma, 1.0;
  p.b << kappa * theta, r;
  p.beta[0] << -kappa, -0.5;
  return make(1, 1, std::move(p));
}

AffineParams bates(double kappa, double theta, double sigma, double rho, double r, double intensity, double jump_mean,
                   double jump_std) {
  AffineParams out = heston(kappa, theta, sigma, rho, r);
  auto& p = out.canonical();
  p.m = JumpMeasure::gaussian(1, jump_mean, jump_std, intensity);
  p.b[1] = r - jump_exponent_at_unit(p.m, 2, 1);
  return out;
}

AffineParams merton(double sigma, double r, double intensity, double jump_mean, double jump_std) {
  auto p = zero_params(1);
  p.a(0, 0) = sigma * sigma;
  p.m = JumpMeasure::gaussian(0, jump_mean, jump_std, intensity);
  p.b[0] = r - 0.5 * sigma * sigma - jump_exponent_at_unit(p.m, 1, 0);
  return make(0, 1, std::move(p));
}

AffineParams pure_jump(double kappa, double c0, double c1, double jump_rate) {
  auto p = zero_params(1);
  p.m = JumpMeasure::one_sided_exponential(0, jump_rate, c0);
  p.mu[0] = JumpMeasure::one_sided_exponential(0, jump_rate, c1);
  // Drift equal to the compensator of the small jumps: finite variation, no extra drift.
  p.b[0] = p.m.truncated_mean(0);
  p.beta[0][0] = -kappa + p.mu[0].truncated_mean(0);
  return make(1, 0, std::move(p));
}

AffineParams two_factor_jump() {
  auto p = zero_params(3);
  p.a(2, 2) = 0.04;
  p.alpha[0] << 0.09, 0.0, 0.03, 0.0, 0.0, 0.0, 0.03, 0.0, 0.25;
  p.alpha[1] << 0.0, 0.0, 0.0, 0.0, 0.16, -0.02, 0.0, -0.02, 0.09;
  p.b << 0.3, 0.2, 0.01;
  p.beta[0] << -1.0, 0.2, 0.1;
  p.beta[1] << 0.3, -0.8, -0.2;
  p.beta[2] << 0.0, 0.0, -0.5;
  Vec up(3), side(3), big(3);
  up << 0.3, 0.0, 0.0;
  side << 0.0, 0.4, -0.2;
  big << 0.5, 0.8, 0.6;
  p.m = JumpMeasure::point_masses({{up, 0.5}, {big, 0.1}});
  p.mu[0] = JumpMeasure::point_masses({{side, 0.7}, {big, 0.2}});
  p.mu[1] = JumpMeasure::point_masses({{up, 0.4}});
  // Cross-drift stays at least the truncated jump mean in the other I-coordinate.
  p.beta[0][1] += p.mu[0].truncated_mean(1);
  p.beta[1][0] += p.mu[1].truncated_mean(0);
  p.b[0] += p.m.truncated_mean(0);
  p.b[1] += p.m.truncated_mean(1);
  return make(2, 1, std::move(p));
}

AffineParams wishart(int d, double b_scale, double mean_reversion) {
  MatrixParams p;
  p.alpha = Mat::Identity(d, d);
  p.b = b_scale * Mat::Identity(d, d);
  p.B = linear_drift_from(-mean_reversion * Mat::Identity(d, d));
  p.m = JumpMeasure::zero();
  AffineParams out;
  out.space = StateSpace::matrix_cone(d);
  out.coefficients = std::move(p);
  return out;
}

}  // namespace affine::models
