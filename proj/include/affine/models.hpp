#pragma once

// Built-in parameter sets. Canonical coordinates list I (non-negative) before
// J (real), so stochastic-volatility models use X = (v, log S).

#include "affine/state_space.hpp"

namespace affine::models {

/// dX = kappa (theta - X) dt + sigma sqrt(X) dW on R_{>=0}.
AffineParams cir(double kappa, double theta, double sigma);

/// dX = kappa (theta - X) dt + sigma dW on R.
AffineParams vasicek(double kappa, double theta, double sigma);

/// X = log S under the risk-neutral measure with rate r.
AffineParams black_scholes(double sigma, double r = 0.0);

/// Heston in X = (v, log S): dv = kappa (theta - v) dt + sigma sqrt(v) dW1,
/// dlog S = (r - v/2) dt + sqrt(v) dW2, d<W1, W2> = rho dt.
AffineParams heston(double kappa, double theta, double sigma, double rho, double r = 0.0);

/// Heston with Gaussian jumps N(jump_mean, jump_std^2) in log S at rate
/// `intensity`; the drift keeps exp(log S - r t) a martingale.
AffineParams bates(double kappa, double theta, double sigma, double rho, double r, double intensity, double jump_mean,
                   double jump_std);

/// Levy process on R: Brownian part plus Gaussian jumps, martingale drift for exp(X - r t).
AffineParams merton(double sigma, double r, double intensity, double jump_mean, double jump_std);

/// Pure-jump process on R_{>=0}: exponential jumps with rate `jump_rate` at
/// constant intensity c0 and state-proportional intensity c1 x, mean reversion kappa.
AffineParams pure_jump(double kappa, double c0, double c1, double jump_rate);

/// Two square-root factors and one Gaussian factor with cross-feedback and point-mass jumps.
AffineParams two_factor_jump();

/// Wishart on S_d^+ with alpha = I, b = b_scale I and linear drift x -> M x + x M^T, M = -mean_reversion I.
AffineParams wishart(int d = 2, double b_scale = 3.0, double mean_reversion = 0.5);

}  // namespace affine::models
