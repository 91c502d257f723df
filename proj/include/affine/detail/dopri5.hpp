#pragma once

// Dormand-Prince 5(4) with the continuous extension of Hairer's DOPRI5,
// templated on the scalar type so the real and complex Riccati systems share
// one implementation.

#include "affine/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace affine::detail {

template <class S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
double max_abs(const VecT<S>& v) {
  double m = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) m = std::max(m, std::abs(v[k]));
  return m;
}

/// One accepted step: [t0, t0 + h] with the five continuous-output rows.
template <class S>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  Eigen::Matrix<S, Eigen::Dynamic, 5> rcont;

  VecT<S> at(double t) const {
    const double th = h == 0.0 ? 0.0 : std::clamp((t - t0) / h, 0.0, 1.0);
    const double th1 = 1.0 - th;
    return rcont.col(0) +
           th * (rcont.col(1) + th1 * (rcont.col(2) + th * (rcont.col(3) + th1 * rcont.col(4))));
  }
};

enum class StopReason { Completed, StepCollapse, Stopped, MaxSteps };

template <class S>
struct IntegrationResult {
  StopReason reason = StopReason::Completed;
  std::vector<double> times;
  std::vector<VecT<S>> states;
  std::vector<DenseStep<S>> steps;
  /// Sum of accepted local error estimates (max norm).
  double error_estimate = 0.0;
  /// Whether an attempt since the last accepted step failed because the field
  /// could not be evaluated there.
  bool last_failure_was_domain = false;
  double t_end = 0.0;
};

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = kInf;
  double min_step = 0.0;
  long max_steps = 2'000'000;
};

/// field(z, dz) returns false when z is outside the domain of the vector field.
/// stop(t, z) is consulted after each accepted step; returning true ends the run.
template <class S>
IntegrationResult<S> dopri5(const std::function<bool(const VecT<S>&, VecT<S>&)>& field, const VecT<S>& z0,
                            double T, const IntegratorOptions& opt,
                            const std::function<bool(double, const VecT<S>&)>& stop = {}) {
  using V = VecT<S>;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                   d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                   d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
  (void)c2, (void)c3, (void)c4, (void)c5;

  IntegrationResult<S> res;
  const auto n = z0.size();
  V z = z0;
  double t = 0.0;
  res.times.push_back(0.0);
  res.states.push_back(z);
  res.t_end = 0.0;
  if (T <= 0.0) return res;

  V k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ztmp(n), znew(n), err(n);
  if (!field(z, k1)) {
    res.reason = StopReason::StepCollapse;
    res.last_failure_was_domain = true;
    return res;
  }

  auto scaled_norm = [&](const V& e, const V& a, const V& b) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(a[k]), std::abs(b[k]));
      const double r = std::abs(e[k]) / sc;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(n, 1)));
  };

  // Initial step from the local Lipschitz estimate.
  double h;
  {
    const double dz0 = scaled_norm(z, z, z);
    const double df0 = scaled_norm(k1, z, z);
    double h0 = (dz0 < 1e-5 || df0 < 1e-5) ? 1e-6 : 0.01 * dz0 / df0;
    h0 = std::min(h0, T);
    V f1(n);
    bool ok = false;
    for (int tries = 0; tries < 40 && !ok; ++tries) {
      ztmp = z + S(h0) * k1;
      ok = field(ztmp, f1);
      if (!ok) h0 *= 0.1;
    }
    double h1 = h0;
    if (ok) {
      const double d2 = scaled_norm(V(f1 - k1), z, z) / h0;
      const double dmax = std::max(df0, d2);
      h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
    }
    h = std::min({100.0 * h0, h1, T, opt.max_step});
  }

  long attempts = 0;
  while (t < T) {
    if (++attempts > opt.max_steps) {
      res.reason = StopReason::MaxSteps;
      break;
    }
    if (h < opt.min_step) {
      res.reason = StopReason::StepCollapse;
      break;
    }
    double hs = std::min(h, opt.max_step);
    bool last = false;
    if (t + hs >= T || T - (t + hs) < 1e-14 * std::max(1.0, T)) {
      hs = T - t;
      last = true;
    }
    const S H(hs);

    bool ok = true;
    ztmp = z + H * (a21 * k1);
    ok = ok && field(ztmp, k2);
    if (ok) {
      ztmp = z + H * (a31 * k1 + a32 * k2);
      ok = field(ztmp, k3);
    }
    if (ok) {
      ztmp = z + H * (a41 * k1 + a42 * k2 + a43 * k3);
      ok = field(ztmp, k4);
    }
    if (ok) {
      ztmp = z + H * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      ok = field(ztmp, k5);
    }
    if (ok) {
      ztmp = z + H * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      ok = field(ztmp, k6);
    }
    if (ok) {
      znew = z + H * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      ok = znew.allFinite() && field(znew, k7);
    }
    if (!ok) {
      res.last_failure_was_domain = true;
      h = 0.25 * hs;
      continue;
    }

    err = H * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = scaled_norm(err, z, znew);
    if (!std::isfinite(en) || en > 1.0) {
      const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
      h = hs * fac;
      continue;
    }

    DenseStep<S> ds;
    ds.t0 = t;
    ds.h = hs;
    ds.rcont.resize(n, 5);
    const V ydiff = znew - z;
    const V bspl = H * k1 - ydiff;
    ds.rcont.col(0) = z;
    ds.rcont.col(1) = ydiff;
    ds.rcont.col(2) = bspl;
    ds.rcont.col(3) = ydiff - H * k7 - bspl;
    ds.rcont.col(4) = H * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    res.steps.push_back(std::move(ds));

    res.error_estimate += max_abs<S>(err);
    t = last ? T : t + hs;
    z = znew;
    k1 = k7;
    res.times.push_back(t);
    res.states.push_back(z);
    res.t_end = t;
    res.last_failure_was_domain = false;

    if (stop && stop(t, z)) {
      res.reason = StopReason::Stopped;
      return res;
    }
    const double fac = std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-10), -0.2)));
    h = hs * fac;
    if (last) break;
  }
  return res;
}

/// Classical fixed-step RK4; false when the field fails before reaching T.
template <class S>
bool rk4_fixed(const std::function<bool(const VecT<S>&, VecT<S>&)>& field, VecT<S>& z, double T, long n_steps,
               double& t_reached) {
  const double h = T / static_cast<double>(n_steps);
  const S H(h);
  VecT<S> k1, k2, k3, k4;
  t_reached = 0.0;
  for (long s = 0; s < n_steps; ++s) {
    if (!field(z, k1) || !field(VecT<S>(z + (0.5 * H) * k1), k2) || !field(VecT<S>(z + (0.5 * H) * k2), k3) ||
        !field(VecT<S>(z + H * k3), k4)) {
      return false;
    }
    z += (H / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t_reached = (s + 1) * h;
  }
  return true;
}

}  // namespace affine::detail
