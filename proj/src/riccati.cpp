#include "affine/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace affine {

namespace {

constexpr double kBoundaryTol = 1e-9;

template <class S>
using VecS = detail::VecT<S>;

// Nearest half-space constraint to y, or nullptr.
const HalfSpace* nearest_half_space(const DomainY& dom, const Vec& y) {
  const HalfSpace* best = nullptr;
  double dist = kInf;
  for (const auto& h : dom.constraints()) {
    const double n = h.normal.norm();
    if (n == 0.0) continue;
    const double d = (h.offset - h.normal.dot(y)) / n;
    if (d < dist) {
      dist = d;
      best = &h;
    }
  }
  return best;
}

// Status for a real path that stopped at the boundary of the domain.
SolveStatus boundary_status(const DomainY& dom, const Vec& q, double t) {
  if (const HalfSpace* h = nearest_half_space(dom, q)) {
    const std::string label = h->label.empty() ? "half-space" : h->label;
    if (h->strict) return DomainExit{t, label};
    return BoundaryContact{t, label};
  }
  return BoundaryContact{t, dom.describe()};
}

template <class S>
Trajectory<S> to_trajectory(detail::IntegrationResult<S>&& r, double T, bool dense) {
  Trajectory<S> tr;
  tr.horizon = T;
  tr.times = std::move(r.times);
  tr.error_estimate = r.error_estimate;
  tr.p.reserve(r.states.size());
  tr.q.reserve(r.states.size());
  for (const auto& z : r.states) {
    tr.p.push_back(z[0]);
    tr.q.push_back(z.tail(z.size() - 1));
  }
  if (dense) tr.steps = std::move(r.steps);
  return tr;
}

// Zero of 1/||q|| extrapolated linearly through the last two accepted samples.
BlowUp extrapolate_blowup(const std::vector<double>& times, const std::vector<double>& norms) {
  const std::size_t k = times.size();
  const double t2 = times[k - 1];
  if (k < 2) return {t2, 0.0};
  const double t1 = times[k - 2];
  const double w1 = 1.0 / norms[k - 2];
  const double w2 = 1.0 / norms[k - 1];
  if (!(w1 > w2) || !(w2 >= 0.0)) return {t2, 2.0 * (t2 - t1)};
  const double t_star = t2 + w2 * (t2 - t1) / (w1 - w2);
  return {t_star, 2.0 * (t_star - t2)};
}

// Blow-up whose rate is set by exponential jump terms: ||q|| stays moderate
// while the field explodes, so the step collapses below the norm threshold.
// Detected by the local time scale ||q|| / ||R(q)|| shrinking far below T.
// t_star is bracketed by the 1/||q|| and 1/||R|| secants and the span of the
// last accepted steps.
std::optional<BlowUp> fast_blowup(const FunctionalFamily& family, const std::vector<double>& times,
                                  const std::vector<Vec>& qs, double T) {
  const std::size_t k = times.size();
  if (k < 6) return std::nullopt;
  double f;
  Vec r;
  std::vector<double> field_norms;
  for (std::size_t j = k - 2; j < k; ++j) {
    if (!family.eval(qs[j], f, r) || !r.allFinite()) return BlowUp{times.back(), 2.0 * (times.back() - times[k - 6])};
    field_norms.push_back(r.norm());
  }
  const double scale = std::max(1.0, qs.back().norm()) / field_norms.back();
  if (!(scale < 1e-6 * T) || !(field_norms[1] > field_norms[0])) return std::nullopt;
  const double t_end = times.back();
  double t_hi = t_end + (t_end - times[k - 6]);
  const std::vector<double> tail_times{times[k - 2], times[k - 1]};
  t_hi = std::max(t_hi, extrapolate_blowup(tail_times, {qs[k - 2].norm(), qs[k - 1].norm()}).t_star);
  t_hi = std::max(t_hi, extrapolate_blowup(tail_times, field_norms).t_star);
  return BlowUp{0.5 * (t_end + t_hi), t_hi - t_end};
}

// Step collapse this close to a half-space means the field is singular there.
bool near_boundary(const DomainY& dom, const Vec& q) {
  const HalfSpace* h = nearest_half_space(dom, q);
  if (h == nullptr) return false;
  return dom.distance_to_boundary(q) < 1e-3 * std::max(1.0, std::abs(h->offset));
}

// Square-root approach to the boundary: extrapolate dist^2 linearly to zero.
double boundary_hit_time(const DomainY& dom, const std::vector<double>& times, const std::vector<Vec>& qs) {
  const std::size_t k = times.size();
  if (k < 2) return times.back();
  const double d1 = dom.distance_to_boundary(qs[k - 2]);
  const double d2 = dom.distance_to_boundary(qs[k - 1]);
  if (!std::isfinite(d1) || !std::isfinite(d2) || !(d1 > d2) || d2 < 0.0) return times[k - 1];
  const double t1 = times[k - 2], t2 = times[k - 1];
  return t2 + d2 * d2 * (t2 - t1) / (d1 * d1 - d2 * d2);
}

Certificate certify(const FunctionalFamily& family, bool interior) {
  if (!family.is_raw() && family.is_diffusion()) return Certificate::Diffusion;
  if (family.domain().is_full_space()) return Certificate::FullDomain;
  if (family.domain().is_open()) return Certificate::OpenDomain;
  return interior ? Certificate::InteriorPath : Certificate::Unknown;
}

detail::IntegratorOptions integrator_options(const SolveOptions& opts, double T) {
  detail::IntegratorOptions io;
  io.rel_tol = opts.rel_tol;
  io.abs_tol = opts.abs_tol;
  io.max_step = opts.max_step;
  io.min_step = opts.min_step_factor * std::max(T, 1e-300);
  return io;
}

}  // namespace

void SolveOptions::check() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("solver tolerances must be positive");
  if (!(blowup_norm_threshold > 1.0)) throw std::invalid_argument("blow-up threshold must exceed 1");
  if (!(min_step_factor > 0.0) || !(max_step > 0.0)) throw std::invalid_argument("step bounds must be positive");
}

const char* to_string(Certificate c) {
  switch (c) {
    case Certificate::Diffusion: return "diffusion";
    case Certificate::FullDomain: return "full_domain";
    case Certificate::OpenDomain: return "open_domain";
    case Certificate::InteriorPath: return "interior_path";
    case Certificate::Unknown: return "unknown";
  }
  return "?";
}

std::string describe(const SolveStatus& s) {
  std::ostringstream os;
  os.precision(17);
  if (std::holds_alternative<Completed>(s)) {
    os << "completed";
  } else if (const auto* b = std::get_if<BlowUp>(&s)) {
    os << "blow-up at t* = " << b->t_star << " (bracket " << b->bracket << ")";
  } else if (const auto* c = std::get_if<BoundaryContact>(&s)) {
    os << "boundary contact at t = " << c->t << " (" << c->boundary << ")";
  } else if (const auto* e = std::get_if<DomainExit>(&s)) {
    os << "domain exit at t = " << e->t << " (" << e->boundary << ")";
  }
  return os.str();
}

template <class S>
typename Trajectory<S>::VecS Trajectory<S>::state_at(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it != times.end() && *it == t) {
    const auto k = static_cast<std::size_t>(it - times.begin());
    VecS z(q[k].size() + 1);
    z[0] = p[k];
    z.tail(q[k].size()) = q[k];
    return z;
  }
  if (t < 0.0 || t > t_end()) throw std::out_of_range("time outside the computed trajectory");
  if (steps.empty()) throw std::logic_error("trajectory was computed without dense output");
  auto st = std::upper_bound(steps.begin(), steps.end(), t,
                             [](double v, const detail::DenseStep<S>& s) { return v < s.t0; });
  if (st != steps.begin()) --st;
  return st->at(t);
}

template struct Trajectory<double>;
template struct Trajectory<Complex>;

RiccatiTrajectory solve_extended(const FunctionalFamily& family, const Vec& y, double T, const SolveOptions& opts) {
  opts.check();
  const int d = family.dim();
  if (y.size() != d) throw StructuralError("initial value has dimension " + std::to_string(y.size()) + ", expected " +
                                           std::to_string(d));
  if (!(T >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
  const DomainY& dom = family.domain();
  if (dom.classify(y) == DomainClass::Outside) {
    throw DomainError("initial value lies outside the effective domain (" + dom.describe() + "), nearest constraint: " +
                      dom.nearest_constraint(y));
  }

  double f;
  Vec r(d);
  std::function<bool(const Vec&, Vec&)> field = [&](const Vec& z, Vec& dz) {
    if (!family.eval(Vec(z.tail(d)), f, r)) return false;
    dz.resize(d + 1);
    dz[0] = f;
    dz.tail(d) = r;
    return true;
  };

  std::optional<SolveStatus> stopped;
  std::function<bool(double, const Vec&)> stop = [&](double t, const Vec& z) {
    const Vec q = z.tail(d);
    const double dist = dom.distance_to_boundary(q);
    if (std::isnan(dist)) {
      if (dom.classify(q) != DomainClass::Interior) {
        stopped = BoundaryContact{t, dom.describe()};
        return true;
      }
      return false;
    }
    if (dist < kBoundaryTol) {
      stopped = boundary_status(dom, q, t);
      return true;
    }
    return false;
  };

  Vec z0(d + 1);
  z0[0] = 0.0;
  z0.tail(d) = y;

  RiccatiTrajectory tr;
  if (stop(0.0, z0)) {
    tr.horizon = T;
    tr.times = {0.0};
    tr.p = {0.0};
    tr.q = {y};
    tr.status = *stopped;
    tr.certificate = Certificate::Unknown;
    return tr;
  }

  auto res = detail::dopri5<double>(field, z0, T, integrator_options(opts, T), stop);
  const auto reason = res.reason;
  const bool domain_failure = res.last_failure_was_domain;
  tr = to_trajectory(std::move(res), T, true);

  switch (reason) {
    case detail::StopReason::Completed: tr.status = Completed{}; break;
    case detail::StopReason::Stopped: tr.status = *stopped; break;
    case detail::StopReason::MaxSteps:
      throw NumericError("step budget exhausted at t = " + std::to_string(tr.t_end()), tr.t_end());
    case detail::StopReason::StepCollapse: {
      const Vec& q = tr.q_end();
      if (q.norm() > opts.blowup_norm_threshold) {
        std::vector<double> norms;
        norms.reserve(tr.q.size());
        for (const auto& v : tr.q) norms.push_back(v.norm());
        tr.status = extrapolate_blowup(tr.times, norms);
      } else if (domain_failure || near_boundary(dom, q)) {
        tr.status = boundary_status(dom, q, boundary_hit_time(dom, tr.times, tr.q));
      } else if (const auto fast = fast_blowup(family, tr.times, tr.q, T)) {
        tr.status = *fast;
      } else {
        throw NumericError("step size collapsed at t = " + std::to_string(tr.t_end()) + " without blow-up", tr.t_end());
      }
      break;
    }
  }

  if (std::holds_alternative<BoundaryContact>(tr.status)) {
    tr.certificate = Certificate::Unknown;
  } else {
    // Callback domains only expose membership, so an interior path cannot be certified.
    const Certificate c = certify(family, false);
    const bool checkable = family.domain().kind() != DomainY::Kind::Callback;
    tr.certificate =
        c != Certificate::Unknown || !checkable ? c : (interior_path(family, tr) ? Certificate::InteriorPath : c);
  }
  if (!opts.dense_output) tr.steps.clear();
  return tr;
}

ComplexTrajectory solve_complex(const FunctionalFamily& family, const CVec& u, double T, const SolveOptions& opts) {
  opts.check();
  const int d = family.dim();
  if (u.size() != d) throw StructuralError("initial value has dimension " + std::to_string(u.size()) + ", expected " +
                                           std::to_string(d));
  if (!(T >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
  const DomainY& dom = family.domain();
  const Vec re = real_part(u);
  if (dom.classify(re) != DomainClass::Interior) {
    throw DomainError("Re u is not interior to the effective domain (" + dom.describe() + "), nearest constraint: " +
                      dom.nearest_constraint(re));
  }

  Complex f;
  CVec r(d);
  std::function<bool(const CVec&, CVec&)> field = [&](const CVec& z, CVec& dz) {
    if (!family.eval(CVec(z.tail(d)), f, r)) return false;
    dz.resize(d + 1);
    dz[0] = f;
    dz.tail(d) = r;
    return true;
  };

  std::optional<SolveStatus> stopped;
  std::function<bool(double, const CVec&)> stop = [&](double t, const CVec& z) {
    const Vec q = z.tail(d).real();
    const double dist = dom.distance_to_boundary(q);
    const bool outside = std::isnan(dist) ? dom.classify(q) != DomainClass::Interior : dist < kBoundaryTol;
    if (outside) {
      stopped = DomainExit{t, dom.nearest_constraint(q)};
      return true;
    }
    return false;
  };

  CVec z0(d + 1);
  z0[0] = 0.0;
  z0.tail(d) = u;

  auto res = detail::dopri5<Complex>(field, z0, T, integrator_options(opts, T), stop);
  const auto reason = res.reason;
  ComplexTrajectory tr = to_trajectory(std::move(res), T, true);

  switch (reason) {
    case detail::StopReason::Completed: tr.status = Completed{}; break;
    case detail::StopReason::Stopped: tr.status = *stopped; break;
    case detail::StopReason::MaxSteps:
      throw NumericError("step budget exhausted at t = " + std::to_string(tr.t_end()), tr.t_end());
    case detail::StopReason::StepCollapse: {
      const CVec& q = tr.q_end();
      if (q.norm() > opts.blowup_norm_threshold) {
        std::vector<double> norms;
        norms.reserve(tr.q.size());
        for (const auto& v : tr.q) norms.push_back(v.norm());
        tr.status = extrapolate_blowup(tr.times, norms);
      } else {
        tr.status = DomainExit{tr.t_end(), dom.nearest_constraint(q.real())};
      }
      break;
    }
  }
  // Re psi is held inside the open interior by construction.
  const Certificate c = certify(family, true);
  tr.certificate = tr.completed() ? c : (c == Certificate::InteriorPath ? Certificate::Unknown : c);
  if (!opts.dense_output) tr.steps.clear();
  return tr;
}

bool solve_fixed_step(const FunctionalFamily& family, const Vec& y, double T, long n_steps, double& p, Vec& q) {
  const int d = family.dim();
  double f;
  Vec r(d);
  std::function<bool(const Vec&, Vec&)> field = [&](const Vec& z, Vec& dz) {
    if (!family.eval(Vec(z.tail(d)), f, r)) return false;
    dz.resize(d + 1);
    dz[0] = f;
    dz.tail(d) = r;
    return true;
  };
  Vec z(d + 1);
  z[0] = 0.0;
  z.tail(d) = y;
  double reached = 0.0;
  const bool ok = detail::rk4_fixed<double>(field, z, T, n_steps, reached);
  p = z[0];
  q = z.tail(d);
  return ok;
}

bool interior_path(const FunctionalFamily& family, const RiccatiTrajectory& traj, int nodes_per_step) {
  const DomainY& dom = family.domain();
  for (const auto& q : traj.q) {
    if (dom.classify(q) != DomainClass::Interior) return false;
  }
  const int d = family.dim();
  for (const auto& st : traj.steps) {
    for (int j = 1; j <= nodes_per_step; ++j) {
      const double t = st.t0 + st.h * j / (nodes_per_step + 1.0);
      const Vec z = st.at(t);
      if (dom.classify(Vec(z.tail(d))) != DomainClass::Interior) return false;
    }
  }
  return true;
}

ExplosionVerdict explosion_time(const FunctionalFamily& family, const Vec& y, double t_max, double tol,
                                const SolveOptions& opts) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  switch (family.domain().classify(y)) {
    case DomainClass::Outside: return FiniteTime{0.0, 0.0};
    case DomainClass::Boundary:
      return IndeterminateTime{"initial value on the boundary of the effective domain; minimality cannot be certified"};
    case DomainClass::Interior: break;
  }

  const RiccatiTrajectory tr = solve_extended(family, y, t_max, opts);
  if (tr.completed()) return ExceedsHorizon{t_max};
  if (const auto* c = std::get_if<BoundaryContact>(&tr.status)) {
    return IndeterminateTime{"solution touches the closed boundary (" + c->boundary + ") at t = " + std::to_string(c->t)};
  }

  double lo = tr.t_end();
  double hi;
  if (const auto* b = std::get_if<BlowUp>(&tr.status)) {
    if (b->bracket <= tol) return FiniteTime{b->t_star, 0.5 * b->bracket};
    hi = std::max(b->t_star + 0.5 * b->bracket, lo);
  } else {
    // Exit through an open boundary at the extrapolated hitting time.
    const double t_exit = std::get<DomainExit>(tr.status).t;
    const double width = std::max(t_exit - lo, 0.0);
    if (width <= tol) return FiniteTime{t_exit, width};
    hi = t_exit + width;
  }

  // Bisection on "the solve to horizon t completes".
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const RiccatiTrajectory trial = solve_extended(family, y, mid, opts);
    if (trial.completed()) {
      lo = mid;
    } else if (const auto* b = std::get_if<BlowUp>(&trial.status); b != nullptr && b->bracket <= tol) {
      return FiniteTime{b->t_star, 0.5 * b->bracket};
    } else {
      hi = mid;
    }
  }
  return FiniteTime{0.5 * (lo + hi), 0.5 * (hi - lo)};
}

double verify_semiflow(const FunctionalFamily& family, const RiccatiTrajectory& traj, const std::vector<double>& splits,
                       const SolveOptions& opts) {
  if (!traj.completed()) throw UnsupportedError("semiflow check needs a completed trajectory");
  const double T = traj.t_end();
  const Vec& y = traj.q.front();
  double worst = 0.0;
  for (double t : splits) {
    t = std::clamp(t, 0.0, T);
    const RiccatiTrajectory first = solve_extended(family, y, T - t, opts);
    if (!first.completed()) return kInf;
    const RiccatiTrajectory second = solve_extended(family, first.q_end(), t, opts);
    if (!second.completed()) return kInf;
    const double rp = std::abs(traj.p_end() - first.p_end() - second.p_end());
    const double rq = (traj.q_end() - second.q_end()).cwiseAbs().maxCoeff();
    worst = std::max({worst, rp, rq});
  }
  return worst;
}

double comparison_check(const FunctionalFamily& family, const CVec& u, double T, const SolveOptions& opts) {
  const AffineParams* src = family.source();
  if (src == nullptr || !src->space.is_canonical()) {
    throw UnsupportedError("comparison check is defined on canonical state spaces");
  }
  const int m = src->space.canonical_space().m;
  const RiccatiTrajectory real = solve_extended(family, real_part(u), T, opts);
  if (!real.completed()) throw DomainError("real solution from Re u does not reach T: " + describe(real.status));
  const ComplexTrajectory cplx = solve_complex(family, u, T, opts);
  if (!cplx.completed()) return -kInf;
  if (m == 0) return kInf;

  std::vector<double> grid = real.times;
  grid.insert(grid.end(), cplx.times.begin(), cplx.times.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double margin = kInf;
  for (double t : grid) {
    const Vec q = real.q_at(t);
    const CVec psi = cplx.q_at(t);
    for (int i = 0; i < m; ++i) margin = std::min(margin, q[i] - psi[i].real());
  }
  return margin;
}

}  // namespace affine
