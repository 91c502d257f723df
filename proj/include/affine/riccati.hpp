#pragma once

#include "affine/core.hpp"
#include "affine/detail/dopri5.hpp"
#include "affine/levy_functionals.hpp"

#include <string>
#include <variant>
#include <vector>

namespace affine {

struct SolveOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = kInf;
  double blowup_norm_threshold = 1e8;
  /// Step collapse threshold as a fraction of the horizon.
  double min_step_factor = 1e-12;
  bool dense_output = true;

  void check() const;
};

/// Sufficient clause under which the computed solution is the minimal one.
enum class Certificate { Diffusion, FullDomain, OpenDomain, InteriorPath, Unknown };
const char* to_string(Certificate c);

struct Completed {};
/// ||q|| passed the threshold while the step size collapsed. t_star is the
/// zero of 1/||q|| extrapolated from the last accepted steps; the true time
/// lies in [t_star - bracket/2, t_star + bracket/2].
struct BlowUp {
  double t_star;
  double bracket;
};
/// q reached the closed part of the boundary of the effective domain.
struct BoundaryContact {
  double t;
  std::string boundary;
};
/// The solution left the open domain: for the real system, q ran into a
/// boundary that does not belong to the domain; for the complex system, Re psi
/// left its interior.
struct DomainExit {
  double t;
  std::string boundary;
};
using SolveStatus = std::variant<Completed, BlowUp, BoundaryContact, DomainExit>;
std::string describe(const SolveStatus& s);

/// Samples of (p, q) or (phi, psi) with the dense interpolant of each step.
template <class S>
struct Trajectory {
  using VecS = detail::VecT<S>;

  std::vector<double> times;
  std::vector<S> p;
  std::vector<VecS> q;
  SolveStatus status = Completed{};
  Certificate certificate = Certificate::Unknown;
  /// Sum of local error estimates of the accepted steps.
  double error_estimate = 0.0;
  double horizon = 0.0;
  std::vector<detail::DenseStep<S>> steps;

  bool completed() const { return std::holds_alternative<Completed>(status); }
  double t_end() const { return times.empty() ? 0.0 : times.back(); }
  S p_end() const { return p.back(); }
  const VecS& q_end() const { return q.back(); }
  /// Dense output at t in [0, t_end]. Exact at grid points.
  S p_at(double t) const { return state_at(t)[0]; }
  VecS q_at(double t) const {
    const VecS z = state_at(t);
    return z.tail(z.size() - 1);
  }
  VecS state_at(double t) const;
};

using RiccatiTrajectory = Trajectory<double>;
using ComplexTrajectory = Trajectory<Complex>;

/// Extended real system p' = F(q), q' = R(q), p(0) = 0, q(0) = y.
/// Throws DomainError when y lies outside the effective domain.
RiccatiTrajectory solve_extended(const FunctionalFamily& family, const Vec& y, double T, const SolveOptions& opts = {});

/// Complex system phi' = F(psi), psi' = R(psi) with Re psi kept interior.
/// Throws DomainError when Re u is not interior.
ComplexTrajectory solve_complex(const FunctionalFamily& family, const CVec& u, double T, const SolveOptions& opts = {});

/// Fixed-step RK4 on the real system; the reference route for oracle checks.
/// Returns false when the field fails before T.
bool solve_fixed_step(const FunctionalFamily& family, const Vec& y, double T, long n_steps, double& p, Vec& q);

/// Whether the real trajectory stays in the interior of the domain, checked at
/// every grid point and `nodes_per_step` interpolation nodes inside each step.
bool interior_path(const FunctionalFamily& family, const RiccatiTrajectory& traj, int nodes_per_step = 8);

struct FiniteTime {
  double t_plus;
  double tolerance;
};
struct ExceedsHorizon {
  double t_max;
};
struct IndeterminateTime {
  std::string reason;
};
using ExplosionVerdict = std::variant<FiniteTime, ExceedsHorizon, IndeterminateTime>;

/// Maximal lifetime of the real solution started at y, searched up to t_max.
ExplosionVerdict explosion_time(const FunctionalFamily& family, const Vec& y, double t_max, double tol,
                                const SolveOptions& opts = {});

/// Largest violation of the semiflow identities at the given split points of a
/// completed trajectory.
double verify_semiflow(const FunctionalFamily& family, const RiccatiTrajectory& traj, const std::vector<double>& splits,
                       const SolveOptions& opts = {});

/// min over t in [0, T], i in I of q_i(t, Re u) - Re psi_i(t, u). Canonical families only.
double comparison_check(const FunctionalFamily& family, const CVec& u, double T, const SolveOptions& opts = {});

}  // namespace affine
