#pragma once

#include "affine/riccati.hpp"

#include <string>
#include <utility>
#include <variant>

namespace affine {

struct FiniteMoment {
  double value;
  double p;
  Vec q;
};
struct InfiniteMoment {
  double t_plus;
};
struct IndeterminateMoment {
  std::string reason;
};

/// E^x[exp(<y, X_T>)] as a verdict. Finite only with a minimality certificate.
struct MomentResult {
  std::variant<FiniteMoment, InfiniteMoment, IndeterminateMoment> verdict;
  Certificate certificate = Certificate::Unknown;
  SolveStatus status = Completed{};

  bool finite() const { return std::holds_alternative<FiniteMoment>(verdict); }
  double value() const { return std::get<FiniteMoment>(verdict).value; }
};

/// Throws DomainError when x is not in the state space.
MomentResult exp_moment(const FunctionalFamily& family, const Vec& x, const Vec& y, double T,
                        const SolveOptions& opts = {});
MomentResult exp_moment(const AffineParams& params, const Vec& x, const Vec& y, double T, const SolveOptions& opts = {});

/// (p(T - t, y), q(T - t, y)): E^x[e^{<y, X_T>} | F_t] = exp(p + <q, X_t>).
/// Throws UnsupportedError unless the moment at horizon T is finite.
std::pair<double, Vec> conditional_exponent(const FunctionalFamily& family, const Vec& y, double T, double t,
                                            const SolveOptions& opts = {});

struct CFValue {
  Complex value;
  Complex phi;
  CVec psi;
  /// exp_moment(Re u) - |value|; non-negative up to rounding.
  double modulus_slack;
};
struct CFUnsupported {
  /// "assumption", "domain" or "interior_path".
  std::string clause;
  std::string reason;
};
using CFResult = std::variant<CFValue, CFUnsupported>;

/// E^x[exp(<u, X_T>)] for complex u. Verifies |value| <= E^x[exp(<Re u, X_T>)]
/// and throws NumericError if that bound fails by more than 1e-10 relative.
CFResult char_function(const FunctionalFamily& family, const Vec& x, const CVec& u, double T,
                       const SolveOptions& opts = {});
CFResult char_function(const AffineParams& params, const Vec& x, const CVec& u, double T,
                       const SolveOptions& opts = {});

}  // namespace affine
