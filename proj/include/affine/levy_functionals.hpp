#pragma once

#include "affine/core.hpp"
#include "affine/domain.hpp"
#include "affine/jump_measure.hpp"
#include "affine/state_space.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace affine {

/// f(y) = <y, quadratic y>/2 + <linear, y> + int (e^{<xi,y>} - 1 - <h(xi), y>) measure(dxi).
/// The bilinear form is not conjugated, so the complex version is the
/// analytic extension of the real one.
struct LKFunctional {
  Mat quadratic;
  Vec linear;
  JumpMeasure measure;
  Truncation truncation = Truncation::Unit;
};

/// +inf when y leaves the tail domain of the measure.
double eval_real(const LKFunctional& f, const Vec& y);

/// Throws DomainError when Re u is not interior to the tail domain.
Complex eval_complex(const LKFunctional& f, const CVec& u);

/// F and R = (R_1, ..., R_d) of an affine process, plus the effective domain.
///
/// Constant offsets shift F and R by scalars (F + cF, R + cR); they carry the
/// discounted system F + l q, R + lambda q at fixed q. A raw family wraps
/// user-supplied callbacks for state spaces outside the built-in classes;
/// nothing is validated for it.
class FunctionalFamily {
 public:
  using RawReal = std::function<bool(const Vec& y, double& f, Vec& r)>;
  using RawComplex = std::function<bool(const CVec& u, Complex& f, CVec& r)>;

  static FunctionalFamily raw(int dim, RawReal real, DomainY domain, RawComplex complex = {});

  int dim() const { return dim_; }
  const LKFunctional& F() const { return F_; }
  const std::vector<LKFunctional>& R() const { return R_; }
  const DomainY& domain() const { return domain_; }
  bool is_raw() const { return static_cast<bool>(raw_real_); }
  /// No jump measure anywhere.
  bool is_diffusion() const { return diffusion_; }
  /// Parameters the family was built from; empty for raw families.
  const AffineParams* source() const { return source_.get(); }

  /// Fills F(y), R(y). Returns false when y is outside the domain or a value is infinite.
  bool eval(const Vec& y, double& f, Vec& r) const;
  /// Analytic extension; returns false when Re u is not interior.
  bool eval(const CVec& u, Complex& f, CVec& r) const;

  FunctionalFamily with_offsets(double f_offset, const Vec& r_offset) const;
  double f_offset() const { return f_offset_; }
  const Vec& r_offset() const { return r_offset_; }

 private:
  friend FunctionalFamily build_family(const AffineParams& params);

  int dim_ = 0;
  LKFunctional F_;
  std::vector<LKFunctional> R_;
  DomainY domain_;
  bool diffusion_ = true;
  double f_offset_ = 0.0;
  Vec r_offset_;
  std::shared_ptr<const AffineParams> source_;
  RawReal raw_real_;
  RawComplex raw_complex_;
};

/// Rejects parameter sets that fail validation with ValidationError.
FunctionalFamily build_family(const AffineParams& params);

DomainClass domain_classify(const FunctionalFamily& family, const Vec& y);

struct GrowthBound {
  double lhs;
  double rhs;
};

/// lhs = Re <conj(u_I), R_I(u)>, rhs = g(Re u) (1 + |u_J|^2)(1 + |u_I|^2).
/// Canonical families only.
GrowthBound growth_bound(const FunctionalFamily& family, const CVec& u);

/// g(y) of the growth estimate; a sum over i in I of drift, diffusion,
/// large-jump and small-jump constants.
double growth_function(const AffineParams& params, const Vec& y);

struct ScalarBound {
  double lhs;
  double rhs;
};

/// lhs = int_0^1 (1 - t) Re(z e^{tz}) dt, rhs = e^{(Re z)_+} - 1.
ScalarBound verify_complex_inequality(Complex z);

}  // namespace affine
