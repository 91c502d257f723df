#pragma once

#include "affine/core.hpp"
#include "affine/domain.hpp"
#include "affine/quadrature.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace affine {

/// Compensator cutoff used inside the Levy-Khintchine integrand.
/// `Unit` is h(xi) = xi * 1{|xi| <= 1}; `None` drops the compensator
/// (finite-variation jump parts, as on the matrix cone).
enum class Truncation { Unit, None };

struct ZeroMeasure {};

struct PointMass {
  Vec location;
  double weight = 0.0;
};

/// Finite sum of weighted Dirac masses. Weights are positive for jump
/// measures supplied by users; signed weights appear only in internally
/// derived coordinate functionals (matrix cone).
struct PointMassMixture {
  std::vector<PointMass> atoms;
};

/// Jumps along +e_k with exponentially distributed size:
/// nu(ds) = intensity * rate * exp(-rate s) ds on s > 0.
struct OneSidedExponential {
  int coordinate = 0;
  double rate = 1.0;
  double intensity = 1.0;
};

/// Gaussian jump sizes along e_k (k must be a real-valued coordinate):
/// nu(ds) = intensity * N(mean, stddev^2)(ds).
struct GaussianFactor {
  int coordinate = 0;
  double mean = 0.0;
  double stddev = 1.0;
  double intensity = 1.0;
};

/// User-supplied density along e_k on [lower, upper]. The tail certificate
/// classifies an axis exponent s against {s : int_{|xi|>=1} e^{s xi} nu(dxi) < inf};
/// it is trusted, not inferred.
struct NumericDensity {
  int coordinate = 0;
  double lower = 0.0;
  double upper = kInf;
  std::function<double(double)> density;
  std::function<DomainClass(double)> tail_certificate;
  std::string label = "numeric density";
};

class JumpMeasure {
 public:
  using Variant = std::variant<ZeroMeasure, PointMassMixture, OneSidedExponential, GaussianFactor, NumericDensity>;

  JumpMeasure() = default;
  JumpMeasure(Variant v) : v_(std::move(v)) {}  // NOLINT: implicit from alternatives is convenient

  static JumpMeasure zero() { return JumpMeasure{}; }
  static JumpMeasure point_masses(std::vector<PointMass> atoms) { return JumpMeasure{PointMassMixture{std::move(atoms)}}; }
  static JumpMeasure one_sided_exponential(int coordinate, double rate, double intensity) {
    return JumpMeasure{OneSidedExponential{coordinate, rate, intensity}};
  }
  static JumpMeasure gaussian(int coordinate, double mean, double stddev, double intensity) {
    return JumpMeasure{GaussianFactor{coordinate, mean, stddev, intensity}};
  }

  const Variant& variant() const { return v_; }

  bool is_zero() const;
  bool finite_activity() const;
  /// Total mass; +inf for infinite activity.
  double total_mass() const;
  /// Coordinate axis carrying the measure, for one-dimensional variants.
  std::optional<int> axis() const;

  /// Throws StructuralError when atoms or axis indices do not fit `dim`.
  void check_dimension(int dim) const;

  /// Jump part of a Levy-Khintchine exponent,
  ///   int (e^{<xi,y>} - 1 - <h(xi), y>) nu(dxi),
  /// or +inf when y is outside the tail domain.
  double integral(const Vec& y, Truncation trunc) const;
  /// Analytic extension. Returns false when Re u is not interior to the tail domain.
  bool integral(const CVec& u, Truncation trunc, Complex& out) const;

  /// {y : int_{|xi|>=1} e^{<y,xi>} nu(dxi) < inf} in R^dim.
  DomainY tail_domain(int dim) const;

  /// int_{|xi|<=1} |xi_S| nu(dxi) for the coordinate subset S.
  quad::Result small_abs_moment(const std::vector<int>& coords) const;
  /// int_{|xi|<=1} |xi_S|^2 nu(dxi).
  quad::Result small_sq_moment(const std::vector<int>& coords) const;
  /// int (|xi|^2 ^ 1) nu(dxi).
  quad::Result levy_moment() const;
  /// int_{|xi|<=1} xi_k nu(dxi).
  double truncated_mean(int k) const;
  /// int_{|xi|>1} e^{<xi,y>} nu(dxi); +inf when divergent.
  double large_jump_exp(const Vec& y) const;
  /// nu({|xi| > 1}).
  double large_jump_mass() const;
  /// int_{|xi|<=1} xi_i (e^{xi_i s} - 1) nu(dxi).
  double small_exp_term(int i, double s) const;

  /// Whether every jump keeps the sign pattern: coordinates flagged in
  /// `nonnegative` must have xi_k >= 0 on the support.
  bool support_within(const std::vector<bool>& nonnegative) const;

  JumpMeasure scaled(double c) const;
  /// Embeds into R^new_dim by appending zero coordinates to atoms.
  JumpMeasure lifted(int new_dim) const;

  std::string describe() const;

 private:
  Variant v_;
};

/// S_d^+-valued point-mass measure on the matrix cone: sum_k W_k delta_{xi_k}.
/// Locations and weights are symmetric d x d matrices.
struct MatrixAtom {
  Mat location;
  Mat weight;
};

struct MatrixJumpMeasure {
  std::vector<MatrixAtom> atoms;
  bool is_zero() const { return atoms.empty(); }
};

}  // namespace affine
