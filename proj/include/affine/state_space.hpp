#pragma once

#include "affine/core.hpp"
#include "affine/jump_measure.hpp"

#include <string>
#include <variant>
#include <vector>

namespace affine {

/// R_{>=0}^m x R^n. The first m coordinates form the index set I, the
/// remaining n the index set J.
struct CanonicalSpace {
  int m = 0;
  int n = 0;
  int dim() const { return m + n; }
  bool operator==(const CanonicalSpace&) const = default;
};

/// Cone of positive semidefinite d x d matrices, d >= 2. Matrices are
/// flattened column-major into R^{d*d}; the flat dot product then equals
/// the trace inner product tr(x y) on symmetric matrices.
struct MatrixConeSpace {
  int d = 2;
  bool operator==(const MatrixConeSpace&) const = default;
};

class StateSpace {
 public:
  static StateSpace canonical(int m, int n);
  /// d = 1 is rejected; use canonical(1, 0) instead.
  static StateSpace matrix_cone(int d);

  bool is_canonical() const { return std::holds_alternative<CanonicalSpace>(v_); }
  const CanonicalSpace& canonical_space() const { return std::get<CanonicalSpace>(v_); }
  const MatrixConeSpace& matrix_space() const { return std::get<MatrixConeSpace>(v_); }

  /// Length of flattened state vectors.
  int dimension() const;

  /// Whether x (flattened) is a point of the state space.
  bool contains(const Vec& x) const;

  /// Per-coordinate sign constraint of the canonical space (true on I).
  std::vector<bool> nonnegative_mask() const;

  std::string describe() const;

  bool operator==(const StateSpace&) const = default;

 private:
  explicit StateSpace(std::variant<CanonicalSpace, MatrixConeSpace> v) : v_(v) {}
  std::variant<CanonicalSpace, MatrixConeSpace> v_;
};

/// Coefficients of a(x), b(x), K(x, dxi) on the canonical space:
///   a(x) = a + sum_i x_i alpha[i],  b(x) = b + sum_i x_i beta[i],
///   K(x, .) = m + sum_i x_i mu[i].
struct CanonicalParams {
  Mat a;
  std::vector<Mat> alpha;
  Vec b;
  std::vector<Vec> beta;
  JumpMeasure m;
  std::vector<JumpMeasure> mu;
};

/// Matrix-cone parameters (alpha, b, B, m, mu). `B` is the linear drift as a
/// (d*d) x (d*d) matrix acting on column-major vec(x). `m` must be a
/// point-mass mixture with flattened matrix locations.
struct MatrixParams {
  Mat alpha;
  Mat b;
  Mat B;
  JumpMeasure m;
  MatrixJumpMeasure mu;
};

struct AffineParams {
  StateSpace space = StateSpace::canonical(1, 0);
  std::variant<CanonicalParams, MatrixParams> coefficients;

  bool is_canonical() const { return space.is_canonical(); }
  const CanonicalParams& canonical() const { return std::get<CanonicalParams>(coefficients); }
  const MatrixParams& matrix() const { return std::get<MatrixParams>(coefficients); }
  CanonicalParams& canonical() { return std::get<CanonicalParams>(coefficients); }
  MatrixParams& matrix() { return std::get<MatrixParams>(coefficients); }
};

/// vec-representation of x -> M x + x M^T.
Mat linear_drift_from(const Mat& M);

struct Violation {
  std::string id;
  std::string message;
};

struct ValidationReport {
  bool passed = true;
  std::vector<Violation> violations;
  /// Smallest tr(x B(u)) over the sampled boundary pairs (matrix cone only).
  double inward_margin = kInf;

  bool has(const std::string& id) const;
  void add(std::string id, std::string message);
};

/// Admissibility on R_{>=0}^m x R^n. Throws StructuralError on shape mismatch.
ValidationReport validate_canonical(const AffineParams& params);

/// Admissibility on S_d^+. Throws StructuralError on shape mismatch.
ValidationReport validate_matrix(const AffineParams& params);

ValidationReport validate(const AffineParams& params);

/// Whether the complex transform formula applies: always on the canonical
/// space; on S_d^+ iff alpha vanishes or is invertible.
bool check_complex_assumption(const AffineParams& params);

/// Parameters of (X, Y) with Y_t = y + int_0^t (l + <lambda, X_s>) ds on
/// D x R. Canonical spaces only; the new coordinate is appended to J.
AffineParams embed_discounting(const AffineParams& params, double l, const Vec& lambda);

}  // namespace affine
