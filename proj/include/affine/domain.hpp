#pragma once

#include "affine/core.hpp"

#include <functional>
#include <string>
#include <vector>

namespace affine {

/// Constraint <normal, y> < offset (strict) or <= offset (closed).
struct HalfSpace {
  Vec normal;
  double offset = 0.0;
  bool strict = true;
  std::string label;
};

/// Effective domain of the Riccati vector field: the set of exponents y with
/// finite exponential tail integrals for every jump measure. Always convex and
/// always contains 0.
class DomainY {
 public:
  enum class Kind { FullSpace, HalfSpaceIntersection, Callback };
  using Membership = std::function<DomainClass(const Vec&)>;

  static DomainY full_space() { return DomainY{}; }
  static DomainY half_spaces(std::vector<HalfSpace> constraints);
  static DomainY callback(Membership membership, std::string label = "callback");

  DomainY intersect(const DomainY& other) const;

  Kind kind() const { return kind_; }
  const std::vector<HalfSpace>& constraints() const { return constraints_; }

  DomainClass classify(const Vec& y) const;

  /// Euclidean distance to the boundary for half-space representations,
  /// +inf for the full space, NaN when only a membership callback is known.
  double distance_to_boundary(const Vec& y) const;

  /// Label of the constraint closest to y (empty if none).
  std::string nearest_constraint(const Vec& y) const;

  bool is_full_space() const { return kind_ == Kind::FullSpace; }
  /// True when the set is known to be open.
  bool is_open() const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::FullSpace;
  std::vector<HalfSpace> constraints_;
  std::vector<std::pair<Membership, std::string>> callbacks_;
};

}  // namespace affine
