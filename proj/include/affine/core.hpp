#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace affine {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Position of a point relative to a convex set.
enum class DomainClass { Interior, Boundary, Outside };

const char* to_string(DomainClass c);

/// Parameter containers with inconsistent shapes (wrong vector lengths,
/// missing per-coordinate entries). Distinct from admissibility failures.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters failed the admissibility check.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the set where an operation is defined
/// (state outside D, exponent outside the effective domain).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure did not reach its requested tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Unsupported combination of inputs (e.g. matrix state space where only
/// canonical ones are handled).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline Vec real_part(const CVec& u) { return u.real(); }

}  // namespace affine
