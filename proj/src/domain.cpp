#include "affine/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace affine {

const char* to_string(DomainClass c) {
  switch (c) {
    case DomainClass::Interior: return "interior";
    case DomainClass::Boundary: return "boundary";
    case DomainClass::Outside: return "outside";
  }
  return "?";
}

namespace {

DomainClass worst(DomainClass a, DomainClass b) { return static_cast<int>(a) > static_cast<int>(b) ? a : b; }

// Relative slack used to call a point "on" a hyperplane.
double plane_tolerance(double offset) { return 1e-12 * std::max(1.0, std::abs(offset)); }

}  // namespace

DomainY DomainY::half_spaces(std::vector<HalfSpace> constraints) {
  DomainY d;
  if (constraints.empty()) return d;
  d.kind_ = Kind::HalfSpaceIntersection;
  d.constraints_ = std::move(constraints);
  return d;
}

DomainY DomainY::callback(Membership membership, std::string label) {
  DomainY d;
  d.kind_ = Kind::Callback;
  d.callbacks_.emplace_back(std::move(membership), std::move(label));
  return d;
}

DomainY DomainY::intersect(const DomainY& other) const {
  DomainY out;
  out.constraints_ = constraints_;
  out.constraints_.insert(out.constraints_.end(), other.constraints_.begin(), other.constraints_.end());
  out.callbacks_ = callbacks_;
  out.callbacks_.insert(out.callbacks_.end(), other.callbacks_.begin(), other.callbacks_.end());
  if (!out.callbacks_.empty()) {
    out.kind_ = Kind::Callback;
  } else if (!out.constraints_.empty()) {
    out.kind_ = Kind::HalfSpaceIntersection;
  }
  return out;
}

DomainClass DomainY::classify(const Vec& y) const {
  DomainClass result = DomainClass::Interior;
  for (const auto& h : constraints_) {
    const double v = h.normal.dot(y);
    if (std::isnan(v)) return DomainClass::Outside;
    const double tol = plane_tolerance(h.offset);
    if (v > h.offset + tol) return DomainClass::Outside;
    if (v >= h.offset - tol) result = DomainClass::Boundary;
  }
  for (const auto& [fn, label] : callbacks_) {
    result = worst(result, fn(y));
    if (result == DomainClass::Outside) return result;
  }
  return result;
}

double DomainY::distance_to_boundary(const Vec& y) const {
  if (!callbacks_.empty()) return std::nan("");
  double best = kInf;
  for (const auto& h : constraints_) {
    const double n = h.normal.norm();
    if (n == 0.0) continue;
    best = std::min(best, (h.offset - h.normal.dot(y)) / n);
  }
  return best;
}

std::string DomainY::nearest_constraint(const Vec& y) const {
  double best = kInf;
  std::string label;
  for (const auto& h : constraints_) {
    const double n = h.normal.norm();
    if (n == 0.0) continue;
    const double dist = (h.offset - h.normal.dot(y)) / n;
    if (dist < best) {
      best = dist;
      label = h.label;
    }
  }
  if (label.empty() && !callbacks_.empty()) label = callbacks_.front().second;
  return label;
}

bool DomainY::is_open() const {
  if (!callbacks_.empty()) return false;
  return std::all_of(constraints_.begin(), constraints_.end(), [](const HalfSpace& h) { return h.strict; });
}

std::string DomainY::describe() const {
  if (kind_ == Kind::FullSpace) return "full space";
  std::ostringstream os;
  bool first = true;
  for (const auto& h : constraints_) {
    if (!first) os << " and ";
    first = false;
    os << (h.label.empty() ? "half-space" : h.label);
  }
  for (const auto& cb : callbacks_) {
    if (!first) os << " and ";
    first = false;
    os << cb.second;
  }
  return os.str();
}

}  // namespace affine
