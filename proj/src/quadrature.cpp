#include "affine/quadrature.hpp"

#include "affine/core.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>

namespace affine::quad {

namespace {

bool meets(double value, double error, double rel_tol, double abs_tol) {
  return std::isfinite(value) && std::isfinite(error) &&
         error <= std::max(rel_tol * std::abs(value), abs_tol);
}

Result double_exponential(const std::function<double(double)>& f, double a, double b,
                          double rel_tol) {
  Result r;
  try {
    if (std::isinf(b) && !std::isinf(a)) {
      boost::math::quadrature::exp_sinh<double> rule;
      r.value = rule.integrate([&](double s) { return f(s); }, a, b, rel_tol, &r.error);
    } else if (!std::isinf(a) && !std::isinf(b)) {
      // Nodes closer than 1e-100 to an endpoint are skipped: densities written
      // as powers overflow there even when the integrand is integrable.
      boost::math::quadrature::tanh_sinh<double> rule(15, 1e-100);
      r.value = rule.integrate([&](double s) { return f(s); }, a, b, rel_tol, &r.error);
    } else {
      r.value = std::numeric_limits<double>::quiet_NaN();
      r.error = std::numeric_limits<double>::infinity();
    }
  } catch (const NumericError&) {
    throw;  // an integrand abort is not a rule failure
  } catch (const std::exception&) {
    r.value = std::numeric_limits<double>::quiet_NaN();
    r.error = std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol, unsigned max_depth) {
  if (a == b) return {0.0, 0.0, true};
  if (a > b) {
    Result r = integrate(f, b, a, rel_tol, abs_tol, max_depth);
    r.value = -r.value;
    return r;
  }
  Result gk;
  try {
    gk.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double s) { return f(s); }, a, b, max_depth, rel_tol, &gk.error);
  } catch (const NumericError&) {
    throw;  // an integrand abort is not a rule failure
  } catch (const std::exception&) {
    gk.value = std::numeric_limits<double>::quiet_NaN();
    gk.error = std::numeric_limits<double>::infinity();
  }
  gk.converged = meets(gk.value, gk.error, rel_tol, abs_tol);
  if (gk.converged) return gk;

  Result de = double_exponential(f, a, b, rel_tol);
  de.converged = meets(de.value, de.error, rel_tol, abs_tol);
  if (de.converged) return de;
  // Report whichever estimate claims the smaller error.
  if (std::isfinite(de.error) && (!std::isfinite(gk.error) || de.error < gk.error)) return de;
  return gk;
}

}  // namespace affine::quad
