#pragma once

#include <functional>

namespace affine::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

/// Adaptive Gauss-Kronrod (15-point) on [a, b]; either bound may be infinite.
/// Falls back to double-exponential rules when the Kronrod estimate stalls,
/// which happens for integrable endpoint singularities. `converged` is false
/// when neither rule meets max(rel_tol * |value|, abs_tol). A NumericError
/// thrown by `f` propagates.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol = 0.0, unsigned max_depth = 18);

}  // namespace affine::quad
