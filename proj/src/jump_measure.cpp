#include "affine/jump_measure.hpp"

#include "affine/detail/overloaded.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace affine {

namespace {

using detail::overloaded;

constexpr double kQuadRelTol = 1e-10;
constexpr double kQuadAbsTol = 1e-14;

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * boost::math::constants::pi<double>()); }

// int_0^1 s * rate * e^{-rate s} ds
double exp_truncated_mean(double rate) { return (1.0 - std::exp(-rate) * (1.0 + rate)) / rate; }

// int_{-1}^{1} s N(mean, sd^2)(ds)
double gauss_truncated_mean(double mean, double sd) {
  const double a = (-1.0 - mean) / sd;
  const double b = (1.0 - mean) / sd;
  return mean * (norm_cdf(b) - norm_cdf(a)) + sd * (norm_pdf(a) - norm_pdf(b));
}

struct AxisDensity {
  double lower;
  double upper;
  std::function<double(double)> f;
};

std::optional<AxisDensity> axis_density(const JumpMeasure::Variant& v) {
  return std::visit(
      overloaded{
          [](const OneSidedExponential& e) -> std::optional<AxisDensity> {
            return AxisDensity{0.0, kInf, [e](double s) { return e.intensity * e.rate * std::exp(-e.rate * s); }};
          },
          [](const GaussianFactor& g) -> std::optional<AxisDensity> {
            return AxisDensity{-kInf, kInf, [g](double s) {
                                 return g.intensity * norm_pdf((s - g.mean) / g.stddev) / g.stddev;
                               }};
          },
          [](const NumericDensity& n) -> std::optional<AxisDensity> {
            return AxisDensity{n.lower, n.upper, n.density};
          },
          [](const auto&) -> std::optional<AxisDensity> { return std::nullopt; },
      },
      v);
}

// int_{lo}^{hi} g(s) f(s) ds restricted to the support, split at -1, 0, 1.
quad::Result axis_integral(const AxisDensity& d, const std::function<double(double)>& g, double lo, double hi) {
  lo = std::max(lo, d.lower);
  hi = std::min(hi, d.upper);
  quad::Result total{0.0, 0.0, true};
  if (!(lo < hi)) return total;
  std::vector<double> cuts{lo};
  for (double c : {-1.0, 0.0, 1.0}) {
    if (c > lo && c < hi) cuts.push_back(c);
  }
  cuts.push_back(hi);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    auto r = quad::integrate([&](double s) { return g(s) * d.f(s); }, cuts[k], cuts[k + 1], kQuadRelTol, kQuadAbsTol);
    total.value += r.value;
    total.error += r.error;
    total.converged = total.converged && r.converged;
  }
  return total;
}

template <class Scalar>
Scalar point_mass_integral(const PointMassMixture& pm, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y, Truncation trunc) {
  Scalar acc = 0.0;
  for (const auto& atom : pm.atoms) {
    Scalar dot = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) dot += atom.location[k] * y[k];
    Scalar term = std::exp(dot) - 1.0;
    if (trunc == Truncation::Unit && atom.location.norm() <= 1.0) term -= dot;
    acc += atom.weight * term;
  }
  return acc;
}

template <class Scalar>
Scalar one_sided_integral(const OneSidedExponential& e, Scalar s, Truncation trunc) {
  Scalar value = e.intensity * s / (e.rate - s);
  if (trunc == Truncation::Unit) value -= e.intensity * s * exp_truncated_mean(e.rate);
  return value;
}

template <class Scalar>
Scalar gaussian_integral(const GaussianFactor& g, Scalar s, Truncation trunc) {
  Scalar value = g.intensity * (std::exp(g.mean * s + 0.5 * g.stddev * g.stddev * s * s) - 1.0);
  if (trunc == Truncation::Unit) value -= g.intensity * s * gauss_truncated_mean(g.mean, g.stddev);
  return value;
}

// Numeric density LK integral along an axis; integrand real/imag parts separately.
quad::Result numeric_integral_part(const NumericDensity& n, Complex s, Truncation trunc, bool imag) {
  // The density enters the integrand directly: at a boundary exponent e^{s x}
  // overflows where the density underflows, so that product is taken in logs.
  AxisDensity d{n.lower, n.upper, [](double) { return 1.0; }};
  auto g = [&](double x) {
    const double fx = n.density(x);
    if (fx == 0.0) return 0.0;
    Complex v = std::exp(s * x) - 1.0;
    if (trunc == Truncation::Unit && std::abs(x) <= 1.0) v -= s * x;
    if (!std::isfinite(std::abs(v))) v = std::exp(s * x + std::log(fx));
    else v *= fx;
    return imag ? v.imag() : v.real();
  };
  return axis_integral(d, g, -kInf, kInf);
}

}  // namespace

bool JumpMeasure::is_zero() const {
  return std::visit(overloaded{
                        [](const ZeroMeasure&) { return true; },
                        [](const PointMassMixture& pm) { return pm.atoms.empty(); },
                        [](const auto&) { return false; },
                    },
                    v_);
}

bool JumpMeasure::finite_activity() const { return std::isfinite(total_mass()); }

double JumpMeasure::total_mass() const {
  return std::visit(overloaded{
                        [](const ZeroMeasure&) { return 0.0; },
                        [](const PointMassMixture& pm) {
                          double w = 0.0;
                          for (const auto& a : pm.atoms) w += a.weight;
                          return w;
                        },
                        [](const OneSidedExponential& e) { return e.intensity; },
                        [](const GaussianFactor& g) { return g.intensity; },
                        [](const NumericDensity& n) {
                          auto r = axis_integral({n.lower, n.upper, n.density}, [](double) { return 1.0; }, -kInf, kInf);
                          return r.converged ? r.value : kInf;
                        },
                    },
                    v_);
}

std::optional<int> JumpMeasure::axis() const {
  return std::visit(overloaded{
                        [](const OneSidedExponential& e) -> std::optional<int> { return e.coordinate; },
                        [](const GaussianFactor& g) -> std::optional<int> { return g.coordinate; },
                        [](const NumericDensity& n) -> std::optional<int> { return n.coordinate; },
                        [](const auto&) -> std::optional<int> { return std::nullopt; },
                    },
                    v_);
}

void JumpMeasure::check_dimension(int dim) const {
  if (auto k = axis()) {
    if (*k < 0 || *k >= dim) {
      throw StructuralError("jump measure axis " + std::to_string(*k) + " out of range for dimension " + std::to_string(dim));
    }
  }
  if (const auto* pm = std::get_if<PointMassMixture>(&v_)) {
    for (const auto& a : pm->atoms) {
      if (a.location.size() != dim) {
        throw StructuralError("jump atom has dimension " + std::to_string(a.location.size()) + ", expected " +
                              std::to_string(dim));
      }
    }
  }
  if (const auto* g = std::get_if<GaussianFactor>(&v_)) {
    if (!(g->stddev > 0.0)) throw StructuralError("gaussian jump stddev must be positive");
  }
  if (const auto* e = std::get_if<OneSidedExponential>(&v_)) {
    if (!(e->rate > 0.0)) throw StructuralError("exponential jump rate must be positive");
  }
  if (const auto* n = std::get_if<NumericDensity>(&v_)) {
    if (!n->density || !n->tail_certificate) throw StructuralError("numeric density needs a density and a tail certificate");
  }
}

double JumpMeasure::integral(const Vec& y, Truncation trunc) const {
  return std::visit(
      overloaded{
          [](const ZeroMeasure&) { return 0.0; },
          [&](const PointMassMixture& pm) { return point_mass_integral<double>(pm, y, trunc); },
          [&](const OneSidedExponential& e) {
            const double s = y[e.coordinate];
            if (!(s < e.rate)) return kInf;
            return one_sided_integral<double>(e, s, trunc);
          },
          [&](const GaussianFactor& g) { return gaussian_integral<double>(g, y[g.coordinate], trunc); },
          [&](const NumericDensity& n) {
            const double s = y[n.coordinate];
            if (n.tail_certificate(s) == DomainClass::Outside) return kInf;
            auto r = numeric_integral_part(n, Complex(s, 0.0), trunc, false);
            return r.converged ? r.value : kInf;
          },
      },
      v_);
}

bool JumpMeasure::integral(const CVec& u, Truncation trunc, Complex& out) const {
  return std::visit(
      overloaded{
          [&](const ZeroMeasure&) {
            out = 0.0;
            return true;
          },
          [&](const PointMassMixture& pm) {
            out = point_mass_integral<Complex>(pm, u, trunc);
            return true;
          },
          [&](const OneSidedExponential& e) {
            const Complex s = u[e.coordinate];
            if (!(s.real() < e.rate)) return false;
            out = one_sided_integral<Complex>(e, s, trunc);
            return true;
          },
          [&](const GaussianFactor& g) {
            out = gaussian_integral<Complex>(g, u[g.coordinate], trunc);
            return true;
          },
          [&](const NumericDensity& n) {
            const Complex s = u[n.coordinate];
            if (n.tail_certificate(s.real()) != DomainClass::Interior) return false;
            auto re = numeric_integral_part(n, s, trunc, false);
            auto im = numeric_integral_part(n, s, trunc, true);
            if (!re.converged || !im.converged) {
              throw NumericError("numeric jump density integral did not converge", std::max(re.error, im.error));
            }
            out = Complex(re.value, im.value);
            return true;
          },
      },
      v_);
}

DomainY JumpMeasure::tail_domain(int dim) const {
  return std::visit(
      overloaded{
          [&](const OneSidedExponential& e) {
            Vec n = Vec::Zero(dim);
            n[e.coordinate] = 1.0;
            std::ostringstream label;
            label << "y[" << e.coordinate << "] < " << e.rate;
            return DomainY::half_spaces({HalfSpace{n, e.rate, true, label.str()}});
          },
          [&](const NumericDensity& nd) {
            const int k = nd.coordinate;
            auto cert = nd.tail_certificate;
            return DomainY::callback([k, cert](const Vec& y) { return cert(y[k]); }, nd.label + " tail");
          },
          [](const auto&) { return DomainY::full_space(); },
      },
      v_);
}

quad::Result JumpMeasure::small_abs_moment(const std::vector<int>& coords) const {
  auto in = [&](int k) { return std::find(coords.begin(), coords.end(), k) != coords.end(); };
  if (const auto* pm = std::get_if<PointMassMixture>(&v_)) {
    double acc = 0.0;
    for (const auto& a : pm->atoms) {
      if (a.location.norm() > 1.0) continue;
      double sq = 0.0;
      for (int k : coords) sq += a.location[k] * a.location[k];
      acc += std::abs(a.weight) * std::sqrt(sq);
    }
    return {acc, 0.0, true};
  }
  auto d = axis_density(v_);
  if (!d || !in(*axis())) return {0.0, 0.0, true};
  return axis_integral(*d, [](double s) { return std::abs(s); }, -1.0, 1.0);
}

quad::Result JumpMeasure::small_sq_moment(const std::vector<int>& coords) const {
  auto in = [&](int k) { return std::find(coords.begin(), coords.end(), k) != coords.end(); };
  if (const auto* pm = std::get_if<PointMassMixture>(&v_)) {
    double acc = 0.0;
    for (const auto& a : pm->atoms) {
      if (a.location.norm() > 1.0) continue;
      double sq = 0.0;
      for (int k : coords) sq += a.location[k] * a.location[k];
      acc += std::abs(a.weight) * sq;
    }
    return {acc, 0.0, true};
  }
  auto d = axis_density(v_);
  if (!d || !in(*axis())) return {0.0, 0.0, true};
  return axis_integral(*d, [](double s) { return s * s; }, -1.0, 1.0);
}

quad::Result JumpMeasure::levy_moment() const {
  if (const auto* pm = std::get_if<PointMassMixture>(&v_)) {
    double acc = 0.0;
    for (const auto& a : pm->atoms) acc += std::abs(a.weight) * std::min(1.0, a.location.squaredNorm());
    return {acc, 0.0, true};
  }
  auto d = axis_density(v_);
  if (!d) return {0.0, 0.0, true};
  return axis_integral(*d, [](double s) { return std::min(1.0, s * s); }, -kInf, kInf);
}

double JumpMeasure::truncated_mean(int k) const {
  return std::visit(overloaded{
                        [](const ZeroMeasure&) { return 0.0; },
                        [&](const PointMassMixture& pm) {
                          double acc = 0.0;
                          for (const auto& a : pm.atoms) {
                            if (a.location.norm() <= 1.0) acc += a.weight * a.location[k];
                          }
                          return acc;
                        },
                        [&](const OneSidedExponential& e) {
                          return e.coordinate == k ? e.intensity * exp_truncated_mean(e.rate) : 0.0;
                        },
                        [&](const GaussianFactor& g) {
                          return g.coordinate == k ? g.intensity * gauss_truncated_mean(g.mean, g.stddev) : 0.0;
                        },
                        [&](const NumericDensity& n) {
                          if (n.coordinate != k) return 0.0;
                          auto r = axis_integral({n.lower, n.upper, n.density}, [](double s) { return s; }, -1.0, 1.0);
                          return r.converged ? r.value : std::nan("");
                        },
                    },
                    v_);
}

double JumpMeasure::large_jump_exp(const Vec& y) const {
  return std::visit(
      overloaded{
          [](const ZeroMeasure&) { return 0.0; },
          [&](const PointMassMixture& pm) {
            double acc = 0.0;
            for (const auto& a : pm.atoms) {
              if (a.location.norm() > 1.0) acc += std::abs(a.weight) * std::exp(a.location.dot(y));
            }
            return acc;
          },
          [&](const OneSidedExponential& e) {
            const double s = y[e.coordinate];
            if (!(s < e.rate)) return kInf;
            return e.intensity * e.rate * std::exp(-(e.rate - s)) / (e.rate - s);
          },
          [&](const GaussianFactor& g) {
            const double s = y[g.coordinate];
            const double mgf = std::exp(g.mean * s + 0.5 * g.stddev * g.stddev * s * s);
            const double shifted = g.mean + g.stddev * g.stddev * s;
            return g.intensity * mgf *
                   (norm_cdf((shifted - 1.0) / g.stddev) + norm_cdf((-1.0 - shifted) / g.stddev));
          },
          [&](const NumericDensity& n) {
            const double s = y[n.coordinate];
            if (n.tail_certificate(s) == DomainClass::Outside) return kInf;
            AxisDensity d{n.lower, n.upper, n.density};
            auto g = [s](double x) { return std::exp(s * x); };
            auto lo = axis_integral(d, g, -kInf, -1.0);
            auto hi = axis_integral(d, g, 1.0, kInf);
            return (lo.converged && hi.converged) ? lo.value + hi.value : kInf;
          },
      },
      v_);
}

double JumpMeasure::large_jump_mass() const {
  if (const auto* pm = std::get_if<PointMassMixture>(&v_)) {
    double acc = 0.0;
    for (const auto& a : pm->atoms) {
      if (a.location.norm() > 1.0) acc += std::abs(a.weight);
    }
    return acc;
  }
  auto d = axis_density(v_);
  if (!d) return 0.0;
  auto lo = axis_integral(*d, [](double) { return 1.0; }, -kInf, -1.0);
  auto hi = axis_integral(*d, [](double) { return 1.0; }, 1.0, kInf);
  return lo.value + hi.value;
}

double JumpMeasure::small_exp_term(int i, double s) const {
  if (const auto* pm = std::get_if<PointMassMixture>(&v_)) {
    double acc = 0.0;
    for (const auto& a : pm->atoms) {
      if (a.location.norm() > 1.0) continue;
      const double xi = a.location[i];
      acc += std::abs(a.weight) * xi * std::expm1(xi * s);
    }
    return acc;
  }
  auto d = axis_density(v_);
  if (!d || *axis() != i) return 0.0;
  auto r = axis_integral(*d, [s](double x) { return x * std::expm1(x * s); }, -1.0, 1.0);
  return r.converged ? r.value : kInf;
}

bool JumpMeasure::support_within(const std::vector<bool>& nonnegative) const {
  auto ok_axis = [&](int k, double lower) {
    return k < 0 || k >= static_cast<int>(nonnegative.size()) || !nonnegative[k] || lower >= 0.0;
  };
  return std::visit(overloaded{
                        [](const ZeroMeasure&) { return true; },
                        [&](const PointMassMixture& pm) {
                          for (const auto& a : pm.atoms) {
                            for (Eigen::Index k = 0; k < a.location.size(); ++k) {
                              if (k < static_cast<Eigen::Index>(nonnegative.size()) && nonnegative[k] &&
                                  a.location[k] < 0.0) {
                                return false;
                              }
                            }
                          }
                          return true;
                        },
                        [&](const OneSidedExponential& e) { return ok_axis(e.coordinate, 0.0); },
                        [&](const GaussianFactor& g) { return ok_axis(g.coordinate, -kInf); },
                        [&](const NumericDensity& n) { return ok_axis(n.coordinate, n.lower); },
                    },
                    v_);
}

JumpMeasure JumpMeasure::scaled(double c) const {
  return std::visit(overloaded{
                        [](const ZeroMeasure& z) { return JumpMeasure{z}; },
                        [c](PointMassMixture pm) {
                          for (auto& a : pm.atoms) a.weight *= c;
                          return JumpMeasure{std::move(pm)};
                        },
                        [c](OneSidedExponential e) {
                          e.intensity *= c;
                          return JumpMeasure{e};
                        },
                        [c](GaussianFactor g) {
                          g.intensity *= c;
                          return JumpMeasure{g};
                        },
                        [c](NumericDensity n) {
                          auto f = n.density;
                          n.density = [f, c](double s) { return c * f(s); };
                          return JumpMeasure{std::move(n)};
                        },
                    },
                    v_);
}

JumpMeasure JumpMeasure::lifted(int new_dim) const {
  if (const auto* pm = std::get_if<PointMassMixture>(&v_)) {
    PointMassMixture out;
    for (const auto& a : pm->atoms) {
      Vec loc = Vec::Zero(new_dim);
      loc.head(a.location.size()) = a.location;
      out.atoms.push_back({loc, a.weight});
    }
    return JumpMeasure{std::move(out)};
  }
  return *this;
}

std::string JumpMeasure::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const ZeroMeasure&) { os << "zero"; },
                 [&](const PointMassMixture& pm) { os << "point masses (" << pm.atoms.size() << " atoms)"; },
                 [&](const OneSidedExponential& e) {
                   os << "one-sided exponential on coordinate " << e.coordinate << " (rate " << e.rate << ", intensity "
                      << e.intensity << ")";
                 },
                 [&](const GaussianFactor& g) {
                   os << "gaussian on coordinate " << g.coordinate << " (mean " << g.mean << ", stddev " << g.stddev
                      << ", intensity " << g.intensity << ")";
                 },
                 [&](const NumericDensity& n) { os << n.label << " on coordinate " << n.coordinate; },
             },
             v_);
  return os.str();
}

}  // namespace affine
