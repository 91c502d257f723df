#include "doctest.h"

#include "affine/levy_functionals.hpp"
#include "affine/models.hpp"
#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <random>

using namespace affine;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

LKFunctional jump_only(JumpMeasure m) {
  return LKFunctional{Mat::Zero(1, 1), Vec::Zero(1), std::move(m), Truncation::Unit};
}

std::vector<AffineParams> canonical_zoo() {
  return {models::cir(1.0, 0.02, 0.2),
          models::vasicek(0.5, 0.03, 0.01),
          models::black_scholes(0.2, 0.03),
          models::heston(1.5, 0.04, 0.5, -0.7, 0.02),
          models::bates(1.5, 0.04, 0.5, -0.7, 0.02, 0.3, -0.1, 0.15),
          models::merton(0.2, 0.01, 0.5, -0.05, 0.1),
          models::pure_jump(1.0, 0.5, 0.8, 3.0),
          models::two_factor_jump()};
}

// Uniform draw from [-half_width, half_width]^d restricted to the interior of the domain.
Vec interior_sample(const FunctionalFamily& fam, std::mt19937_64& rng, double half_width) {
  std::uniform_real_distribution<double> unif(-half_width, half_width);
  while (true) {
    Vec y(fam.dim());
    for (int k = 0; k < y.size(); ++k) y[k] = unif(rng);
    if (fam.domain().classify(y) == DomainClass::Interior) return y;
  }
}

}  // namespace

TEST_CASE("F and R vanish at the origin on every built-in model") {
  auto zoo = canonical_zoo();
  zoo.push_back(models::wishart(2));
  zoo.push_back(models::wishart(3, 2.5, 0.3));
  for (const auto& p : zoo) {
    const auto fam = build_family(p);
    double f = 1.0;
    Vec r;
    REQUIRE(fam.eval(Vec(Vec::Zero(fam.dim())), f, r));
    CHECK(f == 0.0);
    CHECK(r.isZero(0.0));
    Complex fc = 1.0;
    CVec rc;
    REQUIRE(fam.eval(CVec(CVec::Zero(fam.dim())), fc, rc));
    CHECK(fc == Complex(0.0));
    CHECK(rc.isZero(0.0));
  }
}

TEST_CASE("CIR functionals are read off the coefficients") {
  const double kappa = 1.3, theta = 0.05, sigma = 0.4;
  const auto fam = build_family(models::cir(kappa, theta, sigma));
  for (double y : {-3.0, -0.5, 0.7, 2.0}) {
    double f;
    Vec r;
    REQUIRE(fam.eval(v1(y), f, r));
    CHECK(f == doctest::Approx(kappa * theta * y).epsilon(1e-15));
    CHECK(r[0] == doctest::Approx(0.5 * sigma * sigma * y * y - kappa * y).epsilon(1e-15));
  }
}

TEST_CASE("Levy process: R vanishes and F is the Levy exponent") {
  const double sigma = 0.2, r = 0.01, lam = 0.5, m = -0.05, s = 0.1;
  const auto fam = build_family(models::merton(sigma, r, lam, m, s));
  for (double y : {-2.0, 0.5, 3.0}) {
    double f;
    Vec rv;
    REQUIRE(fam.eval(v1(y), f, rv));
    CHECK(rv.isZero(0.0));
    // log E[exp(y X_1)] for X_1 = drift + sigma W + compound Poisson with normal jumps,
    // with the drift fixed by E[exp(X_1)] = e^r.
    const double jump_mgf = [&](double u) { return lam * (std::exp(m * u + 0.5 * s * s * u * u) - 1.0); }(y);
    const double drift = r - 0.5 * sigma * sigma - lam * (std::exp(m + 0.5 * s * s) - 1.0);
    CHECK(f == doctest::Approx(drift * y + 0.5 * sigma * sigma * y * y + jump_mgf).epsilon(1e-12));
  }
}

TEST_CASE("Wishart functionals: R(u) = 2 u alpha u + B^T(u), F(u) = tr(b u)") {
  const auto p = models::wishart(2, 3.0, 0.5);
  const auto fam = build_family(p);
  const auto& mp = p.matrix();
  Mat u(2, 2);
  u << 0.3, -0.1, -0.1, -0.4;
  double f;
  Vec r;
  REQUIRE(fam.eval(Vec(u.reshaped()), f, r));
  const Mat expected = 2.0 * u * mp.alpha * u + (mp.B.transpose() * u.reshaped()).reshaped(2, 2);
  CHECK((r.reshaped(2, 2) - expected).norm() < 1e-14);
  CHECK(f == doctest::Approx((mp.b * u).trace()).epsilon(1e-14));
}

TEST_CASE("one-sided exponential jumps: closed form inside, infinite from the rate on") {
  const double rate = 3.0, c = 1.0;
  const auto f = jump_only(JumpMeasure::one_sided_exponential(0, rate, c));
  // int_0^inf (e^{y s} - 1 - y s 1{s <= 1}) c rate e^{-rate s} ds.
  auto closed = [&](double y) {
    const double trunc_mean = (1.0 - std::exp(-rate) * (1.0 + rate)) / rate;
    return c * (rate / (rate - y) - 1.0) - c * y * trunc_mean;
  };
  for (double y : {-4.0, -0.5, 1.0, 2.0, 2.9}) {
    CAPTURE(y);
    CHECK(eval_real(f, v1(y)) == doctest::Approx(closed(y)).epsilon(1e-12));
  }
  CHECK(eval_real(f, v1(3.0)) == kInf);
  CHECK(eval_real(f, v1(4.0)) == kInf);

  const auto fam = build_family(models::pure_jump(1.0, 0.5, 0.8, 3.0));
  CHECK(domain_classify(fam, v1(2.999999)) == DomainClass::Interior);
  CHECK(domain_classify(fam, v1(3.0)) == DomainClass::Boundary);
  CHECK(domain_classify(fam, v1(3.001)) == DomainClass::Outside);
  CHECK(domain_classify(fam, v1(0.0)) == DomainClass::Interior);
}

TEST_CASE("Gaussian jumps agree with the normal MGF and with direct quadrature") {
  const double mean = -0.2, sd = 0.3, lam = 0.7;
  const auto f = jump_only(JumpMeasure::gaussian(0, mean, sd, lam));
  auto density = [&](double s) {
    return lam * std::exp(-0.5 * (s - mean) * (s - mean) / (sd * sd)) / (sd * std::sqrt(2.0 * std::numbers::pi));
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double trunc_mean = GK::integrate([&](double s) { return s * density(s); }, -1.0, 1.0, 15, 1e-14);
  for (double y : {-6.0, -1.0, 0.4, 2.5, 8.0}) {
    CAPTURE(y);
    const double mgf_form = lam * (std::exp(mean * y + 0.5 * sd * sd * y * y) - 1.0) - y * trunc_mean;
    const double direct = GK::integrate(
        [&](double s) { return (std::expm1(y * s) - (std::abs(s) <= 1.0 ? y * s : 0.0)) * density(s); }, -1.0, 1.0, 15,
        1e-14) + GK::integrate([&](double s) { return std::expm1(y * s) * density(s); }, -12.0, -1.0, 15, 1e-14) +
                          GK::integrate([&](double s) { return std::expm1(y * s) * density(s); }, 1.0, 12.0, 15, 1e-14);
    const double got = eval_real(f, v1(y));
    CHECK(got == doctest::Approx(mgf_form).epsilon(1e-12));
    CHECK(got == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("complex evaluation on the real axis equals the real evaluation") {
  std::mt19937_64 rng(3);
  for (const auto& p : canonical_zoo()) {
    const auto fam = build_family(p);
    for (int k = 0; k < 50; ++k) {
      const Vec y = interior_sample(fam, rng, 2.5);
      double f;
      Vec r;
      Complex fc;
      CVec rc;
      REQUIRE(fam.eval(y, f, r));
      REQUIRE(fam.eval(CVec(y.cast<Complex>()), fc, rc));
      const double scale = std::max(1.0, std::abs(f));
      CHECK(std::abs(fc.real() - f) <= 1e-14 * scale);
      CHECK(fc.imag() == 0.0);
      for (int i = 0; i < r.size(); ++i) {
        CHECK(std::abs(rc[i].real() - r[i]) <= 1e-14 * std::max(1.0, std::abs(r[i])));
      }
    }
  }
}

TEST_CASE("complex evaluation respects conjugation") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 4.0);
  for (const auto& p : canonical_zoo()) {
    const auto fam = build_family(p);
    for (int k = 0; k < 30; ++k) {
      const Vec re = interior_sample(fam, rng, 2.0);
      CVec u(fam.dim());
      for (int c = 0; c < u.size(); ++c) u[c] = Complex(re[c], normal(rng));
      Complex f1, f2;
      CVec r1, r2;
      REQUIRE(fam.eval(u, f1, r1));
      REQUIRE(fam.eval(CVec(u.conjugate()), f2, r2));
      CHECK(std::abs(f2 - std::conj(f1)) <= 1e-13 * std::max(1.0, std::abs(f1)));
      CHECK((r2 - r1.conjugate()).norm() <= 1e-13 * std::max(1.0, r1.norm()));
    }
  }
}

TEST_CASE("Heston R_1 at a far imaginary point is the quadratic polynomial") {
  const double kappa = 1.5, theta = 0.04, sigma = 0.5, rho = -0.7, r = 0.02;
  const auto fam = build_family(models::heston(kappa, theta, sigma, rho, r));
  CVec u(2);
  u << Complex(-0.5, 10.0), Complex(0.3, -2.0);
  Complex f;
  CVec rv;
  REQUIRE(fam.eval(u, f, rv));
  const Complex v = u[0], s = u[1];
  const Complex r1 = 0.5 * sigma * sigma * v * v + rho * sigma * v * s + 0.5 * s * s - kappa * v - 0.5 * s;
  CHECK(std::abs(rv[0] - r1) <= 1e-13 * std::abs(r1));
  CHECK(rv[1] == Complex(0.0));
  CHECK(std::abs(f - (kappa * theta * v + r * s)) <= 1e-14);
}

TEST_CASE("complex evaluation outside the tail domain is a domain error") {
  const auto f = jump_only(JumpMeasure::one_sided_exponential(0, 3.0, 1.0));
  CVec u(1);
  u[0] = Complex(3.0, 1.0);
  CHECK_THROWS_AS(eval_complex(f, u), DomainError);
  u[0] = Complex(2.5, 1.0);
  CHECK_NOTHROW(eval_complex(f, u));
}

TEST_CASE("a model without jumps has the whole space as its domain") {
  for (const auto& p : {models::heston(1.5, 0.04, 0.5, -0.7), models::vasicek(0.5, 0.03, 0.01)}) {
    const auto fam = build_family(p);
    CHECK(fam.domain().is_full_space());
    CHECK(domain_classify(fam, Vec::Constant(fam.dim(), 1e6)) == DomainClass::Interior);
  }
}

TEST_CASE("F is midpoint convex on sampled segments") {
  std::mt19937_64 rng(17);
  for (const auto& p : canonical_zoo()) {
    const auto fam = build_family(p);
    for (int k = 0; k < 1000; ++k) {
      const Vec y = interior_sample(fam, rng, 3.0);
      const Vec z = interior_sample(fam, rng, 3.0);
      const double fy = eval_real(fam.F(), y), fz = eval_real(fam.F(), z);
      const double mid = eval_real(fam.F(), Vec(0.5 * (y + z)));
      CHECK(mid <= 0.5 * (fy + fz) + 1e-12 * std::max({1.0, std::abs(fy), std::abs(fz)}));
    }
  }
}

TEST_CASE("values approaching a finite boundary point converge to it from below") {
  // Tail e^{-3s} / (1 + s)^8: the exponential moment at y = 3 is finite.
  NumericDensity nd;
  nd.coordinate = 0;
  nd.lower = 0.0;
  nd.upper = kInf;
  nd.density = [](double s) { return std::exp(-3.0 * s) / std::pow(1.0 + s, 8.0); };
  nd.tail_certificate = [](double s) {
    return s < 3.0 ? DomainClass::Interior : (s == 3.0 ? DomainClass::Boundary : DomainClass::Outside);
  };
  const auto f = jump_only(JumpMeasure{nd});
  const double at_boundary = eval_real(f, v1(3.0));
  REQUIRE(std::isfinite(at_boundary));
  double prev = -kInf;
  for (double gap : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    const double v = eval_real(f, v1(3.0 - gap));
    CAPTURE(gap);
    CHECK(v >= prev);
    CHECK(v <= at_boundary + 1e-9);
    prev = v;
  }
  CHECK(prev == doctest::Approx(at_boundary).epsilon(1e-3));
  CHECK(eval_real(f, v1(3.5)) == kInf);
}

TEST_CASE("growth estimate holds on seeded samples for every canonical model") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal;
  for (const auto& p : canonical_zoo()) {
    const auto fam = build_family(p);
    const int m = p.space.canonical_space().m;
    int checked = 0;
    for (int k = 0; k < 2000; ++k) {
      const Vec re = interior_sample(fam, rng, 2.5);
      const double spread = std::pow(10.0, 2.0 * normal(rng) / 3.0);
      CVec u(fam.dim());
      for (int c = 0; c < u.size(); ++c) u[c] = Complex(re[c], spread * normal(rng));
      const auto g = growth_bound(fam, u);
      CHECK(g.lhs <= g.rhs);
      ++checked;
    }
    CHECK(checked == 2000);
    if (m == 0) {
      const auto g = growth_bound(fam, CVec(CVec::Constant(fam.dim(), Complex(0.1, 3.0))));
      CHECK(g.lhs == 0.0);
    }
  }
}

TEST_CASE("growth estimate examples") {
  const auto fam = build_family(models::heston(1.5, 0.04, 0.5, -0.7));
  CVec real_j(2);
  real_j << Complex(0.0), Complex(1.5);
  const auto g0 = growth_bound(fam, real_j);
  CHECK(g0.lhs == 0.0);
  CHECK(g0.rhs >= 0.0);
  CVec u(2);
  u << Complex(1.0, 5.0), Complex(0.0, 2.0);
  const auto g = growth_bound(fam, u);
  CHECK(g.lhs <= g.rhs);
  CHECK_THROWS_AS(growth_bound(build_family(models::wishart(2)), CVec::Zero(4)), UnsupportedError);
}

TEST_CASE("growth function is non-negative and convex") {
  std::mt19937_64 rng(29);
  for (const auto& p : canonical_zoo()) {
    const auto fam = build_family(p);
    for (int k = 0; k < 200; ++k) {
      const Vec y = interior_sample(fam, rng, 2.5);
      const Vec z = interior_sample(fam, rng, 2.5);
      const double gy = growth_function(p, y), gz = growth_function(p, z);
      CHECK(gy >= 0.0);
      CHECK(growth_function(p, Vec(0.5 * (y + z))) <= 0.5 * (gy + gz) + 1e-12 * std::max({1.0, gy, gz}));
    }
  }
}

TEST_CASE("complex scalar inequality: closed form against quadrature") {
  auto quadrature = [](Complex z) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return (1.0 - t) * (z * std::exp(t * z)).real(); }, 0.0, 1.0, 15, 1e-12);
  };
  const auto zero = verify_complex_inequality(Complex(0.0));
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  for (double p : {1e-3, 0.5, 2.0, 5.0}) {
    const auto b = verify_complex_inequality(Complex(p));
    CHECK(b.lhs == doctest::Approx(quadrature(Complex(p))).epsilon(1e-10));
    CHECK(b.lhs < b.rhs);
  }
  const auto neg = verify_complex_inequality(Complex(-1.0, 7.0));
  CHECK(neg.rhs == 0.0);
  CHECK(neg.lhs <= 0.0);
  CHECK(neg.lhs == doctest::Approx(quadrature(Complex(-1.0, 7.0))).epsilon(1e-10));

  for (double re = -5.0; re <= 5.0; re += 0.5) {
    for (double im = -20.0; im <= 20.0; im += 1.25) {
      const Complex z(re, im);
      const auto b = verify_complex_inequality(z);
      CAPTURE(z);
      CHECK(b.lhs <= b.rhs);
      CHECK(std::abs(b.lhs - quadrature(z)) <= 1e-9 * std::max(1.0, std::abs(b.lhs)));
    }
  }
}
