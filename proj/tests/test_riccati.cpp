#include "doctest.h"

#include "affine/models.hpp"
#include "affine/riccati.hpp"
#include "oracles.hpp"

#include <random>

using namespace affine;
using doctest::Approx;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("dense output reproduces grid values and tracks a known solution between them") {
  // y' = y^2 has y(t) = y0 / (1 - y0 t).
  std::function<bool(const Vec&, Vec&)> field = [](const Vec& z, Vec& dz) {
    dz = z.cwiseProduct(z);
    return true;
  };
  detail::IntegratorOptions opt;
  opt.rel_tol = 1e-6;
  opt.abs_tol = 1e-9;
  const auto res = detail::dopri5<double>(field, Vec::Constant(1, 0.5), 1.5, opt);
  REQUIRE(res.reason == detail::StopReason::Completed);
  double worst = 0.0;
  for (const auto& st : res.steps) {
    CHECK(st.at(st.t0)[0] == Approx(st.rcont(0, 0)).epsilon(1e-15));
    for (double th : {0.25, 0.5, 0.75}) {
      const double t = st.t0 + th * st.h;
      worst = std::max(worst, rel(st.at(t)[0], 0.5 / (1.0 - 0.5 * t)));
    }
  }
  // Interpolant order 4: error comparable to the step tolerance.
  CHECK(worst < 1e-5);
}

TEST_CASE("dense output converges at fourth order in the step size") {
  // One step of fixed length h on y' = -y; the interpolation error at theta=1/2 scales like h^5.
  std::function<bool(const Vec&, Vec&)> field = [](const Vec& z, Vec& dz) {
    dz = -z;
    return true;
  };
  auto mid_error = [&](double h) {
    detail::IntegratorOptions opt;
    opt.rel_tol = 1e3;
    opt.abs_tol = 1e3;
    opt.max_step = h;
    const auto res = detail::dopri5<double>(field, Vec::Constant(1, 1.0), h, opt);
    return std::abs(res.steps.front().at(0.5 * h)[0] - std::exp(-0.5 * h));
  };
  const double e1 = mid_error(0.4);
  const double e2 = mid_error(0.2);
  CHECK(std::log2(e1 / e2) > 4.5);
}

TEST_CASE("stationary point y = 0 stays at zero on every built-in model") {
  for (const auto& params : {models::cir(1, 0.02, 0.2), models::vasicek(0.5, 0.03, 0.01), models::heston(1.5, 0.04, 0.5, -0.7),
                             models::bates(1.5, 0.04, 0.5, -0.7, 0.01, 0.3, -0.1, 0.15), models::pure_jump(1.0, 0.5, 0.8, 3.0),
                             models::two_factor_jump(), models::wishart()}) {
    const auto fam = build_family(params);
    const auto tr = solve_extended(fam, Vec::Zero(fam.dim()), 2.0);
    CHECK(tr.completed());
    CHECK(tr.p_end() == 0.0);
    CHECK(tr.q_end().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("CIR extended solution matches the reciprocal closed form") {
  const double kappa = 1.0, theta = 0.02, sigma = 0.2;
  const auto fam = build_family(models::cir(kappa, theta, sigma));
  for (double y : {-5.0, -0.5, 3.0, 40.0}) {
    const auto tr = solve_extended(fam, v1(y), 1.0);
    REQUIRE(tr.completed());
    CHECK(tr.certificate == Certificate::Diffusion);
    const auto ref = oracle::cir_exponent(kappa, theta, sigma, y, 1.0);
    CHECK(rel(tr.q_end()[0], ref.q) < 1e-9);
    CHECK(std::abs(tr.p_end() - ref.p) < 1e-9 * (1.0 + std::abs(ref.p)));
  }
}

TEST_CASE("CIR blow-up time matches the closed form") {
  const double kappa = 1.0, sigma = 0.2;
  const auto fam = build_family(models::cir(kappa, 0.02, sigma));
  const double y = 60.0;
  const double t_star = oracle::cir_blowup_time(kappa, sigma, y);
  CHECK(t_star == Approx(std::log(6.0)).epsilon(1e-14));
  const auto tr = solve_extended(fam, v1(y), 3.0);
  const auto* b = std::get_if<BlowUp>(&tr.status);
  REQUIRE(b != nullptr);
  CHECK(std::abs(b->t_star - t_star) < 1e-6);
  CHECK(std::abs(b->t_star - t_star) <= b->bracket);
  CHECK(solve_extended(fam, v1(y), b->t_star * (1 - 1e-3)).completed());

  const auto verdict = explosion_time(fam, v1(y), 10.0, 1e-8);
  const auto* ft = std::get_if<FiniteTime>(&verdict);
  REQUIRE(ft != nullptr);
  CHECK(rel(ft->t_plus, t_star) < 1e-6);
  CHECK(std::holds_alternative<ExceedsHorizon>(explosion_time(fam, v1(40.0), 10.0, 1e-8)));
}

TEST_CASE("Levy family keeps q constant and p linear") {
  const auto params = models::merton(0.2, 0.01, 0.5, -0.1, 0.2);
  const auto fam = build_family(params);
  const Vec y = v1(1.7);
  const auto tr = solve_extended(fam, y, 3.0);
  REQUIRE(tr.completed());
  const double F = eval_real(fam.F(), y);
  CHECK(tr.certificate == Certificate::FullDomain);
  CHECK(tr.q_end()[0] == Approx(1.7).epsilon(1e-14));
  CHECK(tr.p_end() == Approx(3.0 * F).epsilon(1e-12));
  CHECK(std::holds_alternative<ExceedsHorizon>(explosion_time(fam, y, 50.0, 1e-6)));
}

TEST_CASE("initial value outside the domain is a domain error") {
  const auto fam = build_family(models::pure_jump(1.0, 0.5, 0.8, 3.0));
  CHECK_THROWS_AS(solve_extended(fam, v1(3.5), 1.0), DomainError);
  CHECK_THROWS_AS(solve_complex(fam, CVec::Constant(1, Complex(3.0, 1.0)), 1.0), DomainError);
  const auto v = explosion_time(fam, v1(3.5), 1.0, 1e-6);
  REQUIRE(std::holds_alternative<FiniteTime>(v));
  CHECK(std::get<FiniteTime>(v).t_plus == 0.0);
}

TEST_CASE("pure-jump model: solutions run into the open boundary in finite time") {
  const auto fam = build_family(models::pure_jump(0.2, 0.5, 2.0, 3.0));
  const auto tr = solve_extended(fam, v1(2.5), 20.0);
  CHECK(std::holds_alternative<DomainExit>(tr.status));
  CHECK(tr.certificate == Certificate::OpenDomain);
  const auto v = explosion_time(fam, v1(2.5), 20.0, 1e-6);
  REQUIRE(std::holds_alternative<FiniteTime>(v));
  const double tp = std::get<FiniteTime>(v).t_plus;
  CHECK(tp > 0.0);
  CHECK(solve_extended(fam, v1(2.5), tp * (1 - 1e-3)).completed());
}

TEST_CASE("blow-up driven by exponential jump terms is detected below the norm threshold") {
  // The field grows like e^{<xi, q>}, so the step collapses while ||q|| is still moderate.
  const auto fam = build_family(models::two_factor_jump());
  Vec y(3);
  y << 1.39, 1.69, 1.48;
  const auto tr = solve_extended(fam, y, 1.5);
  REQUIRE(std::holds_alternative<BlowUp>(tr.status));
  CHECK(tr.q_end().norm() < SolveOptions{}.blowup_norm_threshold);
  const auto v = explosion_time(fam, y, 2.0, 1e-8);
  REQUIRE(std::holds_alternative<FiniteTime>(v));
  const double tp = std::get<FiniteTime>(v).t_plus;
  CHECK(solve_extended(fam, y, tp * (1 - 1e-6)).completed());
  CHECK_FALSE(solve_extended(fam, y, tp * (1 + 1e-6)).completed());
}

TEST_CASE("complex solve with zero imaginary part reproduces the real solve") {
  const auto fam = build_family(models::heston(1.5, 0.04, 0.5, -0.7));
  const Vec y = v2(0.3, 1.2);
  const auto tr = solve_extended(fam, y, 2.0);
  const auto tc = solve_complex(fam, y.cast<Complex>(), 2.0);
  REQUIRE(tr.completed());
  REQUIRE(tc.completed());
  REQUIRE(tr.times.size() == tc.times.size());
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double scale = 1.0 + tr.q[k].cwiseAbs().maxCoeff();
    CHECK((tc.q[k] - tr.q[k].cast<Complex>()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

TEST_CASE("Heston complex solve matches the closed-form exponent") {
  const double kappa = 1.5, theta = 0.04, sigma = 0.5, rho = -0.7;
  const auto fam = build_family(models::heston(kappa, theta, sigma, rho));
  for (double z : {0.5, 3.0, 10.0}) {
    const Complex ux(0.0, z);
    CVec u(2);
    u << 0.0, ux;
    const auto tc = solve_complex(fam, u, 1.0);
    REQUIRE(tc.completed());
    // The CF ratio between v0 = 1 and v0 = 0 isolates exp(psi_v).
    const Complex ratio = oracle::heston_cf(kappa, theta, sigma, rho, 0.0, 1.0, 0.0, ux, 1.0) /
                          oracle::heston_cf(kappa, theta, sigma, rho, 0.0, 0.0, 0.0, ux, 1.0);
    CHECK(std::abs(std::exp(tc.q_end()[0]) - ratio) < 1e-8 * std::abs(ratio));
    CHECK(std::abs(tc.q_end()[1] - ux) < 1e-14);
  }
}

TEST_CASE("complex solve respects conjugation") {
  const auto fam = build_family(models::bates(1.5, 0.04, 0.5, -0.7, 0.01, 0.3, -0.1, 0.15));
  CVec u(2);
  u << Complex(0.2, 1.5), Complex(0.5, -4.0);
  const auto a = solve_complex(fam, u, 1.5);
  const auto b = solve_complex(fam, u.conjugate(), 1.5);
  REQUIRE(a.completed());
  REQUIRE(b.completed());
  CHECK(std::abs(a.p_end() - std::conj(b.p_end())) < 1e-12);
  CHECK((a.q_end() - b.q_end().conjugate()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("semiflow residual is small on CIR, trivial at the endpoints") {
  const auto fam = build_family(models::cir(1.0, 0.02, 0.2));
  const auto tr = solve_extended(fam, v1(-5.0), 2.0);
  CHECK(verify_semiflow(fam, tr, {0.0}) == 0.0);
  CHECK(verify_semiflow(fam, tr, {2.0}) == 0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  std::vector<double> splits;
  for (int k = 0; k < 10; ++k) splits.push_back(U(rng));
  CHECK(verify_semiflow(fam, tr, splits) < 1e-8);
}

TEST_CASE("tightening the tolerance moves the result by less than ten error estimates") {
  const auto fam = build_family(models::heston(1.5, 0.04, 0.5, -0.7));
  const Vec y = v2(0.5, 1.1);
  SolveOptions coarse;
  coarse.rel_tol = 1e-8;
  SolveOptions fine = coarse;
  fine.rel_tol = 0.5e-8;
  const auto a = solve_extended(fam, y, 2.0, coarse);
  const auto b = solve_extended(fam, y, 2.0, fine);
  const double diff = std::max(std::abs(a.p_end() - b.p_end()), (a.q_end() - b.q_end()).cwiseAbs().maxCoeff());
  CHECK(diff < 10.0 * a.error_estimate);
}

TEST_CASE("comparison margin vanishes for real u and stays non-negative otherwise") {
  const auto fam = build_family(models::heston(1.5, 0.04, 0.5, -0.7));
  CVec u(2);
  u << Complex(0.5, 0.0), Complex(1.0, 0.0);
  CHECK(std::abs(comparison_check(fam, u, 1.0)) < 1e-12);
  u << Complex(0.5, 3.0), Complex(1.0, 1.0);
  CHECK(comparison_check(fam, u, 1.0) >= -1e-9);

  const auto pj = build_family(models::pure_jump(1.0, 0.5, 0.8, 3.0));
  CHECK(comparison_check(pj, CVec::Constant(1, Complex(1.0, 5.0)), 1.0) >= -1e-9);
  CHECK_THROWS_AS(comparison_check(build_family(models::wishart()), CVec::Zero(4), 1.0), UnsupportedError);
}

TEST_CASE("fixed-step RK4 agrees with the adaptive solver") {
  const auto fam = build_family(models::heston(1.5, 0.04, 0.5, -0.7));
  const Vec y = v2(0.5, 1.1);
  double p;
  Vec q;
  REQUIRE(solve_fixed_step(fam, y, 1.0, 4000, p, q));
  const auto tr = solve_extended(fam, y, 1.0);
  CHECK(std::abs(p - tr.p_end()) < 1e-10);
  CHECK((q - tr.q_end()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("raw family: user-supplied field on a custom domain") {
  // F(y) = y^2/2, R(y) = y^2 on y < 1 (callback domain): q = y / (1 - y t).
  auto real = [](const Vec& y, double& f, Vec& r) {
    f = 0.5 * y[0] * y[0];
    r = Vec::Constant(1, y[0] * y[0]);
    return true;
  };
  auto fam = FunctionalFamily::raw(
      1, real, DomainY::callback([](const Vec& y) { return y[0] < 1.0 ? DomainClass::Interior : DomainClass::Outside; },
                                 "y < 1 (callback)"));
  const auto tr = solve_extended(fam, v1(0.5), 0.5);
  REQUIRE(tr.completed());
  CHECK(tr.q_end()[0] == Approx(0.5 / (1.0 - 0.25)).epsilon(1e-9));
  CHECK(tr.certificate == Certificate::Unknown);
  CHECK_THROWS_AS(solve_complex(fam, CVec::Constant(1, Complex(0.1, 0.1)), 1.0), UnsupportedError);
}
