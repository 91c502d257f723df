#include "doctest.h"

#include "affine/levy_functionals.hpp"
#include "affine/models.hpp"
#include "affine/state_space.hpp"
#include "mutants.hpp"

#include <algorithm>
#include <random>

using namespace affine;

namespace {

std::vector<std::string> ids(const ValidationReport& rep) {
  std::vector<std::string> out;
  for (const auto& v : rep.violations) out.push_back(v.id);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// All coefficients and jump intensities multiplied by c.
AffineParams scaled(AffineParams p, double c) {
  auto& q = p.canonical();
  q.a *= c;
  q.b *= c;
  for (auto& al : q.alpha) al *= c;
  for (auto& be : q.beta) be *= c;
  q.m = q.m.scaled(c);
  for (auto& mu : q.mu) mu = mu.scaled(c);
  return p;
}

JumpMeasure reversed(const JumpMeasure& j) {
  auto pm = std::get<PointMassMixture>(j.variant());
  std::reverse(pm.atoms.begin(), pm.atoms.end());
  return JumpMeasure{pm};
}

}  // namespace

TEST_CASE("built-in models and the mutation bases are admissible") {
  for (const auto& p : {models::cir(1.0, 0.02, 0.2), models::vasicek(0.5, 0.03, 0.01), models::black_scholes(0.2, 0.03),
                        models::heston(1.5, 0.04, 0.5, -0.7, 0.02), models::bates(1.5, 0.04, 0.5, -0.7, 0.02, 0.3, -0.1, 0.15),
                        models::merton(0.2, 0.01, 0.5, -0.05, 0.1), models::pure_jump(1.0, 0.5, 0.8, 3.0),
                        models::two_factor_jump(), models::wishart(2), models::wishart(3, 2.5, 0.3),
                        mutants::canonical_base(), mutants::matrix_base()}) {
    CAPTURE(p.space.describe());
    const auto rep = validate(p);
    CHECK(rep.passed);
    CHECK(rep.violations.empty());
  }
}

TEST_CASE("each canonical mutant is rejected with its clause") {
  const auto list = mutants::canonical_mutants();
  CHECK(list.size() >= 12);
  for (const auto& mu : list) {
    CAPTURE(mu.name);
    const auto rep = validate_canonical(mu.params);
    CHECK_FALSE(rep.passed);
    CHECK(rep.has(mu.expected_id));
  }
}

TEST_CASE("each matrix mutant is rejected with its clause") {
  const auto list = mutants::matrix_mutants();
  CHECK(list.size() >= 4);
  for (const auto& mu : list) {
    CAPTURE(mu.name);
    const auto rep = validate_matrix(mu.params);
    CHECK_FALSE(rep.passed);
    CHECK(rep.has(mu.expected_id));
  }
}

TEST_CASE("sign and support mutants trip only their own clause") {
  // Clauses that are logically independent of the others report alone.
  for (const auto& mu : mutants::canonical_mutants()) {
    CAPTURE(mu.name);
    if (mu.expected_id == "m_small_I_integrable" || mu.expected_id == "mu_small_integrable") {
      // The density is still a Levy measure; only the compensators are undefined.
      CHECK_FALSE(validate(mu.params).has("levy_measure"));
      continue;
    }
    CHECK(ids(validate(mu.params)) == std::vector<std::string>{mu.expected_id});
  }
}

TEST_CASE("CIR with negative constant drift violates b in D") {
  auto p = models::cir(1.0, 0.02, 0.2);
  p.canonical().b[0] = -0.01;
  const auto rep = validate(p);
  CHECK_FALSE(rep.passed);
  REQUIRE(rep.has("b_in_D"));
  CHECK(rep.violations.front().message.find("b in D") != std::string::npos);
}

TEST_CASE("Heston with constant diffusion on the variance violates a_kl = 0 on I") {
  auto p = models::heston(1.5, 0.04, 0.5, -0.7);
  p.canonical().a(0, 0) = 0.01;
  CHECK(validate(p).has("a_I_zero"));
}

TEST_CASE("Wishart drift dominance and the inward-pointing test set") {
  auto p = models::wishart(2, 1.5, 0.5);
  CHECK(validate(p).passed);
  p.matrix().b = 0.5 * Mat::Identity(2, 2);
  CHECK(validate(p).has("b_dominates_alpha"));

  AffineParams degenerate = models::wishart(2);
  degenerate.matrix().alpha = Mat::Zero(2, 2);
  degenerate.matrix().b = Mat::Zero(2, 2);
  degenerate.matrix().B = Mat::Zero(4, 4);
  CHECK(validate(degenerate).passed);

  // B(u) = -u vanishes against every orthogonal rank-one pair.
  degenerate.matrix().B = -Mat::Identity(4, 4);
  const auto rep = validate(degenerate);
  CHECK(rep.passed);
  CHECK(std::abs(rep.inward_margin) < 1e-12);
}

TEST_CASE("matrix cone of size one is redirected to the canonical space") {
  CHECK_THROWS_AS(StateSpace::matrix_cone(1), StructuralError);
  CHECK_THROWS_AS(models::wishart(1), StructuralError);
}

TEST_CASE("complex transform assumption") {
  CHECK(check_complex_assumption(models::heston(1.5, 0.04, 0.5, -0.7)));
  auto w = models::wishart(2);
  CHECK(check_complex_assumption(w));
  w.matrix().alpha = Mat::Zero(2, 2);
  CHECK(check_complex_assumption(w));
  w.matrix().alpha << 1.0, 0.0, 0.0, 0.0;
  CHECK_FALSE(check_complex_assumption(w));
}

TEST_CASE("state-space membership") {
  const auto cs = StateSpace::canonical(1, 1);
  Vec x(2);
  x << 0.0, -3.0;
  CHECK(cs.contains(x));
  x[0] = -1e-12;
  CHECK_FALSE(cs.contains(x));

  const auto ms = StateSpace::matrix_cone(2);
  Mat y(2, 2);
  y << 1.0, 1.0, 1.0, 1.0;
  CHECK(ms.contains(y.reshaped()));
  y(0, 1) = y(1, 0) = 1.1;
  CHECK_FALSE(ms.contains(y.reshaped()));
  y << 1.0, 0.5, 0.0, 1.0;
  CHECK_FALSE(ms.contains(y.reshaped()));
}

TEST_CASE("permuting jump atoms does not change the report") {
  auto base = mutants::canonical_base();
  auto perm = base;
  perm.canonical().m = reversed(base.canonical().m);
  perm.canonical().mu[0] = reversed(base.canonical().mu[0]);
  CHECK(validate(perm).passed == validate(base).passed);

  for (const auto& mu : mutants::canonical_mutants()) {
    if (!std::holds_alternative<PointMassMixture>(mu.params.canonical().m.variant())) continue;
    auto p = mu.params;
    p.canonical().m = reversed(p.canonical().m);
    CAPTURE(mu.name);
    CHECK(ids(validate(p)) == ids(validate(mu.params)));
  }
}

TEST_CASE("admissibility is invariant under positive scaling") {
  for (double c : {1e-3, 0.1, 2.0, 7.0, 1e3}) {
    CAPTURE(c);
    for (const auto& p : {mutants::canonical_base(), models::heston(1.5, 0.04, 0.5, -0.7),
                          models::pure_jump(1.0, 0.5, 0.8, 3.0)}) {
      CHECK(validate(scaled(p, c)).passed);
    }
    for (const auto& mu : mutants::canonical_mutants()) {
      if (!std::holds_alternative<PointMassMixture>(mu.params.canonical().m.variant())) continue;
      CAPTURE(mu.name);
      CHECK(validate(scaled(mu.params, c)).has(mu.expected_id));
    }
  }
}

TEST_CASE("embed_discounting appends a deterministic integrator coordinate") {
  const auto cir = models::cir(1.0, 0.02, 0.2);
  const auto e = embed_discounting(cir, 0.0, Vec::Constant(1, 1.0));
  CHECK(e.space == StateSpace::canonical(1, 1));
  const auto& q = e.canonical();
  CHECK(q.beta[0][0] == -1.0);
  CHECK(q.beta[0][1] == 1.0);
  CHECK(q.b[1] == 0.0);
  CHECK(validate(e).passed);

  const auto zero = embed_discounting(cir, 0.0, Vec::Zero(1));
  CHECK(zero.canonical().b[1] == 0.0);
  CHECK(zero.canonical().beta[0][1] == 0.0);
  CHECK(zero.canonical().beta[1].isZero());

  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  const auto base = models::two_factor_jump();
  for (int trial = 0; trial < 20; ++trial) {
    Vec lambda(3);
    for (int k = 0; k < 3; ++k) lambda[k] = normal(rng);
    const double l = normal(rng);
    const auto ext = embed_discounting(base, l, lambda);
    const auto& c = ext.canonical();
    const int last = 3;
    CHECK(validate(ext).passed);
    CHECK(c.b[last] == l);
    CHECK(c.a.row(last).isZero());
    CHECK(c.a.col(last).isZero());
    CHECK(c.alpha[last].isZero());
    CHECK(c.beta[last].isZero());
    CHECK(c.mu[last].is_zero());
    for (int i = 0; i < 3; ++i) {
      CHECK(c.beta[i][last] == lambda[i]);
      CHECK(c.alpha[i].row(last).isZero());
    }
    // Jumps never move the integrator.
    for (const auto& atom : std::get<PointMassMixture>(c.m.variant()).atoms) CHECK(atom.location[last] == 0.0);
  }
  CHECK_THROWS_AS(embed_discounting(models::wishart(2), 0.0, Vec::Zero(4)), UnsupportedError);
}
