#include <doctest.h>

#include "fmadj/objectives.hpp"
#include "support.hpp"

using namespace fmadj;
using fmadj::testing::Gen;

namespace {

ObjectiveTerm term(TermKind k, std::vector<int> steps, double w = 1.0) {
  ObjectiveTerm t;
  t.kind = k;
  t.steps = std::move(steps);
  t.weight = w;
  return t;
}

}  // namespace

TEST_CASE("hand-computed losses on a 4x4 grid") {
  const GridSpec g{4, 4, 0.5, {}};
  ScalarField xi(g, 1.0), target(g, 0.0);
  target(2, 1) = 3.0;  // diff: 15 cells of 1, one of -2
  ObjectiveTerm k = term(TermKind::KeyframePassive, {5}, 2.0);
  k.target_xi = std::make_shared<const ScalarField>(target);
  CHECK(eval_loss(k, VectorField(g), &xi) == doctest::Approx(2.0 * (15 + 4) * 0.25));

  VectorField u(g);
  u.u(1, 1) = 2.0;
  u.v(3, 2) = -1.0;
  CHECK(eval_loss(term(TermKind::VelocitySelf, {0}, 3.0), u, nullptr) == doctest::Approx(1.5 * 5 * 0.25));

  ObjectiveTerm tv = term(TermKind::TerminalVelocity, {0}, 1.0);
  VectorField ut(g);
  ut.u(1, 1) = 1.0;
  tv.target_u = std::make_shared<const VectorField>(ut);
  CHECK(eval_loss(tv, u, nullptr) == doctest::Approx(0.5 * 2 * 0.25));
  const VectorField s = source_dJdu(tv, u);
  CHECK(s.u(1, 1) == 1.0);
  CHECK(s.v(3, 2) == -1.0);
}

TEST_CASE("source densities match per-sample finite differences") {
  Gen gen(31);
  const GridSpec g{6, 5, 0.2, {0.1, 0.0}};
  const double h = 1e-3;

  ObjectiveTerm k = term(TermKind::KeyframePassive, {0}, 0.7);
  k.target_xi = std::make_shared<const ScalarField>(gen.scalar(g));
  ScalarField xi = gen.scalar(g);
  const ScalarField sx = source_dJdxi(k, xi);
  const VectorField zero(g);
  for (std::size_t c = 0; c < xi.values.size(); ++c) {
    ScalarField p = xi, m = xi;
    p.values[c] += h;
    m.values[c] -= h;
    const double fd = (eval_loss(k, zero, &p) - eval_loss(k, zero, &m)) / (2 * h);
    CHECK(sx.values[c] * g.dx * g.dx == doctest::Approx(fd).epsilon(1e-8));
  }

  ObjectiveTerm tv = term(TermKind::TerminalVelocity, {0}, 1.3);
  tv.target_u = std::make_shared<const VectorField>(gen.vector(g));
  const VectorField u = gen.vector(g);
  const VectorField su = source_dJdu(tv, u);
  for (std::size_t c = 0; c < u.u.size(); ++c) {
    VectorField p = u, m = u;
    p.u[c] += h;
    m.u[c] -= h;
    const double fd = (eval_loss(tv, p, nullptr) - eval_loss(tv, m, nullptr)) / (2 * h);
    CHECK(su.u[c] * g.dx * g.dx == doctest::Approx(fd).epsilon(1e-8).scale(1e-12));
  }
}

TEST_CASE("inactive steps contribute nothing") {
  const GridSpec g = fmadj::testing::unit_grid(8);
  ObjectiveSpec spec;
  spec.terms.push_back(term(TermKind::VelocitySelf, {3, 7}));
  const VectorField u(g, 1.0);
  CHECK(spec.active_at(3));
  CHECK_FALSE(spec.active_at(4));
  CHECK(eval_loss_at(spec, 4, u, nullptr) == 0.0);
  CHECK_FALSE(total_dJdu(spec, 4, u).has_value());
  CHECK(total_dJdu(spec, 7, u).has_value());
  CHECK_FALSE(total_dJdxi(spec, 7, ScalarField(g)).has_value());
}

TEST_CASE("terms sum and passive terms stay out of the velocity source") {
  const GridSpec g = fmadj::testing::unit_grid(8);
  ObjectiveSpec spec;
  spec.terms.push_back(term(TermKind::VelocitySelf, {2}, 1.0));
  spec.terms.push_back(term(TermKind::VelocitySelf, {2}, 2.0));
  ObjectiveTerm k = term(TermKind::KeyframePassive, {2});
  k.target_xi = std::make_shared<const ScalarField>(g);
  spec.terms.push_back(k);
  const VectorField u(g, 1.0);
  const ScalarField xi(g, 0.5);
  const auto s = total_dJdu(spec, 2, u);
  REQUIRE(s);
  CHECK(s->u(3, 3) == doctest::Approx(3.0));
  CHECK(eval_loss_at(spec, 2, u, &xi) ==
        doctest::Approx(1.5 * inner(u, u) + inner(xi, xi)));
  const auto sx = total_dJdxi(spec, 2, xi);
  REQUIRE(sx);
  CHECK((*sx)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("objective validation") {
  const GridSpec g = fmadj::testing::unit_grid(8);
  ObjectiveSpec spec;
  spec.terms.push_back(term(TermKind::KeyframePassive, {2}));
  CHECK_THROWS_AS(spec.validate(g, 10, false), std::invalid_argument);
  CHECK_THROWS_AS(spec.validate(g, 10, true), std::invalid_argument);
  spec.terms[0].target_xi = std::make_shared<const ScalarField>(fmadj::testing::unit_grid(16));
  CHECK_THROWS_AS(spec.validate(g, 10, true), ShapeMismatch);
  spec.terms[0].target_xi = std::make_shared<const ScalarField>(g);
  CHECK_NOTHROW(spec.validate(g, 10, true));
  spec.terms[0].steps = {11};
  CHECK_THROWS(spec.validate(g, 10, true));
  CHECK(term_kind_from_string(to_string(TermKind::ViscosityTarget)) == TermKind::ViscosityTarget);
  CHECK_THROWS(term_kind_from_string("nope"));
}
