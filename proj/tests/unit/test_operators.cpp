#include <doctest.h>

#include "fmadj/poisson.hpp"
#include "fmadj/reference.hpp"
#include "support.hpp"

using namespace fmadj;
using fmadj::testing::Gen;

TEST_CASE("laplacian of constant and linear fields vanishes inside") {
  const GridSpec g = fmadj::testing::unit_grid(16);
  const VectorField c(g, 3.0);
  const VectorField lc = laplacian(c);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) CHECK(std::abs(lc.u(i, j)) < 1e-9);
  const VectorField lin = sample_vector(g, [](Vec2 p) { return Vec2{2 * p.x - p.y, p.x + 3 * p.y}; });
  const VectorField ll = laplacian(lin);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx; ++i) CHECK(std::abs(ll.u(i, j)) < 1e-9);
}

TEST_CASE("laplacian of sin(x) approaches -sin(x) at second order") {
  const GridSpec g = fmadj::testing::unit_grid(128);
  const VectorField f = sample_vector(g, [](Vec2 p) { return Vec2{std::sin(p.x), std::sin(p.y)}; });
  const VectorField l = laplacian(f);
  double err = 0.0;
  for (int j = 2; j < g.ny - 2; ++j)
    for (int i = 2; i < g.nx - 1; ++i) err = std::max(err, std::abs(l.u(i, j) + std::sin(g.u_face(i, j).x)));
  CHECK(err < g.dx * g.dx);
}

TEST_CASE("divergence of a constant field is zero and of gradient(p) is the pressure Laplacian") {
  Gen gen(1);
  const GridSpec g = fmadj::testing::unit_grid(16);
  VectorField c(g, 1.5);
  zero_boundary_faces(c);
  // Faces next to walls feel the wall; interior cells see a constant field.
  const ScalarField dc = divergence(c);
  for (int j = 1; j < 15; ++j)
    for (int i = 1; i < 15; ++i) CHECK(std::abs(dc(i, j)) < 1e-12);

  const ScalarField p = gen.scalar(g);
  const ScalarField dg = divergence(gradient(p));
  const ScalarField ap = poisson_apply(p, BoundarySpec{});
  CHECK(dg == ap);  // bitwise

  // Independent 5-point Neumann stencil.
  const double ih2 = 1.0 / (g.dx * g.dx);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) {
      double s = 0.0;
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (auto& n : nb)
        if (n[0] >= 0 && n[0] < 16 && n[1] >= 0 && n[1] < 16) s += (p(n[0], n[1]) - p(i, j)) * ih2;
      CHECK(dg(i, j) == doctest::Approx(s).epsilon(1e-12));
    }
  CHECK(l2_norm(gradient(ScalarField(g))) == 0.0);
}

TEST_CASE("divergence and gradient are negative adjoints on no-through fields") {
  Gen gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const GridSpec g{gen.integer(4, 20), gen.integer(4, 20), gen.uniform(0.01, 1.0), {gen.uniform(), gen.uniform()}};
    const VectorField u = gen.vector(g, true);
    const ScalarField p = gen.scalar(g);
    CHECK(inner(divergence(u), p) == doctest::Approx(-inner(u, gradient(p))).epsilon(1e-11));
  }
}

TEST_CASE("operators match the serial reference implementations") {
  Gen gen(4);
  const GridSpec g{14, 11, 0.07, {0.1, 0.2}};
  const VectorField u = gen.vector(g, true);
  CHECK(fmadj::testing::max_abs_diff(laplacian(u), reference::laplacian(u)) < 1e-9);
  CHECK(fmadj::testing::max_abs_diff(divergence(u).values, reference::divergence(u).values) < 1e-10);
}

TEST_CASE("curl of a rigid rotation is twice the rate") {
  const GridSpec g = fmadj::testing::unit_grid(32);
  const ScalarField w = curl(fmadj::testing::rotation(g, 1.5));
  for (int j = 2; j < 30; ++j)
    for (int i = 2; i < 30; ++i) CHECK(w(i, j) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("relative divergence of a zero field is zero") {
  CHECK(relative_divergence(VectorField(fmadj::testing::unit_grid(8))) == 0.0);
}
