#include <doctest.h>

#include <numeric>

#include "fmadj/optimize.hpp"
#include "support.hpp"

using namespace fmadj;
using fmadj::testing::Gen;

namespace {

SimConfig sim(int n, double dt, int steps, int n_long, int n_short = 2) {
  SimConfig c;
  c.grid = fmadj::testing::unit_grid(n);
  c.dt = dt;
  c.n_steps = steps;
  c.n_long = n_long;
  c.n_short = n_short;
  c.poisson.tolerance = 1e-10;
  return c;
}

std::vector<double> central_differences(const Problem& p, double h) {
  const ParamLayout layout(p);
  const std::vector<double> theta = layout.pack(p);
  std::vector<double> out;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    std::vector<double> tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    out.push_back((evaluate_loss(p, layout, tp) - evaluate_loss(p, layout, tm)) / (2 * h));
  }
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  const double ab = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  const double aa = std::inner_product(a.begin(), a.end(), a.begin(), 0.0);
  const double bb = std::inner_product(b.begin(), b.end(), b.begin(), 0.0);
  return ab / std::sqrt(aa * bb);
}

// Circulation along the rectangle through cell centers (lo, lo) and (hi, hi);
// the MAC faces sit exactly on its edges.
double circulation(const VectorField& u, int lo, int hi) {
  double c = 0.0;
  for (int k = lo + 1; k <= hi; ++k) c += u.u(k, lo) + u.v(hi, k) - u.u(k, hi) - u.v(lo, k);
  return c * u.grid.dx;
}

}  // namespace

TEST_CASE("wind force fields are Gaussian profiles held per window") {
  const GridSpec g = fmadj::testing::unit_grid(16);
  GaussianWindSet w;
  w.sharpness = 30.0;
  w.windows = 2;
  w.steps_per_window = 5;
  w.centers = {{0.3, 0.4}, {0.7, 0.6}};
  w.strengths = {{1.0, 0.0}, {0.0, -2.0}, {0.5, 0.5}, {0.0, 0.0}};
  CHECK(w.window_of(0) == 0);
  CHECK(w.window_of(4) == 0);
  CHECK(w.window_of(5) == 1);
  CHECK_NOTHROW(w.validate(g, 10));
  CHECK_THROWS(w.validate(g, 11));
  const VectorField f0 = wind_force_field(w, 2, g);
  const VectorField f1 = wind_force_field(w, 7, g);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 x = g.v_face(i, j);
      const Vec2 d0 = x - w.centers[0], d1 = x - w.centers[1];
      CHECK(f0.v(i, j) == doctest::Approx(-2.0 * std::exp(-30.0 * d1.dot(d1))).epsilon(1e-14));
      CHECK(f1.v(i, j) == doctest::Approx(0.5 * std::exp(-30.0 * d0.dot(d0))).epsilon(1e-14));
    }
  const Vec2 x = g.u_face(5, 6);
  const Vec2 d = x - w.centers[0];
  CHECK(f0.u(5, 6) == doctest::Approx(std::exp(-30.0 * d.dot(d))).epsilon(1e-14));
  GaussianWindSet outside = w;
  outside.centers[1] = {1.5, 0.5};
  CHECK_THROWS(outside.validate(g, 10));
}

TEST_CASE("wind gradient agrees with finite differences") {
  Problem p;
  p.sim = sim(16, 0.02, 10, 10);
  GaussianWindSet w;
  w.sharpness = 20.0;
  w.windows = 2;
  w.steps_per_window = 5;
  w.centers = {{0.35, 0.5}, {0.65, 0.45}};
  w.strengths = {{2.0, 1.0}, {-1.0, 2.0}, {0.5, -1.5}, {1.0, 1.0}};
  p.wind = w;
  p.optimize_wind_centers = true;
  p.init_u = VectorField(p.sim.grid);
  p.objective.terms.push_back({TermKind::VelocitySelf, {10}, 1.0, nullptr, nullptr});
  const ParamLayout layout(p);
  CHECK(layout.size() == 12);
  const Evaluation ev = evaluate_gradient(p, layout, layout.pack(p));
  const std::vector<double> fd = central_differences(p, 1e-4);
  CHECK(cosine(ev.gradient, fd) >= 0.99);
}

TEST_CASE("blob velocity: symmetry, circulation and linearity") {
  const GridSpec g = fmadj::testing::unit_grid(64);
  const BoundarySpec bc;
  const PoissonConfig pc;
  VortexBlobSet one;
  one.blobs.push_back({{0.5, 0.5}, 50.0, 0.06});
  const VectorField u = blobs_to_initial_velocity(one, g, bc, pc);
  // Rotating the field by 90 degrees about the center maps it to itself.
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) CHECK(u.u(i, j) == doctest::Approx(u.v(g.ny - 1 - j, i)).epsilon(1e-6).scale(1e-8));
  const double expected = 50.0 * M_PI * 0.06 * 0.06;
  CHECK(circulation(u, 8, 55) == doctest::Approx(expected).epsilon(0.02));
  CHECK(circulation(u, 2, 61) == doctest::Approx(expected).epsilon(0.02));

  VortexBlobSet two = one;
  two.blobs.push_back({{0.3, 0.7}, -20.0, 0.08});
  VortexBlobSet other;
  other.blobs.push_back(two.blobs[1]);
  const VectorField sum = blobs_to_initial_velocity(two, g, bc, pc);
  VectorField parts = u + blobs_to_initial_velocity(other, g, bc, pc);
  CHECK(fmadj::testing::max_abs_diff(sum, parts) <= 1e-6 * l2_norm(sum));
  VortexBlobSet doubled = one;
  doubled.blobs[0].strength *= 2.0;
  VectorField d = blobs_to_initial_velocity(doubled, g, bc, pc);
  d.axpy(-2.0, u);
  CHECK(l2_norm(d) <= 1e-6 * l2_norm(u));

  VortexBlobSet bad = one;
  bad.blobs[0].radius = 0.0;
  CHECK_THROWS(bad.validate(g));
}

TEST_CASE("blob gradient agrees with finite differences") {
  Problem p;
  p.sim = sim(32, 0.01, 10, 10);
  VortexBlobSet b;
  b.blobs.push_back({{0.4, 0.5}, 40.0, 0.1});
  b.blobs.push_back({{0.62, 0.5}, -25.0, 0.08});
  p.blobs = b;
  VortexBlobSet tb = b;
  tb.blobs[0].strength = 30.0;
  tb.blobs[1].center = {0.6, 0.55};
  p.objective.terms.push_back({TermKind::TerminalVelocity, {10}, 1.0,
                               std::make_shared<const VectorField>(
                                   run_forward(p.sim, blobs_to_initial_velocity(tb, p.sim.grid, {}, {}), nullptr)
                                       .traj.u.back()),
                               nullptr});
  const ParamLayout layout(p);
  CHECK(layout.size() == 8);
  const Evaluation ev = evaluate_gradient(p, layout, layout.pack(p));
  const std::vector<double> fd = central_differences(p, 1e-4);
  CHECK(cosine(ev.gradient, fd) >= 0.99);
  // Center derivatives probe the sharper dipole part of the adjoint, where the
  // discrete adjoint is least accurate.
  for (std::size_t k = 0; k < fd.size(); ++k) {
    INFO(layout.names()[k]);
    CHECK(ev.gradient[k] == doctest::Approx(fd[k]).epsilon(0.15).scale(1e-3 * std::abs(fd[0])));
  }
}

TEST_CASE("viscosity gradient agrees with a finite difference on Taylor-Green") {
  Problem p;
  p.sim = sim(64, 0.01, 100, 20);
  p.sim.viscosity = 0.005;
  p.optimize_viscosity = true;
  p.init_u = sample_vector(p.sim.grid, [](Vec2 x) {
    return Vec2{std::sin(M_PI * x.x) * std::cos(M_PI * x.y), -std::cos(M_PI * x.x) * std::sin(M_PI * x.y)};
  });
  SimConfig ref = p.sim;
  ref.viscosity = 0.01;
  p.objective.terms.push_back({TermKind::ViscosityTarget, {100}, 1.0,
                               std::make_shared<const VectorField>(run_forward(ref, p.init_u, nullptr).traj.u.back()),
                               nullptr});
  const ParamLayout layout(p);
  const Evaluation ev = evaluate_gradient(p, layout, layout.pack(p));
  const double fd = central_differences(p, 1e-5)[0];
  CHECK(fd < 0.0);
  CHECK(ev.gradient[0] == doctest::Approx(fd).epsilon(0.05));
}

TEST_CASE("parameter layout packs, unpacks and projects") {
  Problem p;
  p.sim = sim(16, 0.01, 10, 10);
  GaussianWindSet w;
  w.windows = 1;
  w.steps_per_window = 10;
  w.centers = {{0.5, 0.5}};
  w.strengths = {{1.0, 2.0}};
  p.wind = w;
  VortexBlobSet b;
  b.blobs.push_back({{0.5, 0.5}, 3.0, 0.1});
  p.blobs = b;
  p.optimize_viscosity = true;
  const ParamLayout layout(p);
  CHECK(layout.names() ==
        std::vector<std::string>{"wind[0][0].wx", "wind[0][0].wy", "blob[0].w", "blob[0].cx", "blob[0].cy",
                                 "blob[0].r", "viscosity"});
  std::vector<double> t = layout.pack(p);
  CHECK(t == std::vector<double>{1.0, 2.0, 3.0, 0.5, 0.5, 0.1, 0.0});
  t[5] = -1.0;
  t[6] = -0.2;
  layout.project_feasible(t);
  CHECK(t[5] > 0.0);
  CHECK(t[6] == 0.0);
  Problem q = p;
  layout.unpack(t, q);
  CHECK(layout.pack(q) == t);
  CHECK_THROWS(layout.unpack({1.0}, q));
}
