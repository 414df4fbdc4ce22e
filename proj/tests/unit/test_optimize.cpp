#include <doctest.h>

#include <cmath>

#include "fmadj/optimize.hpp"
#include "support.hpp"

using namespace fmadj;

namespace {

// L = sum_i a_i (x_i - b_i)^2
struct Quadratic {
  std::vector<double> a, b;
  double loss(const std::vector<double>& x) const {
    double l = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) l += a[i] * (x[i] - b[i]) * (x[i] - b[i]);
    return l;
  }
  Evaluation eval(const std::vector<double>& x) const {
    Evaluation e{loss(x), {}};
    for (std::size_t i = 0; i < x.size(); ++i) e.gradient.push_back(2 * a[i] * (x[i] - b[i]));
    return e;
  }
};

}  // namespace

TEST_CASE("first Adam step moves every coordinate by the learning rate") {
  OptimizerConfig cfg;
  cfg.learning_rate = 0.1;
  Adam adam(cfg, 3);
  const std::vector<double> d = adam.step({2.0, -0.001, 50.0});
  CHECK(d[0] == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(d[1] == doctest::Approx(0.1).epsilon(1e-4));
  CHECK(d[2] == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(adam.t() == 1);

  // Hand-computed second step with gradients 2 then 1.
  Adam b(cfg, 1);
  b.step({2.0});
  const double m = 0.9 * 0.2 + 0.1 * 1.0, v = 0.999 * 0.004 + 0.001 * 1.0;
  const double expected = -0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  CHECK(b.step({1.0})[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("both algorithms converge on a quadratic") {
  const Quadratic q{{1.0, 4.0, 0.5}, {1.0, -2.0, 3.0}};
  for (Algorithm alg : {Algorithm::GradientDescent, Algorithm::Adam}) {
    OptimizerConfig cfg;
    cfg.algorithm = alg;
    cfg.learning_rate = alg == Algorithm::Adam ? 0.05 : 0.1;
    cfg.max_iterations = 2000;
    int seen = 0;
    const OptRunRecord r = optimize(
        cfg, [&](const auto& x) { return q.eval(x); }, [&](const auto& x) { return q.loss(x); }, {0.0, 0.0, 0.0}, {},
        [&](const IterationRecord&) { ++seen; });
    CHECK(seen == int(r.iterations.size()));
    CHECK(r.final_loss < 1e-6);
    for (std::size_t i = 0; i < 3; ++i) CHECK(r.final_params[i] == doctest::Approx(q.b[i]).epsilon(1e-2));
  }
}

TEST_CASE("stopping rules") {
  const Quadratic q{{1.0}, {0.0}};
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::GradientDescent;
  cfg.learning_rate = 0.1;
  cfg.max_iterations = 100;
  SUBCASE("zero gradient") {
    const OptRunRecord r = optimize(
        cfg, [&](const auto& x) { return q.eval(x); }, [&](const auto& x) { return q.loss(x); }, {0.0});
    CHECK(r.stop_reason == "zero gradient");
    CHECK(r.iterations.size() == 1);
  }
  SUBCASE("loss tolerance") {
    cfg.tolerance = 0.5;
    const OptRunRecord r = optimize(
        cfg, [&](const auto& x) { return q.eval(x); }, [&](const auto& x) { return q.loss(x); }, {1.0});
    CHECK(r.stop_reason == "loss tolerance");
  }
  SUBCASE("parameter tolerance") {
    cfg.param_tolerance = 1e-3;
    const OptRunRecord r = optimize(
        cfg, [&](const auto& x) { return q.eval(x); }, [&](const auto& x) { return q.loss(x); }, {1.0});
    CHECK(r.stop_reason == "parameter tolerance");
    CHECK(std::abs(r.final_params[0]) < 1e-2);
  }
  SUBCASE("iteration cap") {
    cfg.max_iterations = 3;
    const OptRunRecord r = optimize(
        cfg, [&](const auto& x) { return q.eval(x); }, [&](const auto& x) { return q.loss(x); }, {1.0});
    CHECK(r.stop_reason == "max iterations");
    CHECK(r.iterations.size() == 3);
  }
}

TEST_CASE("a blowup retries with half the step before giving up") {
  const Quadratic q{{1.0}, {0.0}};
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::GradientDescent;
  cfg.learning_rate = 1.5;
  cfg.max_iterations = 3;
  // Loss is undefined below -1: the first step lands at -2, the halved retry at -0.5.
  std::vector<double> visited;
  auto eval = [&](const std::vector<double>& x) {
    visited.push_back(x[0]);
    if (x[0] < -1.0) throw NumericalBlowup(3, "velocity");
    return q.eval(x);
  };
  const OptRunRecord r = optimize(cfg, eval, [&](const auto& x) { return q.loss(x); }, {1.0});
  REQUIRE(visited.size() >= 3);
  CHECK(visited[1] == doctest::Approx(-2.0));
  CHECK(visited[2] == doctest::Approx(-0.5));

  auto always_bad = [](const std::vector<double>&) -> Evaluation { return {std::nan(""), {1.0}}; };
  CHECK_THROWS_AS(optimize(cfg, always_bad, [](const auto&) { return 0.0; }, {1.0}), DivergedLoss);
}

TEST_CASE("optimizer configuration validation") {
  OptimizerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.learning_rate = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.beta1 = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.max_iterations = 0;
  CHECK_THROWS(cfg.validate());
  CHECK(algorithm_from_string(to_string(Algorithm::GradientDescent)) == Algorithm::GradientDescent);
  CHECK_THROWS(algorithm_from_string("lbfgs"));
}

TEST_CASE("grad-check on a parameter-independent loss") {
  Problem p;
  p.sim.grid = fmadj::testing::unit_grid(16);
  p.sim.dt = 0.01;
  p.sim.n_steps = 4;
  p.sim.n_long = 4;
  p.init_u = VectorField(p.sim.grid);
  GaussianWindSet w;
  w.windows = 1;
  w.steps_per_window = 4;
  w.centers = {{0.5, 0.5}};
  w.strengths = {{0.0, 0.0}};
  p.wind = w;
  // The wind only acts through the state at step 4, which no term reads.
  p.objective.terms.push_back({TermKind::VelocitySelf, {0}, 1.0, nullptr, nullptr});
  const GradCheckReport r = grad_check(p, {}, 1e-3);
  CHECK(r.loss == 0.0);
  REQUIRE(r.entries.size() == 2);
  for (const auto& e : r.entries) {
    CHECK(e.adjoint == 0.0);
    CHECK(e.finite_difference == 0.0);
    CHECK(e.relative_error == 0.0);
  }
  CHECK(r.cosine == 1.0);
  CHECK_THROWS_AS(grad_check(p, {7}, 1e-3), std::out_of_range);
}

TEST_CASE("simulation optimization is deterministic and lowers the loss") {
  Problem p;
  p.sim.grid = fmadj::testing::unit_grid(16);
  p.sim.dt = 0.02;
  p.sim.n_steps = 10;
  p.sim.n_long = 10;
  p.init_u = VectorField(p.sim.grid);
  GaussianWindSet w;
  w.sharpness = 20.0;
  w.windows = 1;
  w.steps_per_window = 10;
  w.centers = {{0.5, 0.5}};
  w.strengths = {{0.0, 0.0}};
  p.wind = w;
  GaussianWindSet pushed = w;
  pushed.strengths = {{1.0, -0.5}};
  Problem tp = p;
  tp.wind = pushed;
  p.objective.terms.push_back({TermKind::TerminalVelocity, {10}, 1.0,
                               std::make_shared<const VectorField>(run_problem_forward(tp).traj.u.back()), nullptr});

  OptimizerConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.max_iterations = 15;
  const OptRunRecord a = optimize(cfg, p);
  const OptRunRecord b = optimize(cfg, p);
  CHECK(a.final_params == b.final_params);
  CHECK(a.iterations.back().loss < 0.5 * a.iterations.front().loss);
}
