#include "fmadj/forward.hpp"

#include <cmath>
#include <sstream>

#include "fmadj/kernels.hpp"
#include "fmadj/operators.hpp"

namespace fmadj {

void SimConfig::validate() const {
  grid.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("sim.dt must be positive");
  if (n_steps < 1) throw std::invalid_argument("sim.steps must be >= 1");
  if (n_long < 1 || n_short < 1) throw std::invalid_argument("reinit intervals must be >= 1");
  if (n_long % n_short != 0) {
    std::ostringstream os;
    os << "sim.n_short (" << n_short << ") must divide sim.n_long (" << n_long << ")";
    throw std::invalid_argument(os.str());
  }
  if (n_steps % n_long != 0) {
    std::ostringstream os;
    os << "sim.n_long (" << n_long << ") must divide sim.steps (" << n_steps << ")";
    throw std::invalid_argument(os.str());
  }
  if (!(viscosity >= 0.0) || !std::isfinite(viscosity)) throw std::invalid_argument("sim.viscosity must be >= 0");
  bc.validate(grid);
  poisson.validate(grid);
}

NumericalBlowup::NumericalBlowup(int s, const std::string& f)
    : std::runtime_error("non-finite " + f + " at step " + std::to_string(s)), step(s), field(f) {}

ScalarField advect_passive_sl(const ScalarField& xi, const VectorField& u_mid, double dt) {
  return sl_advect(xi, u_mid, dt);
}

VectorField kinetic_gradient(const VectorField& u) {
  VectorField g = face_gradient_w3(cell_speed_squared(u));
  g *= 0.5;
  return g;
}

VectorField map_convert_forward(const EfmWindow& window, const SampledMap& back, bool bfecc) {
  return window.reconstruct_u(back, bfecc);
}

namespace {

StepDiagnostics diagnose(int step, const VectorField& u, const ScalarField* xi, int iters) {
  StepDiagnostics d;
  d.step = step;
  d.energy = kinetic_energy(u);
  d.mass = xi ? total_mass(*xi) : 0.0;
  d.relative_divergence = relative_divergence(u);
  d.poisson_iterations = iters;
  return d;
}

void check_finite(int step, const VectorField& u, const ScalarField* xi) {
  if (!u.all_finite()) throw NumericalBlowup(step, "velocity");
  if (xi && !xi->values.all_finite()) throw NumericalBlowup(step, "passive field");
}

}  // namespace

ForwardResult run_forward(const SimConfig& cfg, const VectorField& u0, const ScalarField* xi0,
                          const ForceProvider& forces, const ObjectiveSpec* objective, const StepObserver& observer) {
  cfg.validate();
  require_same_grid(cfg.grid, u0.grid, "initial velocity");
  if (xi0) require_same_grid(cfg.grid, xi0->grid, "initial passive field");
  if (objective) objective->validate(cfg.grid, cfg.n_steps, xi0 != nullptr);

  const GridSpec& g = cfg.grid;
  const double dt = cfg.dt;
  const bool long_short = cfg.mode == TimeSparseMode::LongShort;
  Projector projector(g, cfg.bc, cfg.poisson);

  ForwardResult res;
  TrajectoryRecord& traj = res.traj;
  traj.cfg = cfg;
  traj.umid = std::make_unique<MidpointBuffer>(cfg.midpoint_memory, cfg.spill_dir);
  traj.u.reserve(cfg.n_steps + 1);
  if (xi0) traj.xi.reserve(cfg.n_steps + 1);

  check_finite(0, u0, xi0);
  Projection p0 = projector.project(u0);
  VectorField u = std::move(p0.velocity);
  std::optional<ScalarField> xi;
  if (xi0) xi = *xi0;
  const ScalarField* xip = xi ? &*xi : nullptr;

  auto record = [&](int step, int iters) {
    traj.u.push_back(u);
    if (xip) traj.xi.push_back(*xi);
    traj.diagnostics.push_back(diagnose(step, u, xip, iters));
    if (objective) {
      const double l = eval_loss_at(*objective, step, u, xip);
      if (objective->active_at(step)) {
        res.loss.per_step.emplace_back(step, l);
        res.loss.total += l;
      }
    }
    if (observer) observer(step, u, xip);
  };
  record(0, p0.stats.iterations);

  EfmWindow lw(WindowKind::Long, g);
  EfmWindow sw(WindowKind::Short, g);
  lw.reset(0, u, xip);
  if (long_short) sw.reset(0, u, xip);

  for (int c = 0; c < cfg.n_steps; ++c) {
    const int next = c + 1;
    const VectorField umid = projector.project(compute_midpoint_velocity(u, dt)).velocity;
    traj.umid->store(c, umid);
    march(lw.window.map, umid, dt);
    if (long_short) march(sw.window.map, umid, dt);

    const VectorField gf = kinetic_gradient(u);
    VectorField uA;
    std::optional<ScalarField> xiA;
    const bool short_step = cfg.short_reinit(next);
    if (short_step) {
      const SampledMap back = integrate_map(*traj.umid, next, sw.anchor(), dt);
      uA = map_convert_forward(sw, back, cfg.bfecc);
      uA.axpy(dt, gf);
      if (xip) xiA = lw.reconstruct_xi(integrate_map(*traj.umid, next, lw.anchor(), dt), cfg.bfecc, true);
    } else {
      uA = sl_advect(u, umid, dt);
      if (xip) xiA = advect_passive_sl(*xi, umid, dt);
    }

    VectorField increment(g);
    increment.axpy(dt, gf);
    VectorField uup = uA;
    if (forces) {
      if (auto f = forces(c, g)) {
        require_same_grid(g, f->grid, "force field");
        if (!f->all_finite()) throw NumericalBlowup(c, "force");
        uup.axpy(dt, *f);
        increment.axpy(dt, *f);
      }
    }
    if (cfg.viscosity > 0.0) {
      const VectorField visc = laplacian(uA);
      uup.axpy(dt * cfg.viscosity, visc);
      increment.axpy(dt * cfg.viscosity, visc);
    }
    check_finite(next, uup, xiA ? &*xiA : nullptr);
    Projection proj = projector.project(uup);
    increment += proj.velocity;
    increment -= uup;
    int iters = proj.stats.iterations;

    lw.accumulate(increment, nullptr);
    if (long_short) sw.accumulate(increment, nullptr);

    u = std::move(proj.velocity);
    if (xip) *xi = std::move(*xiA);
    if (short_step) sw.reset(next, u, xip);

    if (cfg.long_reinit(next)) {
      const SampledMap back = integrate_map(*traj.umid, next, lw.anchor(), dt);
      Projection pl = projector.project(map_convert_forward(lw, back, cfg.bfecc));
      u = std::move(pl.velocity);
      iters += pl.stats.iterations;
      if (xip) *xi = lw.reconstruct_xi(back, cfg.bfecc, true);
      lw.reset(next, u, xip);
      if (long_short) sw.reset(next, u, xip);
    }
    check_finite(next, u, xip);
    record(next, iters);
  }
  return res;
}

}  // namespace fmadj
