#include "fmadj/adjoint.hpp"

#include "fmadj/kernels.hpp"
#include "fmadj/operators.hpp"

namespace fmadj {

AdjointSourceHook sources_from_objective(const ObjectiveSpec& spec, const TrajectoryRecord& traj) {
  AdjointSourceHook hook;
  hook.dJdu = [&spec, &traj](int step) { return total_dJdu(spec, step, traj.u.at(step)); };
  hook.dJdxi = [&spec, &traj](int step) -> std::optional<ScalarField> {
    if (!traj.has_passive()) return std::nullopt;
    return total_dJdxi(spec, step, traj.xi.at(step));
  };
  return hook;
}

VectorField grad_transpose_product(const VectorField& u, const VectorField& w) {
  require_same_grid(u.grid, w.grid, "grad(u)^T w");
  const GridSpec& g = u.grid;
  VectorField out(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const Vec2 x = g.u_face(i, j);
      const Mat2 gu = grad_w3(u, x);
      out.u(i, j) = gu.a00 * w.u(i, j) + gu.a10 * interp_w2(w, 1, x);
    }
#pragma omp parallel for schedule(static)
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 x = g.v_face(i, j);
      const Mat2 gu = grad_w3(u, x);
      out.v(i, j) = gu.a01 * interp_w2(w, 0, x) + gu.a11 * w.v(i, j);
    }
  return out;
}

VectorField passive_coupling(const ScalarField& xi_star, const ScalarField& xi) {
  require_same_grid(xi_star.grid, xi.grid, "passive coupling");
  const GridSpec& g = xi.grid;
  VectorField out(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const Vec2 x = g.u_face(i, j);
      out.u(i, j) = interp_w2(xi_star, x) * grad_w3(xi, x).x;
    }
#pragma omp parallel for schedule(static)
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 x = g.v_face(i, j);
      out.v(i, j) = interp_w2(xi_star, x) * grad_w3(xi, x).y;
    }
  return out;
}

VectorField long_short_convert(const VectorField& u_star_M, const SampledMap& phi_F, const VectorField& lambda_u,
                               const VectorField& grad_u_term, double dt_signed) {
  VectorField out = u_star_M;
  out += mapped_adjoint_velocity(lambda_u, phi_F);
  out.axpy(2.0 * dt_signed, grad_u_term);
  return out;
}

ScalarField update_adjoint_passive(const ScalarField& xi_star_M, const ScalarField& lambda_xi_at_phi,
                                   const ScalarField& dJdxi, double dt_signed) {
  ScalarField out = xi_star_M;
  out += lambda_xi_at_phi;
  out.axpy(-dt_signed, dJdxi);
  return out;
}

VectorField assemble_unprojected(const VectorField& u_star_A, const ScalarField* xi_star, const ScalarField* xi,
                                 double viscosity, const VectorField* dJdu, double dt_signed) {
  VectorField out = u_star_A;
  if (xi_star && xi) out.axpy(dt_signed, passive_coupling(*xi_star, *xi));
  if (viscosity > 0.0) out.axpy(-dt_signed * viscosity, laplacian(u_star_A));
  if (dJdu) out.axpy(-dt_signed, *dJdu);
  return out;
}

void update_path_integrators(std::vector<EfmWindow*> windows, const VectorField& increment_u,
                             const ScalarField* increment_xi) {
  for (EfmWindow* w : windows) w->accumulate(increment_u, increment_xi);
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

}  // namespace

AdjointTrajectory run_backward(const TrajectoryRecord& traj, const AdjointSourceHook& sources,
                               const VectorField* terminal_u, const ScalarField* terminal_xi,
                               const AdjointObserver& observer) {
  const SimConfig& cfg = traj.cfg;
  const GridSpec& g = cfg.grid;
  const int n = cfg.n_steps;
  const double dt = cfg.dt;
  const double dts = -dt;
  const bool long_short = cfg.mode == TimeSparseMode::LongShort;
  const bool passive = traj.has_passive();
  if (int(traj.u.size()) != n + 1) throw std::invalid_argument("trajectory is incomplete");
  Projector projector(g, cfg.bc, cfg.poisson);

  auto src_u = [&](int step) -> std::optional<VectorField> {
    if (!sources.dJdu) return std::nullopt;
    auto s = sources.dJdu(step);
    if (s && !s->all_finite()) throw NumericalBlowup(step, "adjoint velocity source");
    return s;
  };
  auto src_xi = [&](int step) -> std::optional<ScalarField> {
    if (!passive || !sources.dJdxi) return std::nullopt;
    auto s = sources.dJdxi(step);
    if (s && !s->values.all_finite()) throw NumericalBlowup(step, "adjoint passive source");
    return s;
  };

  AdjointTrajectory out;
  out.u_star.resize(n + 1);
  if (passive) out.xi_star.resize(n + 1);
  out.diagnostics.resize(n + 1);

  VectorField init = terminal_u ? *terminal_u : VectorField(g);
  if (auto s = src_u(n)) init += *s;
  Projection p0 = projector.project(init);
  VectorField ustar = std::move(p0.velocity);
  std::optional<ScalarField> xistar;
  if (passive) {
    xistar = terminal_xi ? *terminal_xi : ScalarField(g);
    if (auto s = src_xi(n)) *xistar += *s;
  }
  const ScalarField* xsp = nullptr;

  auto record = [&](int step, int iters) {
    xsp = xistar ? &*xistar : nullptr;
    if (!ustar.all_finite()) throw NumericalBlowup(step, "adjoint velocity");
    if (xsp && !xsp->values.all_finite()) throw NumericalBlowup(step, "adjoint passive field");
    out.u_star[step] = ustar;
    if (xsp) out.xi_star[step] = *xsp;
    out.diagnostics[step] = diagnose(step, ustar, xsp, iters);
    if (observer) observer(step, ustar, xsp);
  };
  record(n, p0.stats.iterations);

  EfmWindow lw(WindowKind::Long, g);
  EfmWindow sw(WindowKind::Short, g);
  lw.reset(n, ustar, xsp);
  if (long_short) sw.reset(n, ustar, xsp);

  for (int c = n - 1; c >= 0; --c) {
    const auto umid = traj.umid->get(c);
    march(lw.window.map, *umid, dts);
    if (long_short) march(sw.window.map, *umid, dts);

    const VectorField G = grad_transpose_product(traj.u[c + 1], ustar);
    VectorField uA;
    std::optional<ScalarField> xiA;
    const bool short_step = cfg.short_reinit(c);
    if (short_step) {
      const SampledMap back = integrate_map(*traj.umid, c, sw.anchor(), dt);
      uA = sw.reconstruct_u(back, cfg.bfecc);
      uA.axpy(2.0 * dts, G);
      if (passive) xiA = sw.reconstruct_xi(back, cfg.bfecc, false);
    } else {
      uA = sl_advect(ustar, *umid, dts);
      uA.axpy(dts, G);
      if (passive) xiA = sl_advect(*xistar, *umid, dts);
    }

    std::optional<VectorField> su = src_u(c);
    std::optional<ScalarField> sxi = src_xi(c);
    std::optional<VectorField> su_rate;
    if (su) su_rate = (1.0 / dt) * *su;
    const VectorField uup = assemble_unprojected(uA, xiA ? &*xiA : nullptr, passive ? &traj.xi[c] : nullptr,
                                                 cfg.viscosity, su_rate ? &*su_rate : nullptr, dts);
    Projection proj = projector.project(uup);
    int iters = proj.stats.iterations;

    // Everything but the advection: 2 G dt + coupling + viscosity + source + pressure.
    VectorField increment = proj.velocity - uA;
    increment.axpy(2.0 * dts, G);
    std::vector<EfmWindow*> windows{&lw};
    if (long_short) windows.push_back(&sw);
    update_path_integrators(windows, increment, sxi ? &*sxi : nullptr);

    ustar = std::move(proj.velocity);
    if (passive) {
      xistar = std::move(*xiA);
      if (sxi) *xistar += *sxi;
    }
    xsp = xistar ? &*xistar : nullptr;
    if (short_step) sw.reset(c, ustar, xsp);

    if (cfg.long_reinit(c)) {
      const SampledMap back = integrate_map(*traj.umid, c, lw.anchor(), dt);
      Projection pl = projector.project(lw.reconstruct_u(back, cfg.bfecc));
      ustar = std::move(pl.velocity);
      iters += pl.stats.iterations;
      if (passive) xistar = lw.reconstruct_xi(back, cfg.bfecc, false);
      xsp = xistar ? &*xistar : nullptr;
      lw.reset(c, ustar, xsp);
      if (long_short) sw.reset(c, ustar, xsp);
    }
    record(c, iters);
  }
  return out;
}

}  // namespace fmadj
