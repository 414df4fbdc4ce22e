#include "fmadj/app/commands.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "fmadj/app/output.hpp"
#include "fmadj/operators.hpp"
#include "fmadj/snapshot.hpp"

namespace fmadj::app {

namespace fs = std::filesystem;

GridSpec grid_of(const RunConfig& cfg) {
  GridSpec g;
  g.nx = cfg.nx;
  g.ny = cfg.ny;
  g.dx = cfg.dx > 0.0 ? cfg.dx : cfg.width / cfg.nx;
  g.origin = cfg.origin;
  g.validate();
  return g;
}

ScalarField shape_field(const ShapeCfg& s, const GridSpec& g) {
  if (s.type == "snapshot") {
    ScalarField f = read_scalar_snapshot(s.path);
    if (!(f.grid == g)) throw ConfigError("snapshot " + s.path + " does not match the configured grid");
    return f;
  }
  const bool square = s.type == "square";
  return sample_scalar(g, [&](Vec2 p) {
    const Vec2 d = p - s.center;
    const double r = square ? std::max(std::abs(d.x), std::abs(d.y)) : d.norm();
    if (s.edge > 0.0) return 0.5 * (1.0 - std::tanh((r - s.size) / s.edge));
    return r < s.size ? 1.0 : 0.0;
  });
}

VectorField taylor_green(const GridSpec& g, double amplitude) {
  const double kx = 2.0 * M_PI / g.width();
  const double ky = 2.0 * M_PI / g.height();
  return sample_vector(g, [&](Vec2 p) {
    const double X = kx * (p.x - g.origin.x), Y = ky * (p.y - g.origin.y);
    return Vec2{amplitude * std::sin(X) * std::cos(Y), -amplitude * (kx / ky) * std::cos(X) * std::sin(Y)};
  });
}

std::vector<VortexBlob> jittered(const std::vector<VortexBlob>& blobs, double jitter, unsigned long long seed,
                                 const GridSpec& g) {
  if (jitter == 0.0) return blobs;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<VortexBlob> out = blobs;
  for (VortexBlob& b : out) {
    b.strength *= 1.0 + jitter * uni(rng);
    b.center.x += jitter * b.radius * uni(rng);
    b.center.y += jitter * b.radius * uni(rng);
    b.radius *= 1.0 + jitter * uni(rng);
    b.center = g.clamp(b.center);
  }
  return out;
}

namespace {

std::vector<VortexBlob> to_blobs(const std::vector<BlobCfg>& in) {
  std::vector<VortexBlob> out;
  for (const BlobCfg& b : in) out.push_back({b.center, b.strength, b.radius});
  return out;
}

double max_abs(const VectorField& u) {
  return std::max({u.u.max(), -u.u.min(), u.v.max(), -u.v.min()});
}

GaussianWindSet make_wind(const WindCfg& w, const GridSpec& g, int steps) {
  GaussianWindSet set;
  set.sharpness = w.sharpness;
  set.windows = w.windows;
  set.steps_per_window = w.steps_per_window > 0 ? w.steps_per_window : (steps + w.windows - 1) / w.windows;
  set.centers = w.centers;
  if (set.centers.empty()) {
    const int kx = w.lattice[0], ky = w.lattice[1];
    if (kx < 1 || ky < 1) throw ConfigError("wind lattice counts must be >= 1");
    auto coord = [&](int i, int k, double o, double len) {
      const double t = k == 1 ? 0.5 : w.margin + (1.0 - 2.0 * w.margin) * i / (k - 1);
      return o + t * len;
    };
    for (int j = 0; j < ky; ++j)
      for (int i = 0; i < kx; ++i)
        set.centers.push_back({coord(i, kx, g.origin.x, g.width()), coord(j, ky, g.origin.y, g.height())});
  }
  set.strengths = w.strengths;
  if (set.strengths.empty()) set.strengths.assign(set.count() * std::size_t(set.windows), Vec2{});
  set.validate(g, steps);
  return set;
}

int resolve_step(int s, int n) { return s < 0 ? n + 1 + s : s; }

}  // namespace

static Problem build_problem_impl(const RunConfig& cfg, bool for_optimization) {
  const GridSpec g = grid_of(cfg);
  Problem p;
  p.sim.grid = g;
  p.sim.n_steps = cfg.steps;
  p.sim.n_long = cfg.n_long;
  p.sim.n_short = cfg.n_short;
  p.sim.viscosity = cfg.viscosity;
  p.sim.poisson = cfg.poisson;
  p.sim.mode = time_sparse_mode_from_string(cfg.mode);
  p.sim.bfecc = cfg.bfecc;
  p.sim.midpoint_memory = cfg.midpoint_memory;
  p.sim.spill_dir = cfg.spill_dir;

  const std::string& vt = cfg.init_u.type;
  std::vector<VortexBlob> true_blobs;
  if (vt == "blobs") {
    true_blobs = to_blobs(cfg.init_u.blobs);
    VortexBlobSet set;
    set.blobs = jittered(true_blobs, cfg.blob_jitter, cfg.seed, g);
    set.validate(g);
    if (cfg.optimize_blobs) {
      p.blobs = set;
      p.optimize_blob_geometry = cfg.optimize_blob_geometry;
    } else {
      p.init_u = blobs_to_initial_velocity(set, g, p.sim.bc, p.sim.poisson);
    }
  } else if (vt == "taylor-green") {
    p.init_u = taylor_green(g, cfg.init_u.amplitude);
  } else if (vt == "snapshot") {
    p.init_u = read_vector_snapshot(cfg.init_u.path);
    if (!(p.init_u.grid == g)) throw ConfigError("snapshot " + cfg.init_u.path + " does not match the configured grid");
  } else {
    p.init_u = VectorField(g);
  }

  if (cfg.dt > 0.0) {
    p.sim.dt = cfg.dt;
  } else {
    const double umax = max_abs(initial_velocity(p));
    if (!(umax > 0.0)) throw ConfigError("sim.cfl needs a nonzero initial velocity; set sim.dt instead");
    p.sim.dt = cfg.cfl * g.dx / umax;
  }

  if (cfg.init_xi.type != "none") p.init_xi = shape_field(cfg.init_xi, g);
  if (cfg.wind.enabled) {
    p.wind = make_wind(cfg.wind, g, cfg.steps);
    p.optimize_wind_centers = cfg.wind.optimize_centers;
  }
  p.optimize_viscosity = cfg.optimize_viscosity;

  // Reference runs for simulated targets share everything but the overridden
  // inputs, and carry no objective.
  std::optional<ForwardResult> reference;
  std::optional<double> reference_nu;
  std::vector<VortexBlob> reference_blobs;
  auto simulated = [&](const VelocityTargetCfg& t, int step) {
    const std::vector<VortexBlob> blobs = t.blobs.empty() ? true_blobs : to_blobs(t.blobs);
    if (!reference || reference_nu != t.viscosity || reference_blobs.size() != blobs.size()) {
      Problem r = p;
      r.objective = {};
      if (t.viscosity) r.sim.viscosity = *t.viscosity;
      if (!blobs.empty()) {
        VortexBlobSet set;
        set.blobs = blobs;
        r.blobs = set;
      }
      reference = run_problem_forward(r);
      reference_nu = t.viscosity;
      reference_blobs = blobs;
    }
    return reference->traj.u.at(step);
  };

  for (const TermCfg& tc : cfg.terms) {
    ObjectiveTerm term;
    term.kind = term_kind_from_string(tc.kind);
    term.weight = tc.weight;
    for (int s : tc.steps) term.steps.push_back(resolve_step(s, cfg.steps));
    if (term.kind == TermKind::KeyframePassive) {
      term.target_xi = std::make_shared<const ScalarField>(shape_field(tc.target_xi, g));
    } else if (term.kind != TermKind::VelocitySelf) {
      const VelocityTargetCfg& t = tc.target_u;
      if (t.type == "simulate") {
        if (term.steps.size() != 1) throw ConfigError("simulated velocity targets need exactly one step");
        term.target_u = std::make_shared<const VectorField>(simulated(t, term.steps[0]));
      } else if (t.type == "snapshot") {
        VectorField f = read_vector_snapshot(t.path);
        if (!(f.grid == g)) throw ConfigError("snapshot " + t.path + " does not match the configured grid");
        term.target_u = std::make_shared<const VectorField>(std::move(f));
      } else if (t.type == "taylor-green") {
        term.target_u = std::make_shared<const VectorField>(taylor_green(g, t.amplitude));
      } else {
        term.target_u = std::make_shared<const VectorField>(g);
      }
    }
    p.objective.terms.push_back(std::move(term));
  }
  p.objective.validate(g, cfg.steps, p.init_xi.has_value());

  if (for_optimization && cfg.optimize_viscosity && cfg.viscosity_initial) p.sim.viscosity = *cfg.viscosity_initial;
  p.sim.validate();
  return p;
}

Problem build_problem(const RunConfig& cfg) { return build_problem_impl(cfg, false); }

namespace {

fs::path prepare_out(const RunConfig& cfg, const std::string& command) {
  const fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  write_manifest(dir, command, cfg);
  return dir;
}

std::string step_name(const char* prefix, int step, const char* ext) {
  std::ostringstream os;
  os << prefix << "_" << std::setw(5) << std::setfill('0') << step << ext;
  return os.str();
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

double max_abs_scalar(const ScalarField& s) { return std::max(s.values.max(), -s.values.min()); }

}  // namespace

SimulateSummary simulate(const RunConfig& cfg, std::ostream& log) {
  const Problem p = build_problem(cfg);
  const fs::path dir = prepare_out(cfg, "simulate");
  if (cfg.frame_every > 0) fs::create_directories(dir / "frames");
  if (cfg.snapshot_every > 0) fs::create_directories(dir / "snapshots");
  double scale = 0.0;
  auto observer = [&](int step, const VectorField& u, const ScalarField* xi) {
    const bool last = step == cfg.steps;
    if (cfg.frame_every > 0 && (step % cfg.frame_every == 0 || last)) {
      const ScalarField w = curl(u);
      if (step == 0) scale = max_abs_scalar(w);
      write_image(dir / "frames" / step_name("vorticity", step, ".ppm"), vorticity_image(w, scale > 0 ? scale : 1.0));
      if (xi) write_image(dir / "frames" / step_name("smoke", step, ".pgm"), smoke_image(*xi));
    }
    if (cfg.snapshot_every > 0 && (step % cfg.snapshot_every == 0 || last)) {
      write_snapshot(dir / "snapshots" / step_name("u", step, ".fma"), u);
      if (xi) write_snapshot(dir / "snapshots" / step_name("xi", step, ".fma"), *xi);
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  const ForwardResult fwd = run_problem_forward(p, observer);
  SimulateSummary s;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.steps = cfg.steps;
  s.dt = p.sim.dt;
  s.diagnostics = fwd.traj.diagnostics;
  s.loss = fwd.loss.total;

  CsvWriter csv(dir / "energy.csv",
                {"step", "time", "energy", "energy_ratio", "mass", "mass_drift", "relative_divergence",
                 "poisson_iterations"});
  const double e0 = s.diagnostics.front().energy, m0 = s.diagnostics.front().mass;
  for (const StepDiagnostics& d : s.diagnostics)
    csv.row({double(d.step), d.step * p.sim.dt, d.energy, e0 > 0 ? d.energy / e0 : 0.0, d.mass,
             m0 != 0 ? (d.mass - m0) / m0 : 0.0, d.relative_divergence, double(d.poisson_iterations)});
  const StepDiagnostics& last = s.diagnostics.back();
  log << "simulate: " << cfg.steps << " steps, dt " << p.sim.dt << ", " << s.seconds << " s\n"
      << "  energy " << e0 << " -> " << last.energy << "\n";
  if (p.init_xi) log << "  mass drift " << (m0 != 0 ? (last.mass - m0) / m0 : 0.0) << "\n";
  if (!p.objective.terms.empty()) log << "  loss " << s.loss << "\n";
  return s;
}

AdjointCheckSummary adjoint_check(const RunConfig& cfg, std::ostream& log) {
  Problem p = build_problem(cfg);
  ObjectiveTerm self;
  self.kind = TermKind::VelocitySelf;
  self.steps = {cfg.steps};
  p.objective.terms = {self};
  const fs::path dir = prepare_out(cfg, "adjoint-check");
  const auto t0 = std::chrono::steady_clock::now();
  const ForwardResult fwd = run_problem_forward(p);
  const AdjointTrajectory adj = run_backward(fwd.traj, sources_from_objective(p.objective, fwd.traj));
  AdjointCheckSummary s;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.bound = cfg.adjoint_bound;
  CsvWriter csv(dir / "adjoint_error.csv",
                {"step", "time", "relative_error", "energy", "adjoint_energy", "adjoint_relative_divergence"});
  for (int c = 0; c <= cfg.steps; ++c) {
    const double e = relative_l2(adj.u_star[c], fwd.traj.u[c]);
    s.errors.push_back(e);
    s.energy.push_back(fwd.traj.diagnostics[c].energy);
    s.adjoint_energy.push_back(adj.diagnostics[c].energy);
    s.adjoint_divergence.push_back(adj.diagnostics[c].relative_divergence);
    s.max_error = std::max(s.max_error, e);
    csv.row({double(c), c * p.sim.dt, e, s.energy.back(), s.adjoint_energy.back(), s.adjoint_divergence.back()});
  }
  log << "adjoint-check (" << cfg.mode << "): max relative error " << s.max_error << " (bound " << s.bound << "), "
      << s.seconds << " s\n";
  return s;
}

GradCheckSummary grad_check(const RunConfig& cfg, std::ostream& log) {
  const Problem p = build_problem_impl(cfg, true);
  const fs::path dir = prepare_out(cfg, "grad-check");
  GradCheckSummary s;
  s.min_cosine = cfg.grad_min_cosine;
  s.report = fmadj::grad_check(p, cfg.grad_subset, cfg.grad_h);
  std::ofstream os(dir / "grad_check.txt");
  os << std::setprecision(10);
  os << "loss " << s.report.loss << "\nh " << cfg.grad_h << "\n";
  os << "index name adjoint finite_difference relative_error\n";
  for (const GradCheckEntry& e : s.report.entries)
    os << e.index << " " << e.name << " " << e.adjoint << " " << e.finite_difference << " " << e.relative_error
       << "\n";
  os << "cosine " << s.report.cosine << "\nmagnitude_error " << s.report.magnitude_error << "\n";
  log << "grad-check: cosine " << s.report.cosine << ", magnitude error " << s.report.magnitude_error << " over "
      << s.report.entries.size() << " coordinates\n";
  return s;
}

OptimizeSummary optimize(const RunConfig& cfg, std::ostream& log) {
  const Problem p = build_problem_impl(cfg, true);
  const fs::path dir = prepare_out(cfg, "optimize");
  const ParamLayout layout(p);
  OptimizeSummary s;
  s.names = layout.names();
  s.initial_params = layout.pack(p);
  if (s.names.empty()) throw ConfigError("optimize: the configuration has no free parameters");
  if (cfg.optimizer.checkpoint_every > 0) fs::create_directories(dir / "checkpoints");
  CsvWriter csv(dir / "loss.csv", {"iteration", "loss", "grad_norm", "seconds"});
  auto on_iter = [&](const IterationRecord& r) {
    csv.row({double(r.iteration), r.loss, r.grad_norm, r.seconds});
    log << "  iter " << r.iteration << " loss " << r.loss << " |g| " << r.grad_norm << "\n" << std::flush;
    const int k = cfg.optimizer.checkpoint_every;
    if (k > 0 && r.iteration % k == 0)
      write_params(dir / "checkpoints" / step_name("iter", r.iteration, ".yaml"), s.names, r.params,
                   "iteration " + std::to_string(r.iteration) + " loss " + num(r.loss));
  };
  s.record = fmadj::optimize(cfg.optimizer, p, on_iter);
  write_params(dir / "params_final.yaml", s.names, s.record.final_params,
               "stop: " + s.record.stop_reason + ", final loss " + num(s.record.final_loss));
  log << "optimize: " << s.record.iterations.size() << " iterations (" << s.record.stop_reason << "), loss "
      << s.record.iterations.front().loss << " -> " << s.record.final_loss << "\n";
  return s;
}

fs::path render(const fs::path& input, const fs::path& out_dir, std::ostream& log) {
  const Snapshot snap = read_snapshot(input);
  fs::create_directories(out_dir);
  fs::path out;
  if (const auto* s = std::get_if<ScalarField>(&snap)) {
    out = out_dir / (input.stem().string() + ".pgm");
    write_image(out, smoke_image(*s));
  } else {
    const ScalarField w = curl(std::get<VectorField>(snap));
    const double scale = max_abs_scalar(w);
    out = out_dir / (input.stem().string() + ".ppm");
    write_image(out, vorticity_image(w, scale > 0.0 ? scale : 1.0));
  }
  log << "render: wrote " << out.string() << "\n";
  return out;
}

int run(const CliRequest& req, std::ostream& out, std::ostream& err) {
  try {
    if (req.command == "render") {
      if (!req.input) {
        err << "render needs --input <snapshot>\n";
        return kUsage;
      }
      render(*req.input, req.overrides.out_dir.value_or("out"), out);
      return kOk;
    }
    RunConfig cfg;
    if (req.config_path) {
      cfg = load_config(*req.config_path, req.overrides);
    } else if (req.overrides.preset) {
      cfg = preset_config(*req.overrides.preset, req.overrides);
    } else {
      err << req.command << " needs --config <path> or --preset <name>\n";
      return kUsage;
    }
    if (req.command == "simulate") {
      simulate(cfg, out);
      return kOk;
    }
    if (req.command == "adjoint-check") {
      const AdjointCheckSummary s = adjoint_check(cfg, out);
      if (!s.passed()) {
        err << "adjoint-check failed: max relative error " << s.max_error << " exceeds " << s.bound << "\n";
        return kCriterionFailed;
      }
      return kOk;
    }
    if (req.command == "grad-check") {
      const GradCheckSummary s = grad_check(cfg, out);
      if (!s.passed()) {
        err << "grad-check failed: cosine " << s.report.cosine << " below " << s.min_cosine << "\n";
        return kCriterionFailed;
      }
      return kOk;
    }
    if (req.command == "optimize") {
      optimize(cfg, out);
      return kOk;
    }
    err << "unknown command '" << req.command << "'\n";
    return kUsage;
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const YAML::Exception& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const SnapshotError& ex) {
    err << "input error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const NumericalBlowup& ex) {
    err << "solver error: NaN/Inf in " << ex.field << " at step " << ex.step << "\n";
    return kSolverError;
  } catch (const std::exception& ex) {
    err << "solver error: " << ex.what() << "\n";
    return kSolverError;
  }
}

}  // namespace fmadj::app
