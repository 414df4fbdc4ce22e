#include "fmadj/optimize.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace fmadj {

ParamLayout::ParamLayout(const Problem& p) {
  if (p.wind) {
    const auto& w = *p.wind;
    for (int k = 0; k < w.windows; ++k)
      for (std::size_t i = 0; i < w.count(); ++i) {
        const std::string base = "wind[" + std::to_string(k) + "][" + std::to_string(i) + "].w";
        names_.push_back(base + "x");
        names_.push_back(base + "y");
      }
    wind_strengths_ = w.strengths.size();
    if (p.optimize_wind_centers) {
      for (std::size_t i = 0; i < w.count(); ++i) {
        names_.push_back("wind[" + std::to_string(i) + "].cx");
        names_.push_back("wind[" + std::to_string(i) + "].cy");
      }
      wind_centers_ = w.count();
    }
  }
  if (p.blobs) {
    blobs_ = p.blobs->blobs.size();
    blob_geometry_ = p.optimize_blob_geometry;
    for (std::size_t i = 0; i < blobs_; ++i) {
      const std::string base = "blob[" + std::to_string(i) + "].";
      names_.push_back(base + "w");
      if (blob_geometry_) {
        names_.push_back(base + "cx");
        names_.push_back(base + "cy");
        names_.push_back(base + "r");
      }
    }
  }
  if (p.optimize_viscosity) {
    viscosity_ = true;
    names_.push_back("viscosity");
  }
  radius_floor_ = 0.25 * p.sim.grid.dx;
}

std::vector<double> ParamLayout::pack(const Problem& p) const {
  std::vector<double> t;
  t.reserve(size());
  if (wind_strengths_) {
    for (const Vec2& s : p.wind->strengths) t.push_back(s.x), t.push_back(s.y);
    if (wind_centers_)
      for (const Vec2& c : p.wind->centers) t.push_back(c.x), t.push_back(c.y);
  }
  for (std::size_t i = 0; i < blobs_; ++i) {
    const VortexBlob& b = p.blobs->blobs[i];
    t.push_back(b.strength);
    if (blob_geometry_) t.push_back(b.center.x), t.push_back(b.center.y), t.push_back(b.radius);
  }
  if (viscosity_) t.push_back(p.sim.viscosity);
  return t;
}

void ParamLayout::unpack(const std::vector<double>& theta, Problem& p) const {
  if (theta.size() != size()) throw std::invalid_argument("parameter vector has the wrong length");
  std::size_t k = 0;
  if (wind_strengths_) {
    for (Vec2& s : p.wind->strengths) s = {theta[k], theta[k + 1]}, k += 2;
    if (wind_centers_)
      for (Vec2& c : p.wind->centers) c = {theta[k], theta[k + 1]}, k += 2;
  }
  for (std::size_t i = 0; i < blobs_; ++i) {
    VortexBlob& b = p.blobs->blobs[i];
    b.strength = theta[k++];
    if (blob_geometry_) {
      b.center = {theta[k], theta[k + 1]};
      b.radius = theta[k + 2];
      k += 3;
    }
  }
  if (viscosity_) p.sim.viscosity = theta[k++];
}

void ParamLayout::project_feasible(std::vector<double>& theta) const {
  std::size_t k = wind_strengths_ * 2 + wind_centers_ * 2;
  for (std::size_t i = 0; i < blobs_; ++i) {
    ++k;
    if (blob_geometry_) {
      theta[k + 2] = std::max(theta[k + 2], radius_floor_);
      k += 3;
    }
  }
  if (viscosity_) theta[k] = std::max(theta[k], 0.0);
}

VectorField initial_velocity(const Problem& p) {
  if (p.blobs) return blobs_to_initial_velocity(*p.blobs, p.sim.grid, p.sim.bc, p.sim.poisson);
  return p.init_u;
}

ForwardResult run_problem_forward(const Problem& p, const StepObserver& observer) {
  ForceProvider forces;
  if (p.wind) {
    p.wind->validate(p.sim.grid, p.sim.n_steps);
    forces = wind_force_provider(*p.wind);
  }
  const VectorField u0 = initial_velocity(p);
  return run_forward(p.sim, u0, p.init_xi ? &*p.init_xi : nullptr, forces, &p.objective, observer);
}

double evaluate_loss(const Problem& base, const ParamLayout& layout, const std::vector<double>& theta) {
  Problem p = base;
  layout.unpack(theta, p);
  return run_problem_forward(p).loss.total;
}

Evaluation evaluate_gradient(const Problem& base, const ParamLayout& layout, const std::vector<double>& theta) {
  Problem p = base;
  layout.unpack(theta, p);
  ForwardResult fwd = run_problem_forward(p);
  const AdjointTrajectory adj = run_backward(fwd.traj, sources_from_objective(p.objective, fwd.traj));
  Evaluation ev;
  ev.loss = fwd.loss.total;
  ev.gradient.reserve(layout.size());
  if (p.wind) {
    const WindGradient wg = wind_gradient(adj, *p.wind, p.sim);
    for (const Vec2& g : wg.strengths) ev.gradient.push_back(g.x), ev.gradient.push_back(g.y);
    if (p.optimize_wind_centers)
      for (const Vec2& g : wg.centers) ev.gradient.push_back(g.x), ev.gradient.push_back(g.y);
  }
  if (p.blobs) {
    const BlobGradient bg = blob_gradient(adj.u_star.at(0), *p.blobs, p.sim.bc, p.sim.poisson);
    for (std::size_t i = 0; i < p.blobs->blobs.size(); ++i) {
      ev.gradient.push_back(bg.strength[i]);
      if (p.optimize_blob_geometry) {
        ev.gradient.push_back(bg.center[i].x);
        ev.gradient.push_back(bg.center[i].y);
        ev.gradient.push_back(bg.radius[i]);
      }
    }
  }
  if (p.optimize_viscosity) ev.gradient.push_back(viscosity_gradient(fwd.traj, adj));
  return ev;
}

std::string to_string(Algorithm a) { return a == Algorithm::Adam ? "adam" : "gradient-descent"; }

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "adam") return Algorithm::Adam;
  if (s == "gradient-descent" || s == "gd") return Algorithm::GradientDescent;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected adam or gradient-descent)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("optimizer learning_rate must be positive");
  if (max_iterations < 1) throw std::invalid_argument("optimizer iterations must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("adam epsilon must be positive");
  if (tolerance < 0.0 || param_tolerance < 0.0) throw std::invalid_argument("optimizer tolerances must be >= 0");
}

DivergedLoss::DivergedLoss(int it, const std::string& why)
    : std::runtime_error("loss diverged at iteration " + std::to_string(it) + ": " + why), iteration(it) {}

Adam::Adam(const OptimizerConfig& cfg, std::size_t n) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

std::vector<double> Adam::step(const std::vector<double>& g) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
  std::vector<double> d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
    const double mh = m_[i] / c1;
    const double vh = v_[i] / c2;
    d[i] = -cfg_.learning_rate * mh / (std::sqrt(vh) + cfg_.epsilon);
  }
  return d;
}

namespace {

double norm(const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

bool finite(const Evaluation& e) {
  if (!std::isfinite(e.loss)) return false;
  for (double g : e.gradient)
    if (!std::isfinite(g)) return false;
  return true;
}

}  // namespace

OptRunRecord optimize(const OptimizerConfig& cfg, const EvaluateFn& eval, const LossFn& loss,
                      std::vector<double> theta, const ProjectFn& project, const IterationCallback& on_iteration) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  Adam adam(cfg, theta.size());
  OptRunRecord rec;
  std::vector<double> prev_theta, last_delta;

  auto try_eval = [&](const std::vector<double>& th, std::string& why) -> std::optional<Evaluation> {
    try {
      Evaluation e = eval(th);
      if (finite(e)) return e;
      why = "non-finite loss or gradient";
    } catch (const std::runtime_error& ex) {
      // Solver blowups at a trial point count as divergence, not a hard error.
      why = ex.what();
    }
    return std::nullopt;
  };

  for (int it = 0; it < cfg.max_iterations; ++it) {
    std::string why;
    std::optional<Evaluation> ev = try_eval(theta, why);
    if (!ev) {
      if (it == 0 || last_delta.empty()) throw DivergedLoss(it, why);
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = prev_theta[i] + 0.5 * last_delta[i];
      if (project) project(theta);
      ev = try_eval(theta, why);
      if (!ev) throw DivergedLoss(it, why + " (after halving the step)");
    }
    IterationRecord ir;
    ir.iteration = it;
    ir.loss = ev->loss;
    ir.grad_norm = norm(ev->gradient);
    ir.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    ir.params = theta;
    if (on_iteration) on_iteration(ir);
    const bool have_prev = !rec.iterations.empty();
    const double prev_loss = have_prev ? rec.iterations.back().loss : 0.0;
    rec.iterations.push_back(ir);

    if (ir.grad_norm == 0.0) {
      rec.stop_reason = "zero gradient";
      break;
    }
    if (have_prev && cfg.tolerance > 0.0 && std::abs(prev_loss - ir.loss) <= cfg.tolerance * std::abs(prev_loss)) {
      rec.stop_reason = "loss tolerance";
      break;
    }
    if (it + 1 == cfg.max_iterations) {
      rec.stop_reason = "max iterations";
      break;
    }

    std::vector<double> delta;
    if (cfg.algorithm == Algorithm::Adam) {
      delta = adam.step(ev->gradient);
    } else {
      delta.resize(theta.size());
      for (std::size_t i = 0; i < theta.size(); ++i) delta[i] = -cfg.learning_rate * ev->gradient[i];
    }
    prev_theta = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += delta[i];
    if (project) project(theta);
    last_delta.resize(theta.size());
    double moved = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      last_delta[i] = theta[i] - prev_theta[i];
      moved = std::max(moved, std::abs(last_delta[i]));
    }
    if (cfg.param_tolerance > 0.0 && moved <= cfg.param_tolerance) {
      rec.stop_reason = "parameter tolerance";
      break;
    }
  }
  rec.final_params = theta;
  if (rec.stop_reason == "zero gradient" || rec.stop_reason == "loss tolerance" || rec.stop_reason == "max iterations") {
    rec.final_loss = rec.iterations.back().loss;
  } else {
    rec.final_loss = loss(theta);
  }
  return rec;
}

OptRunRecord optimize(const OptimizerConfig& cfg, const Problem& problem, const IterationCallback& on_iteration) {
  const ParamLayout layout(problem);
  return optimize(
      cfg, [&](const std::vector<double>& th) { return evaluate_gradient(problem, layout, th); },
      [&](const std::vector<double>& th) { return evaluate_loss(problem, layout, th); }, layout.pack(problem),
      [&](std::vector<double>& th) { layout.project_feasible(th); }, on_iteration);
}

GradCheckReport grad_check(const Problem& problem, const std::vector<std::size_t>& subset, double h) {
  const ParamLayout layout(problem);
  const std::vector<double> theta = layout.pack(problem);
  std::vector<std::size_t> idx = subset;
  if (idx.empty()) {
    idx.resize(theta.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  const Evaluation ev = evaluate_gradient(problem, layout, theta);
  GradCheckReport rep;
  rep.loss = ev.loss;
  double dot = 0.0, na = 0.0, nf = 0.0;
  for (std::size_t k : idx) {
    if (k >= theta.size()) throw std::out_of_range("grad-check coordinate " + std::to_string(k) + " out of range");
    std::vector<double> tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    const double fd = (evaluate_loss(problem, layout, tp) - evaluate_loss(problem, layout, tm)) / (2.0 * h);
    GradCheckEntry e;
    e.index = k;
    e.name = layout.names()[k];
    e.adjoint = ev.gradient[k];
    e.finite_difference = fd;
    const double den = std::max(std::abs(fd), 1e-300);
    e.relative_error = (fd == 0.0 && e.adjoint == 0.0) ? 0.0 : std::abs(e.adjoint - fd) / den;
    rep.entries.push_back(e);
    dot += e.adjoint * fd;
    na += e.adjoint * e.adjoint;
    nf += fd * fd;
  }
  if (na == 0.0 && nf == 0.0) {
    rep.cosine = 1.0;
    rep.magnitude_error = 0.0;
  } else {
    rep.cosine = (na > 0.0 && nf > 0.0) ? dot / std::sqrt(na * nf) : 0.0;
    rep.magnitude_error = nf > 0.0 ? std::abs(std::sqrt(na) - std::sqrt(nf)) / std::sqrt(nf) : INFINITY;
  }
  return rep;
}

}  // namespace fmadj
