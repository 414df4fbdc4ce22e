#include "fmadj/params.hpp"

#include <cmath>
#include <stdexcept>

#include "fmadj/operators.hpp"

namespace fmadj {

int GaussianWindSet::window_of(int step) const {
  const int w = step / steps_per_window;
  return w < windows ? w : windows - 1;
}

void GaussianWindSet::validate(const GridSpec& g, int n_steps, std::size_t cap) const {
  if (!(sharpness > 0.0)) throw std::invalid_argument("wind sharpness must be positive");
  if (steps_per_window < 1 || windows < 1) throw std::invalid_argument("wind windows must be >= 1");
  if (long(steps_per_window) * windows < n_steps)
    throw std::invalid_argument("wind windows do not cover all simulation steps");
  if (count() > cap) throw std::invalid_argument("too many wind fields (cap " + std::to_string(cap) + ")");
  if (strengths.size() != count() * std::size_t(windows))
    throw std::invalid_argument("wind strengths must have windows x count entries");
  for (const Vec2& c : centers)
    if (c.x < g.origin.x || c.y < g.origin.y || c.x > g.origin.x + g.width() || c.y > g.origin.y + g.height())
      throw std::invalid_argument("wind center outside the domain");
}

namespace {

inline double gauss(double a, Vec2 x, Vec2 c) {
  const Vec2 d = x - c;
  return std::exp(-a * d.dot(d));
}

}  // namespace

VectorField wind_force_field(const GaussianWindSet& set, int step, const GridSpec& g) {
  const int w = set.window_of(step);
  VectorField f(g);
  for (std::size_t i = 0; i < set.count(); ++i) {
    const Vec2 s = set.strength(w, i);
    const Vec2 c = set.centers[i];
    if (s.x != 0.0)
      for (int j = 0; j < g.ny; ++j)
        for (int k = 0; k <= g.nx; ++k) f.u(k, j) += s.x * gauss(set.sharpness, g.u_face(k, j), c);
    if (s.y != 0.0)
      for (int j = 0; j <= g.ny; ++j)
        for (int k = 0; k < g.nx; ++k) f.v(k, j) += s.y * gauss(set.sharpness, g.v_face(k, j), c);
  }
  return f;
}

ForceProvider wind_force_provider(const GaussianWindSet& set) {
  return [set](int step, const GridSpec& g) -> std::optional<VectorField> { return wind_force_field(set, step, g); };
}

WindGradient wind_gradient(const AdjointTrajectory& adj, const GaussianWindSet& set, const SimConfig& cfg) {
  const GridSpec& g = cfg.grid;
  const double dx2 = g.dx * g.dx;
  const double a = set.sharpness;
  WindGradient out;
  out.strengths.assign(set.strengths.size(), Vec2{});
  out.centers.assign(set.count(), Vec2{});
  // Sum the adjoint over the steps of each window first: the force is constant
  // inside a window.
  std::vector<VectorField> acc(set.windows, VectorField(g));
  for (int c = 0; c < cfg.n_steps; ++c) acc[set.window_of(c)].axpy(cfg.dt, adj.u_star.at(c + 1));
  for (int w = 0; w < set.windows; ++w) {
    const VectorField& us = acc[w];
    for (std::size_t i = 0; i < set.count(); ++i) {
      const Vec2 c = set.centers[i];
      const Vec2 s = set.strength(w, i);
      double gx = 0.0, gy = 0.0;
      Vec2 gc{};
      for (int j = 0; j < g.ny; ++j)
        for (int k = 0; k <= g.nx; ++k) {
          const Vec2 x = g.u_face(k, j);
          const double e = gauss(a, x, c) * us.u(k, j);
          gx += e;
          gc += (x - c) * (2.0 * a * s.x * e);
        }
      for (int j = 0; j <= g.ny; ++j)
        for (int k = 0; k < g.nx; ++k) {
          const Vec2 x = g.v_face(k, j);
          const double e = gauss(a, x, c) * us.v(k, j);
          gy += e;
          gc += (x - c) * (2.0 * a * s.y * e);
        }
      out.strengths[std::size_t(w) * set.count() + i] = Vec2{gx, gy} * dx2;
      out.centers[i] += gc * dx2;
    }
  }
  return out;
}

void VortexBlobSet::validate(const GridSpec& g) const {
  for (const auto& b : blobs) {
    if (!(b.radius > 0.0)) throw std::invalid_argument("vortex radius must be positive");
    if (b.center.x < g.origin.x || b.center.y < g.origin.y || b.center.x > g.origin.x + g.width() ||
        b.center.y > g.origin.y + g.height())
      throw std::invalid_argument("vortex center outside the domain");
    if (!std::isfinite(b.strength)) throw std::invalid_argument("vortex strength must be finite");
  }
}

std::vector<double> blob_vorticity_nodes(const VortexBlobSet& set, const GridSpec& g) {
  const int nx = g.nx + 1, ny = g.ny + 1;
  std::vector<double> w(std::size_t(nx) * ny, 0.0);
  for (const auto& b : set.blobs) {
    const double inv_r2 = 1.0 / (b.radius * b.radius);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const Vec2 d = Vec2{g.origin.x + i * g.dx, g.origin.y + j * g.dx} - b.center;
        w[std::size_t(j) * nx + i] += b.strength * std::exp(-d.dot(d) * inv_r2);
      }
  }
  return w;
}

namespace {

// CG for -lap(psi) = omega on interior nodes, psi = 0 on the boundary.
std::vector<double> solve_streamfunction(const std::vector<double>& omega, const GridSpec& g) {
  const int nx = g.nx + 1, ny = g.ny + 1;
  const std::size_t n = std::size_t(nx) * ny;
  const double ih2 = 1.0 / (g.dx * g.dx);
  auto interior = [&](int i, int j) { return i > 0 && j > 0 && i < nx - 1 && j < ny - 1; };
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = std::size_t(j) * nx + i;
        if (!interior(i, j)) {
          y[k] = 0.0;
          continue;
        }
        y[k] = (4.0 * x[k] - x[k - 1] - x[k + 1] - x[k - nx] - x[k + nx]) * ih2;
      }
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
  };
  std::vector<double> x(n, 0.0), r(n, 0.0), p, Ap(n, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (interior(i, j)) r[std::size_t(j) * nx + i] = omega[std::size_t(j) * nx + i];
  const double bnorm = std::sqrt(dot(r, r));
  if (bnorm == 0.0) return x;
  p = r;
  double rr = dot(r, r);
  const int max_it = 20 * (nx + ny) + 100;
  for (int it = 0; it < max_it; ++it) {
    apply(p, Ap);
    const double alpha = rr / dot(p, Ap);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * Ap[k];
    }
    const double rr_new = dot(r, r);
    if (std::sqrt(rr_new) <= 1e-10 * bnorm) return x;
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
  }
  throw NonConvergence(std::sqrt(rr) / bnorm, max_it);
}

VectorField velocity_from_streamfunction(const std::vector<double>& psi, const GridSpec& g) {
  const int nx = g.nx + 1;
  auto P = [&](int i, int j) { return psi[std::size_t(j) * nx + i]; };
  VectorField u(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) u.u(i, j) = (P(i, j + 1) - P(i, j)) / g.dx;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) u.v(i, j) = -(P(i + 1, j) - P(i, j)) / g.dx;
  return u;
}

VectorField induced_velocity(const VortexBlobSet& set, const GridSpec& g) {
  return velocity_from_streamfunction(solve_streamfunction(blob_vorticity_nodes(set, g), g), g);
}

}  // namespace

VectorField blobs_to_initial_velocity(const VortexBlobSet& set, const GridSpec& g, const BoundarySpec& bc,
                                      const PoissonConfig& pc) {
  set.validate(g);
  return project(induced_velocity(set, g), bc, pc).velocity;
}

BlobGradient blob_gradient(const VectorField& u_star_0, const VortexBlobSet& set, const BoundarySpec& bc,
                           const PoissonConfig& pc, double h) {
  const GridSpec& g = u_star_0.grid;
  bc.validate(g);
  pc.validate(g);
  // u*_0 is divergence-free, so <u*_0, P U> = <u*_0, U> and the projection of
  // the induced velocity can be skipped here.
  auto velocity = [&](const VortexBlob& b) {
    VortexBlobSet one;
    one.blobs.push_back(b);
    return induced_velocity(one, g);
  };
  const double step = h * g.dx;
  BlobGradient out;
  for (const VortexBlob& b : set.blobs) {
    VortexBlob unit = b;
    unit.strength = 1.0;
    out.strength.push_back(inner(u_star_0, velocity(unit)));
    auto fd = [&](auto mutate) {
      VortexBlob p = b, m = b;
      mutate(p, step);
      mutate(m, -step);
      return (inner(u_star_0, velocity(p)) - inner(u_star_0, velocity(m))) / (2.0 * step);
    };
    const double gx = fd([](VortexBlob& v, double s) { v.center.x += s; });
    const double gy = fd([](VortexBlob& v, double s) { v.center.y += s; });
    out.center.push_back({gx, gy});
    out.radius.push_back(fd([](VortexBlob& v, double s) { v.radius += s; }));
  }
  return out;
}

double viscosity_gradient(const TrajectoryRecord& traj, const AdjointTrajectory& adj) {
  const SimConfig& cfg = traj.cfg;
  double g = 0.0;
  for (int c = 0; c < cfg.n_steps; ++c) g += cfg.dt * inner(adj.u_star.at(c + 1), laplacian(traj.u.at(c)));
  return g;
}

}  // namespace fmadj
