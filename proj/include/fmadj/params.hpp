#pragma once

#include <optional>
#include <vector>

#include "fmadj/adjoint.hpp"
#include "fmadj/forward.hpp"

namespace fmadj {

// Gaussian wind fields f_i = w_i exp(-a |x - c_i|^2). Strengths are
// piecewise-constant in time over windows of `steps_per_window` steps; centers
// are shared by all windows.
struct GaussianWindSet {
  double sharpness = 1.0;
  int steps_per_window = 1;
  int windows = 1;
  std::vector<Vec2> centers;
  std::vector<Vec2> strengths;  // windows x count, window-major

  std::size_t count() const { return centers.size(); }
  Vec2& strength(int window, std::size_t i) { return strengths[std::size_t(window) * count() + i]; }
  Vec2 strength(int window, std::size_t i) const { return strengths[std::size_t(window) * count() + i]; }
  int window_of(int step) const;
  void validate(const GridSpec& g, int n_steps, std::size_t cap = 512) const;
};

VectorField wind_force_field(const GaussianWindSet& set, int step, const GridSpec& g);
ForceProvider wind_force_provider(const GaussianWindSet& set);

struct WindGradient {
  std::vector<Vec2> strengths;  // same layout as GaussianWindSet::strengths
  std::vector<Vec2> centers;
};

// dL/df_c = dt u*_{c+1}; chained through the Gaussian profiles.
WindGradient wind_gradient(const AdjointTrajectory& adj, const GaussianWindSet& set, const SimConfig& cfg);

struct VortexBlob {
  Vec2 center;
  double strength = 0.0;
  double radius = 0.1;
};

struct VortexBlobSet {
  std::vector<VortexBlob> blobs;
  void validate(const GridSpec& g) const;
};

// Vorticity sum_i w_i exp(-|x - c_i|^2 / r_i^2) at grid nodes.
std::vector<double> blob_vorticity_nodes(const VortexBlobSet& set, const GridSpec& g);

// Streamfunction with psi = 0 on the walls, velocity u = dpsi/dy, v = -dpsi/dx,
// then one projection.
VectorField blobs_to_initial_velocity(const VortexBlobSet& set, const GridSpec& g, const BoundarySpec& bc,
                                      const PoissonConfig& pc);

struct BlobGradient {
  std::vector<double> strength;
  std::vector<Vec2> center;
  std::vector<double> radius;
};

// Strength entries from the unit-blob velocity basis; centers and radii by
// central differences of the induced velocity with step h (relative to dx).
BlobGradient blob_gradient(const VectorField& u_star_0, const VortexBlobSet& set, const BoundarySpec& bc,
                           const PoissonConfig& pc, double h = 1e-3);

// g_nu = sum_c dt <u*_{c+1}, lap(u_c)>.
double viscosity_gradient(const TrajectoryRecord& traj, const AdjointTrajectory& adj);

}  // namespace fmadj
