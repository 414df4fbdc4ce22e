#pragma once

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fmadj/grid.hpp"

namespace fmadj {

struct PoissonConfig {
  double tolerance = 1e-6;
  int max_iterations = 500;
  int mg_levels = 0;  // 0 picks the deepest hierarchy the grid allows
  int pre_sweeps = 2;
  int post_sweeps = 2;

  void validate(const GridSpec& g) const;
};

// Deepest multigrid hierarchy for a grid: halve while both sides stay even and
// at least 4 cells.
int max_mg_levels(int nx, int ny);

struct BoundarySpec {
  // left, right, bottom, top. Only fully walled boxes are supported.
  std::array<bool, 4> walls{true, true, true, true};
  SolidMask solids;

  void validate(const GridSpec& g) const;
  const SolidMask* mask() const { return solids.nx > 0 ? &solids : nullptr; }
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(double residual, int iterations);
  double residual;
  int iterations;
};

struct PoissonStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Discrete Laplacian div(grad p) with Neumann walls and solid cells, computed in
// the same arithmetic order as divergence(gradient(p)).
ScalarField poisson_apply(const ScalarField& p, const BoundarySpec& bc);

// MGPCG solver for lap(x) = rhs with zero-mean pinning. Owns its hierarchy and
// scratch buffers; one solve at a time per instance.
class PoissonSolver {
 public:
  PoissonSolver(const GridSpec& g, const BoundarySpec& bc, const PoissonConfig& cfg);
  ~PoissonSolver();
  PoissonSolver(PoissonSolver&&) noexcept;
  PoissonSolver& operator=(PoissonSolver&&) noexcept;

  ScalarField solve(const ScalarField& rhs, PoissonStats* stats = nullptr);
  int levels() const;

  // Called with (iteration, relative residual) after every PCG iteration.
  std::function<void(int, double)> on_iteration;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ScalarField solve_poisson(const ScalarField& rhs, const BoundarySpec& bc, const PoissonConfig& cfg,
                          PoissonStats* stats = nullptr);

struct Projection {
  VectorField velocity;
  // Pressure potential phi = (dt / rho) p with rho = 1; velocity = input - grad phi.
  ScalarField phi;
  PoissonStats stats;
};

class Projector {
 public:
  Projector(const GridSpec& g, const BoundarySpec& bc, const PoissonConfig& cfg);
  Projection project(const VectorField& vel);
  const BoundarySpec& boundary() const { return bc_; }

 private:
  BoundarySpec bc_;
  PoissonSolver solver_;
};

Projection project(const VectorField& vel, const BoundarySpec& bc, const PoissonConfig& cfg);

}  // namespace fmadj
