#include "fmadj/operators.hpp"

#include <cmath>

#include "fmadj/kernels.hpp"

namespace fmadj {

namespace {

// Interior stencil on one component array. `normal_axis` is 0 for u (x-normal
// walls at i = 0, ni - 1) and 1 for v.
void laplace_component(const Array2& a, Array2& out, int normal_axis, double inv_dx2) {
  const int ni = a.ni(), nj = a.nj();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < nj; ++j) {
    for (int i = 0; i < ni; ++i) {
      const bool wall = normal_axis == 0 ? (i == 0 || i == ni - 1) : (j == 0 || j == nj - 1);
      if (wall) {
        out(i, j) = 0.0;
        continue;
      }
      const double c = a(i, j);
      // Mirrored neighbours contribute a zero difference.
      const double l = i > 0 ? a(i - 1, j) - c : 0.0;
      const double r = i < ni - 1 ? a(i + 1, j) - c : 0.0;
      const double d = j > 0 ? a(i, j - 1) - c : 0.0;
      const double u = j < nj - 1 ? a(i, j + 1) - c : 0.0;
      out(i, j) = (l + r + d + u) * inv_dx2;
    }
  }
}

}  // namespace

VectorField laplacian(const VectorField& f) {
  VectorField out(f.grid);
  const double inv = 1.0 / (f.grid.dx * f.grid.dx);
  laplace_component(f.u, out.u, 0, inv);
  laplace_component(f.v, out.v, 1, inv);
  return out;
}

ScalarField divergence(const VectorField& vel) {
  const GridSpec& g = vel.grid;
  ScalarField out(g);
  const double inv = 1.0 / g.dx;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out(i, j) = ((vel.u(i + 1, j) - vel.u(i, j)) + (vel.v(i, j + 1) - vel.v(i, j))) * inv;
  return out;
}

VectorField gradient(const ScalarField& p, const SolidMask* mask) {
  const GridSpec& g = p.grid;
  VectorField out(g);
  const double inv = 1.0 / g.dx;
  const bool use_mask = mask && mask->any();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      if (use_mask && (mask->is_solid(i - 1, j) || mask->is_solid(i, j))) continue;
      out.u(i, j) = (p(i, j) - p(i - 1, j)) * inv;
    }
#pragma omp parallel for schedule(static)
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (use_mask && (mask->is_solid(i, j - 1) || mask->is_solid(i, j))) continue;
      out.v(i, j) = (p(i, j) - p(i, j - 1)) * inv;
    }
  return out;
}

void zero_boundary_faces(VectorField& vel, const SolidMask* mask) {
  const GridSpec& g = vel.grid;
  for (int j = 0; j < g.ny; ++j) vel.u(0, j) = vel.u(g.nx, j) = 0.0;
  for (int i = 0; i < g.nx; ++i) vel.v(i, 0) = vel.v(i, g.ny) = 0.0;
  if (!mask || !mask->any()) return;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i)
      if (mask->is_solid(i - 1, j) || mask->is_solid(i, j)) vel.u(i, j) = 0.0;
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (mask->is_solid(i, j - 1) || mask->is_solid(i, j)) vel.v(i, j) = 0.0;
}

double relative_divergence(const VectorField& vel) {
  const double n = l2_norm(vel);
  if (n == 0.0) return 0.0;
  return l2_norm(divergence(vel)) * vel.grid.dx / n;
}

Vec2 cell_velocity(const VectorField& vel, int i, int j) {
  return {0.5 * (vel.u(i, j) + vel.u(i + 1, j)), 0.5 * (vel.v(i, j) + vel.v(i, j + 1))};
}

ScalarField curl(const VectorField& vel) {
  const GridSpec& g = vel.grid;
  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int il = i > 0 ? i - 1 : i, ir = i < g.nx - 1 ? i + 1 : i;
      const int jd = j > 0 ? j - 1 : j, ju = j < g.ny - 1 ? j + 1 : j;
      const double dvdx = (cell_velocity(vel, ir, j).y - cell_velocity(vel, il, j).y) / ((ir - il) * g.dx);
      const double dudy = (cell_velocity(vel, i, ju).x - cell_velocity(vel, i, jd).x) / ((ju - jd) * g.dx);
      out(i, j) = dvdx - dudy;
    }
  return out;
}

ScalarField cell_speed_squared(const VectorField& vel) {
  const GridSpec& g = vel.grid;
  ScalarField out(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 c = cell_velocity(vel, i, j);
      out(i, j) = c.x * c.x + c.y * c.y;
    }
  return out;
}

VectorField face_gradient_w3(const ScalarField& s) {
  const GridSpec& g = s.grid;
  VectorField out(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) out.u(i, j) = grad_w3(s, g.u_face(i, j)).x;
#pragma omp parallel for schedule(static)
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.v(i, j) = grad_w3(s, g.v_face(i, j)).y;
  return out;
}

}  // namespace fmadj
