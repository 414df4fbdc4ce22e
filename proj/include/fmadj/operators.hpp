#pragma once

#include "fmadj/grid.hpp"

namespace fmadj {

// 5-point Laplacian per component. Tangential neighbours outside the box are
// mirrored (free slip); wall-normal faces return 0.
VectorField laplacian(const VectorField& f);

ScalarField divergence(const VectorField& vel);

// Face gradient of a cell field. Faces on the outer walls or touching a solid
// cell get 0.
VectorField gradient(const ScalarField& p, const SolidMask* mask = nullptr);

// Sets wall-normal faces and faces touching solid cells to 0.
void zero_boundary_faces(VectorField& vel, const SolidMask* mask = nullptr);

// ||div u|| dx / ||u||, 0 for a zero field.
double relative_divergence(const VectorField& vel);

// Vorticity dv/dx - du/dy at cell centers from central differences of the
// cell-averaged velocity.
ScalarField curl(const VectorField& vel);

// |u|^2 at cell centers from face averages.
ScalarField cell_speed_squared(const VectorField& vel);

// Cell-averaged velocity components.
Vec2 cell_velocity(const VectorField& vel, int i, int j);

// Samples a cell field's w3 gradient at every face, keeping the face's own
// component: out.u = d/dx at u-faces, out.v = d/dy at v-faces.
VectorField face_gradient_w3(const ScalarField& s);

// Fills a vector field by evaluating fn(x, y) -> Vec2 at face positions.
template <class Fn>
VectorField sample_vector(const GridSpec& g, Fn&& fn) {
  VectorField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) out.u(i, j) = fn(g.u_face(i, j)).x;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.v(i, j) = fn(g.v_face(i, j)).y;
  return out;
}

template <class Fn>
ScalarField sample_scalar(const GridSpec& g, Fn&& fn) {
  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out(i, j) = fn(g.cell_center(i, j));
  return out;
}

}  // namespace fmadj
