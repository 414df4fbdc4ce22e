#pragma once

#include "fmadj/flowmap.hpp"
#include "fmadj/grid.hpp"

// Serial, deliberately naive versions of the parallel kernels. Tests compare
// the OpenMP paths against these; the benchmark uses them as a baseline.
namespace fmadj::reference {

// Sums w2 weights over every index of the axis instead of a 3-tap stencil.
double interp_w2(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos);
Vec2 interp_w2(const VectorField& f, Vec2 pos);
Vec2 grad_w3(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos);

VectorField laplacian(const VectorField& f);
ScalarField divergence(const VectorField& vel);
VectorField grad_transpose_product(const VectorField& u, const VectorField& w);
VectorField sl_advect(const VectorField& q, const VectorField& u_mid, double dt_signed);
ScalarField sl_advect(const ScalarField& q, const VectorField& u_mid, double dt_signed);

// RK4 on one sample, Jacobian by central differences of the position update.
void march_sample(Vec2& x, Mat2& J, const VectorField& u_mid, double dt_signed);
void march(SampledMap& map, const VectorField& u_mid, double dt_signed);

}  // namespace fmadj::reference
