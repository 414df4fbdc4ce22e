#pragma once

#include <utility>

#include "fmadj/grid.hpp"

namespace fmadj {

// Quadratic interpolating kernel with support 1.5 cells. Used for mapping and
// semi-Lagrangian sampling.
double w2(double r);

// Cubic B-spline (support 2 cells) and its derivative, used for gradients.
double w3(double r);
double dw3(double r);

double interp_w2(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos);
double interp_w2(const ScalarField& f, Vec2 pos);
double interp_w2(const VectorField& f, int comp, Vec2 pos);
Vec2 interp_w2(const VectorField& f, Vec2 pos);

// Min and max of the samples inside the w2 stencil around pos.
std::pair<double, double> stencil_range_w2(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos);

Vec2 grad_w3(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos);
Vec2 grad_w3(const ScalarField& f, Vec2 pos);
// Row c holds the gradient of component c.
Mat2 grad_w3(const VectorField& f, Vec2 pos);

struct VelocitySample {
  Vec2 u;
  Mat2 grad;
};

// Value (w2) and gradient (w3) in one pass; the hot path of map marching.
VelocitySample sample_velocity(const VectorField& f, Vec2 pos);

}  // namespace fmadj
