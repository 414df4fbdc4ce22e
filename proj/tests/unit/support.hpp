#pragma once

#include <cmath>
#include <random>

#include "fmadj/grid.hpp"
#include "fmadj/operators.hpp"

namespace fmadj::testing {

// Small hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(unsigned long long seed) : rng_(seed) {}

  double uniform(double a = -1.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Vec2 point(const GridSpec& g, double margin_cells = 0.0) {
    const double m = margin_cells * g.dx;
    return {uniform(g.origin.x + m, g.origin.x + g.width() - m), uniform(g.origin.y + m, g.origin.y + g.height() - m)};
  }

  ScalarField scalar(const GridSpec& g, double amp = 1.0) {
    ScalarField f(g);
    for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = amp * uniform();
    return f;
  }

  // Random face values; wall-normal faces zeroed when `walls` is set.
  VectorField vector(const GridSpec& g, bool walls = true, double amp = 1.0) {
    VectorField f(g);
    for (std::size_t k = 0; k < f.u.size(); ++k) f.u[k] = amp * uniform();
    for (std::size_t k = 0; k < f.v.size(); ++k) f.v[k] = amp * uniform();
    if (walls) zero_boundary_faces(f);
    return f;
  }

  // A smooth random field: a few low Fourier modes.
  VectorField smooth_vector(const GridSpec& g, double amp = 1.0) {
    double a[4], ph[4];
    for (int k = 0; k < 4; ++k) a[k] = amp * uniform(), ph[k] = uniform(0.0, 6.28);
    const double L = g.width();
    return sample_vector(g, [&](Vec2 p) {
      const double x = (p.x - g.origin.x) / L, y = (p.y - g.origin.y) / L;
      return Vec2{a[0] * std::sin(2 * M_PI * x + ph[0]) * std::cos(2 * M_PI * y + ph[1]) + a[1] * std::cos(M_PI * y),
                  a[2] * std::cos(2 * M_PI * x + ph[2]) * std::sin(2 * M_PI * y + ph[3]) + a[3] * std::sin(M_PI * x)};
    });
  }

 private:
  std::mt19937_64 rng_;
};

inline GridSpec unit_grid(int n) { return GridSpec{n, n, 1.0 / n, {0.0, 0.0}}; }

inline double max_abs_diff(const Array2& a, const Array2& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double max_abs_diff(const VectorField& a, const VectorField& b) {
  return std::max(max_abs_diff(a.u, b.u), max_abs_diff(a.v, b.v));
}

// Rigid rotation about the domain center with angular rate w.
inline VectorField rotation(const GridSpec& g, double w) {
  const Vec2 c{g.origin.x + 0.5 * g.width(), g.origin.y + 0.5 * g.height()};
  return sample_vector(g, [&](Vec2 p) { return Vec2{-w * (p.y - c.y), w * (p.x - c.x)}; });
}

}  // namespace fmadj::testing
