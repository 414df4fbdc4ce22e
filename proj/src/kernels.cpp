#include "fmadj/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace fmadj {

double w2(double r) {
  r = std::abs(r);
  if (r < 0.5) return 1.0 - 2.0 * r * r;
  if (r < 1.5) return r * r - 2.5 * r + 1.5;
  return 0.0;
}

double w3(double r) {
  r = std::abs(r);
  if (r < 1.0) return 2.0 / 3.0 - r * r + 0.5 * r * r * r;
  if (r < 2.0) {
    const double t = 2.0 - r;
    return t * t * t / 6.0;
  }
  return 0.0;
}

double dw3(double r) {
  const double a = std::abs(r);
  const double sg = r < 0.0 ? -1.0 : 1.0;
  if (a < 1.0) return sg * (-2.0 * a + 1.5 * a * a);
  if (a < 2.0) {
    const double t = 2.0 - a;
    return -sg * 0.5 * t * t;
  }
  return 0.0;
}

namespace {

struct Stencil3 {
  int base;
  double w[3];
};

struct Stencil4 {
  int base;
  double w[4];
  double dw[4];
};

// Continuous index coordinate of pos along one axis for the given stagger.
inline Vec2 index_coords(Stagger s, const GridSpec& g, Vec2 pos) {
  const Vec2 p = g.clamp(pos);
  const Vec2 o = stagger_offset(s);
  return {(p.x - g.origin.x) / g.dx - o.x, (p.y - g.origin.y) / g.dx - o.y};
}

inline Stencil3 stencil3(double s) {
  Stencil3 st;
  st.base = static_cast<int>(std::floor(s - 0.5));
  for (int k = 0; k < 3; ++k) st.w[k] = w2(s - (st.base + k));
  return st;
}

inline Stencil4 stencil4(double s) {
  Stencil4 st;
  st.base = static_cast<int>(std::floor(s)) - 1;
  for (int k = 0; k < 4; ++k) {
    const double r = s - (st.base + k);
    st.w[k] = w3(r);
    st.dw[k] = dw3(r);
  }
  return st;
}

inline int clampi(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

inline double sum3(const Array2& a, const Stencil3& sx, const Stencil3& sy) {
  double acc = 0.0;
  for (int b = 0; b < 3; ++b) {
    const int j = clampi(sy.base + b, a.nj());
    double row = 0.0;
    for (int c = 0; c < 3; ++c) row += sx.w[c] * a(clampi(sx.base + c, a.ni()), j);
    acc += sy.w[b] * row;
  }
  return acc;
}

// d/dx and d/dy of the cubic-spline reconstruction, in index units.
inline Vec2 grad4(const Array2& a, const Stencil4& sx, const Stencil4& sy) {
  double gx = 0.0, gy = 0.0;
  for (int b = 0; b < 4; ++b) {
    const int j = clampi(sy.base + b, a.nj());
    double rw = 0.0, rdw = 0.0;
    for (int c = 0; c < 4; ++c) {
      const double v = a(clampi(sx.base + c, a.ni()), j);
      rw += sx.w[c] * v;
      rdw += sx.dw[c] * v;
    }
    gx += sy.w[b] * rdw;
    gy += sy.dw[b] * rw;
  }
  return {gx, gy};
}

}  // namespace

double interp_w2(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos) {
  const Vec2 q = index_coords(s, g, pos);
  return sum3(a, stencil3(q.x), stencil3(q.y));
}

double interp_w2(const ScalarField& f, Vec2 pos) { return interp_w2(f.values, Stagger::Cell, f.grid, pos); }

double interp_w2(const VectorField& f, int comp, Vec2 pos) {
  return comp == 0 ? interp_w2(f.u, Stagger::UFace, f.grid, pos) : interp_w2(f.v, Stagger::VFace, f.grid, pos);
}

Vec2 interp_w2(const VectorField& f, Vec2 pos) {
  return {interp_w2(f.u, Stagger::UFace, f.grid, pos), interp_w2(f.v, Stagger::VFace, f.grid, pos)};
}

std::pair<double, double> stencil_range_w2(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos) {
  const Vec2 q = index_coords(s, g, pos);
  const int bx = static_cast<int>(std::floor(q.x - 0.5));
  const int by = static_cast<int>(std::floor(q.y - 0.5));
  double lo = INFINITY, hi = -INFINITY;
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 3; ++c) {
      const double v = a(clampi(bx + c, a.ni()), clampi(by + b, a.nj()));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return {lo, hi};
}

Vec2 grad_w3(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos) {
  const Vec2 q = index_coords(s, g, pos);
  return grad4(a, stencil4(q.x), stencil4(q.y)) * (1.0 / g.dx);
}

Vec2 grad_w3(const ScalarField& f, Vec2 pos) { return grad_w3(f.values, Stagger::Cell, f.grid, pos); }

Mat2 grad_w3(const VectorField& f, Vec2 pos) {
  const Vec2 gu = grad_w3(f.u, Stagger::UFace, f.grid, pos);
  const Vec2 gv = grad_w3(f.v, Stagger::VFace, f.grid, pos);
  return {gu.x, gu.y, gv.x, gv.y};
}

VelocitySample sample_velocity(const VectorField& f, Vec2 pos) {
  const GridSpec& g = f.grid;
  const double inv = 1.0 / g.dx;
  const Vec2 qu = index_coords(Stagger::UFace, g, pos);
  const Vec2 qv = index_coords(Stagger::VFace, g, pos);
  VelocitySample out;
  out.u.x = sum3(f.u, stencil3(qu.x), stencil3(qu.y));
  out.u.y = sum3(f.v, stencil3(qv.x), stencil3(qv.y));
  const Vec2 gu = grad4(f.u, stencil4(qu.x), stencil4(qu.y));
  const Vec2 gv = grad4(f.v, stencil4(qv.x), stencil4(qv.y));
  out.grad = {gu.x * inv, gu.y * inv, gv.x * inv, gv.y * inv};
  return out;
}

}  // namespace fmadj
