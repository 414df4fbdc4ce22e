#include "fmadj/reference.hpp"

#include <algorithm>
#include <cmath>

#include "fmadj/kernels.hpp"

namespace fmadj::reference {

double interp_w2(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos);
Vec2 interp_w2(const VectorField& f, Vec2 pos);

namespace {

Vec2 index_coords(Stagger s, const GridSpec& g, Vec2 pos) {
  const Vec2 p = g.clamp(pos);
  const Vec2 o = stagger_offset(s);
  return {(p.x - g.origin.x) / g.dx - o.x, (p.y - g.origin.y) / g.dx - o.y};
}

template <class K>
double brute(const Array2& a, double sx, double sy, K kx, K ky) {
  double acc = 0.0;
  for (int j = -3; j < a.nj() + 3; ++j) {
    const double wy = ky(sy - j);
    if (wy == 0.0) continue;
    for (int i = -3; i < a.ni() + 3; ++i) {
      const double wx = kx(sx - i);
      if (wx != 0.0) acc += wx * wy * a.clamped(i, j);
    }
  }
  return acc;
}

Vec2 backtrace(const VectorField& u, Vec2 x, double dt) {
  const Vec2 xm = x - reference::interp_w2(u, x) * (0.5 * dt);
  return x - reference::interp_w2(u, xm) * dt;
}

Vec2 rk4(Vec2 x, const VectorField& u, double dt) {
  const Vec2 k1 = reference::interp_w2(u, x);
  const Vec2 k2 = reference::interp_w2(u, x + k1 * (0.5 * dt));
  const Vec2 k3 = reference::interp_w2(u, x + k2 * (0.5 * dt));
  const Vec2 k4 = reference::interp_w2(u, x + k3 * dt);
  return x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
}

}  // namespace

double interp_w2(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos) {
  const Vec2 q = index_coords(s, g, pos);
  return brute(a, q.x, q.y, fmadj::w2, fmadj::w2);
}

Vec2 interp_w2(const VectorField& f, Vec2 pos) {
  return {reference::interp_w2(f.u, Stagger::UFace, f.grid, pos), reference::interp_w2(f.v, Stagger::VFace, f.grid, pos)};
}

Vec2 grad_w3(const Array2& a, Stagger s, const GridSpec& g, Vec2 pos) {
  const Vec2 q = index_coords(s, g, pos);
  const double gx = brute(a, q.x, q.y, fmadj::dw3, fmadj::w3);
  double gy = 0.0;
  for (int j = -3; j < a.nj() + 3; ++j)
    for (int i = -3; i < a.ni() + 3; ++i) gy += fmadj::w3(q.x - i) * fmadj::dw3(q.y - j) * a.clamped(i, j);
  return Vec2{gx, gy} * (1.0 / g.dx);
}

VectorField laplacian(const VectorField& f) {
  const GridSpec& g = f.grid;
  const double h2 = g.dx * g.dx;
  VectorField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      const double up = j + 1 < g.ny ? f.u(i, j + 1) : f.u(i, j);
      const double dn = j > 0 ? f.u(i, j - 1) : f.u(i, j);
      out.u(i, j) = (f.u(i - 1, j) + f.u(i + 1, j) + up + dn - 4.0 * f.u(i, j)) / h2;
    }
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double rt = i + 1 < g.nx ? f.v(i + 1, j) : f.v(i, j);
      const double lt = i > 0 ? f.v(i - 1, j) : f.v(i, j);
      out.v(i, j) = (lt + rt + f.v(i, j - 1) + f.v(i, j + 1) - 4.0 * f.v(i, j)) / h2;
    }
  return out;
}

ScalarField divergence(const VectorField& vel) {
  const GridSpec& g = vel.grid;
  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out(i, j) = (vel.u(i + 1, j) - vel.u(i, j) + vel.v(i, j + 1) - vel.v(i, j)) / g.dx;
  return out;
}

VectorField grad_transpose_product(const VectorField& u, const VectorField& w) {
  const GridSpec& g = u.grid;
  VectorField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const Vec2 x = g.u_face(i, j);
      const Vec2 wx = reference::interp_w2(w, x);
      out.u(i, j) = reference::grad_w3(u.u, Stagger::UFace, g, x).x * wx.x + reference::grad_w3(u.v, Stagger::VFace, g, x).x * wx.y;
    }
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 x = g.v_face(i, j);
      const Vec2 wx = reference::interp_w2(w, x);
      out.v(i, j) = reference::grad_w3(u.u, Stagger::UFace, g, x).y * wx.x + reference::grad_w3(u.v, Stagger::VFace, g, x).y * wx.y;
    }
  return out;
}

VectorField sl_advect(const VectorField& q, const VectorField& u_mid, double dt_signed) {
  const GridSpec& g = q.grid;
  VectorField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      out.u(i, j) = reference::interp_w2(q.u, Stagger::UFace, g, backtrace(u_mid, g.u_face(i, j), dt_signed));
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out.v(i, j) = reference::interp_w2(q.v, Stagger::VFace, g, backtrace(u_mid, g.v_face(i, j), dt_signed));
  return out;
}

ScalarField sl_advect(const ScalarField& q, const VectorField& u_mid, double dt_signed) {
  const GridSpec& g = q.grid;
  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out(i, j) = reference::interp_w2(q.values, Stagger::Cell, g, backtrace(u_mid, g.cell_center(i, j), dt_signed));
  return out;
}

void march_sample(Vec2& x, Mat2& J, const VectorField& u_mid, double dt_signed) {
  const GridSpec& g = u_mid.grid;
  const double e = 1e-6 * g.dx;
  const Vec2 px = rk4(x + Vec2{e, 0.0}, u_mid, dt_signed), mx = rk4(x - Vec2{e, 0.0}, u_mid, dt_signed);
  const Vec2 py = rk4(x + Vec2{0.0, e}, u_mid, dt_signed), my = rk4(x - Vec2{0.0, e}, u_mid, dt_signed);
  const Mat2 step{(px.x - mx.x) / (2 * e), (py.x - my.x) / (2 * e), (px.y - mx.y) / (2 * e),
                  (py.y - my.y) / (2 * e)};
  J = step * J;
  x = g.clamp(rk4(x, u_mid, dt_signed));
}

void march(SampledMap& map, const VectorField& u_mid, double dt_signed) {
  for (std::size_t k = 0; k < map.pos_u.size(); ++k) march_sample(map.pos_u[k], map.jac_u[k], u_mid, dt_signed);
  for (std::size_t k = 0; k < map.pos_v.size(); ++k) march_sample(map.pos_v[k], map.jac_v[k], u_mid, dt_signed);
}

}  // namespace fmadj::reference
