#include "fmadj/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fmadj {

void GridSpec::validate() const {
  if (nx < 4 || ny < 4) {
    std::ostringstream os;
    os << "grid must be at least 4x4 cells, got " << nx << "x" << ny;
    throw std::invalid_argument(os.str());
  }
  if (!(dx > 0.0) || !std::isfinite(dx)) throw std::invalid_argument("grid spacing dx must be positive");
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) throw std::invalid_argument("grid origin must be finite");
}

Vec2 GridSpec::sample_position(Stagger s, int i, int j) const {
  const Vec2 o = stagger_offset(s);
  return {origin.x + (i + o.x) * dx, origin.y + (j + o.y) * dx};
}

Vec2 GridSpec::clamp(Vec2 p) const {
  return {std::clamp(p.x, origin.x, origin.x + width()), std::clamp(p.y, origin.y, origin.y + height())};
}

void Array2::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Array2::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double Array2::min() const { return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end()); }
double Array2::max() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ShapeMismatch(std::string("grid mismatch in ") + what);
}

namespace {

void add_scaled(Array2& y, double a, const Array2& x) {
  if (!y.same_shape(x)) throw ShapeMismatch("array shape mismatch");
  double* yd = y.data();
  const double* xd = x.data();
  const std::size_t n = y.size();
  for (std::size_t k = 0; k < n; ++k) yd[k] += a * xd[k];
}

void scale(Array2& y, double s) {
  for (double& v : y.span()) v *= s;
}

double dot(const Array2& a, const Array2& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("array shape mismatch");
  return std::inner_product(a.data(), a.data() + a.size(), b.data(), 0.0);
}

}  // namespace

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  add_scaled(values, 1.0, o.values);
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
  add_scaled(values, -1.0, o.values);
  return *this;
}
ScalarField& ScalarField::operator*=(double s) {
  scale(values, s);
  return *this;
}
void ScalarField::axpy(double a, const ScalarField& x) { add_scaled(values, a, x.values); }

VectorField& VectorField::operator+=(const VectorField& o) {
  add_scaled(u, 1.0, o.u);
  add_scaled(v, 1.0, o.v);
  return *this;
}
VectorField& VectorField::operator-=(const VectorField& o) {
  add_scaled(u, -1.0, o.u);
  add_scaled(v, -1.0, o.v);
  return *this;
}
VectorField& VectorField::operator*=(double s) {
  scale(u, s);
  scale(v, s);
  return *this;
}
void VectorField::axpy(double a, const VectorField& x) {
  add_scaled(u, a, x.u);
  add_scaled(v, a, x.v);
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

double inner(const ScalarField& a, const ScalarField& b) {
  return dot(a.values, b.values) * a.grid.dx * a.grid.dx;
}

double inner(const VectorField& a, const VectorField& b) {
  return (dot(a.u, b.u) + dot(a.v, b.v)) * a.grid.dx * a.grid.dx;
}

double l2_norm(const ScalarField& a) { return std::sqrt(inner(a, a)); }
double l2_norm(const VectorField& a) { return std::sqrt(inner(a, a)); }
double kinetic_energy(const VectorField& u) { return 0.5 * inner(u, u); }

double total_mass(const ScalarField& s) {
  return std::accumulate(s.values.data(), s.values.data() + s.values.size(), 0.0) * s.grid.dx * s.grid.dx;
}

double relative_l2(const VectorField& a, const VectorField& b) {
  const double den = l2_norm(b);
  const double num = l2_norm(a - b);
  if (den == 0.0) return num == 0.0 ? 0.0 : INFINITY;
  return num / den;
}

void SolidMask::set_box(int i0, int j0, int i1, int j1) {
  for (int j = std::max(0, j0); j < std::min(ny, j1); ++j)
    for (int i = std::max(0, i0); i < std::min(nx, i1); ++i) solid[std::size_t(j) * nx + i] = 1;
}

bool SolidMask::any() const {
  return std::any_of(solid.begin(), solid.end(), [](unsigned char c) { return c != 0; });
}

}  // namespace fmadj
