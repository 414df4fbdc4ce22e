#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmadj {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Row-major 2x2 matrix. For a velocity gradient, a(i, j) = du_i / dx_j.
struct Mat2 {
  double a00 = 1.0, a01 = 0.0;
  double a10 = 0.0, a11 = 1.0;

  static constexpr Mat2 identity() { return {}; }
  static constexpr Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }

  constexpr Vec2 operator*(Vec2 v) const { return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y}; }
  constexpr Mat2 operator*(const Mat2& o) const {
    return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
            a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
  }
  constexpr Mat2 operator+(const Mat2& o) const {
    return {a00 + o.a00, a01 + o.a01, a10 + o.a10, a11 + o.a11};
  }
  constexpr Mat2 operator-(const Mat2& o) const {
    return {a00 - o.a00, a01 - o.a01, a10 - o.a10, a11 - o.a11};
  }
  constexpr Mat2 operator*(double s) const { return {a00 * s, a01 * s, a10 * s, a11 * s}; }
  constexpr Mat2 transposed() const { return {a00, a10, a01, a11}; }
  constexpr double det() const { return a00 * a11 - a01 * a10; }
  /// Transpose-times-vector without forming the transpose.
  constexpr Vec2 tmul(Vec2 v) const { return {a00 * v.x + a10 * v.y, a01 * v.x + a11 * v.y}; }
  double frobenius() const { return std::sqrt(a00 * a00 + a01 * a01 + a10 * a10 + a11 * a11); }
  constexpr bool operator==(const Mat2&) const = default;
};

/// Where samples of a field live on the staggered grid.
enum class Stagger { Cell, UFace, VFace };

/// Uniform 2D grid. `origin` is the lower-left domain corner, so the center of
/// cell (i, j) is origin + (i + 1/2, j + 1/2) * dx.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  Vec2 origin{};

  void validate() const;

  double width() const { return nx * dx; }
  double height() const { return ny * dx; }

  Vec2 cell_center(int i, int j) const { return {origin.x + (i + 0.5) * dx, origin.y + (j + 0.5) * dx}; }
  Vec2 u_face(int i, int j) const { return {origin.x + i * dx, origin.y + (j + 0.5) * dx}; }
  Vec2 v_face(int i, int j) const { return {origin.x + (i + 0.5) * dx, origin.y + j * dx}; }
  Vec2 sample_position(Stagger s, int i, int j) const;

  int samples_x(Stagger s) const { return s == Stagger::UFace ? nx + 1 : nx; }
  int samples_y(Stagger s) const { return s == Stagger::VFace ? ny + 1 : ny; }

  /// Clamp a world position into the closed domain box.
  Vec2 clamp(Vec2 p) const;

  bool operator==(const GridSpec&) const = default;
};

/// Offset of sample (0, 0) from the origin, in cells.
constexpr Vec2 stagger_offset(Stagger s) {
  switch (s) {
    case Stagger::UFace: return {0.0, 0.5};
    case Stagger::VFace: return {0.5, 0.0};
    default: return {0.5, 0.5};
  }
}

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major 2D array, i fastest.
class Array2 {
 public:
  Array2() = default;
  Array2(int ni, int nj, double value = 0.0) : ni_(ni), nj_(nj), data_(std::size_t(ni) * nj, value) {}

  int ni() const { return ni_; }
  int nj() const { return nj_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int i, int j) { return data_[std::size_t(j) * ni_ + i]; }
  double operator()(int i, int j) const { return data_[std::size_t(j) * ni_ + i]; }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  /// Edge-replicating access for stencils that reach past the array.
  double clamped(int i, int j) const {
    i = i < 0 ? 0 : (i >= ni_ ? ni_ - 1 : i);
    j = j < 0 ? 0 : (j >= nj_ ? nj_ - 1 : j);
    return (*this)(i, j);
  }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v);
  bool same_shape(const Array2& o) const { return ni_ == o.ni_ && nj_ == o.nj_; }
  bool all_finite() const;
  double min() const;
  double max() const;

  bool operator==(const Array2&) const = default;

 private:
  int ni_ = 0;
  int nj_ = 0;
  std::vector<double> data_;
};

/// Cell-centered scalar (pressure, passive field, their adjoints).
struct ScalarField {
  GridSpec grid;
  Array2 values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0) : grid(g), values(g.nx, g.ny, fill) {}

  double& operator()(int i, int j) { return values(i, j); }
  double operator()(int i, int j) const { return values(i, j); }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  void axpy(double a, const ScalarField& x);

  bool operator==(const ScalarField&) const = default;
};

/// MAC velocity: u on x-faces ((nx+1) x ny), v on y-faces (nx x (ny+1)).
struct VectorField {
  GridSpec grid;
  Array2 u;
  Array2 v;

  VectorField() = default;
  explicit VectorField(const GridSpec& g, double fill = 0.0)
      : grid(g), u(g.nx + 1, g.ny, fill), v(g.nx, g.ny + 1, fill) {}

  Array2& component(int c) { return c == 0 ? u : v; }
  const Array2& component(int c) const { return c == 0 ? u : v; }

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
  void axpy(double a, const VectorField& x);
  bool all_finite() const { return u.all_finite() && v.all_finite(); }

  bool operator==(const VectorField&) const = default;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/// Quadrature inner products: sum over samples times dx^2.
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);
double l2_norm(const ScalarField& a);
double l2_norm(const VectorField& a);
double kinetic_energy(const VectorField& u);
double total_mass(const ScalarField& s);

/// ||a - b|| / ||b||, with 0/0 defined as 0.
double relative_l2(const VectorField& a, const VectorField& b);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

/// Cell occupancy for axis-aligned solid obstacles; nonzero = solid.
struct SolidMask {
  int nx = 0;
  int ny = 0;
  std::vector<unsigned char> solid;

  SolidMask() = default;
  SolidMask(int nx_, int ny_) : nx(nx_), ny(ny_), solid(std::size_t(nx_) * ny_, 0) {}

  bool is_solid(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return true;
    return solid[std::size_t(j) * nx + i] != 0;
  }
  void set_box(int i0, int j0, int i1, int j1);
  bool any() const;
};

}  // namespace fmadj
