#include "fmadj/flowmap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unistd.h>

#include "fmadj/kernels.hpp"
#include "fmadj/snapshot.hpp"

namespace fmadj {

SampledMap::SampledMap(const GridSpec& g) : grid(g) {
  pos_u.resize(std::size_t(g.nx + 1) * g.ny);
  pos_v.resize(std::size_t(g.nx) * (g.ny + 1));
  jac_u.resize(pos_u.size());
  jac_v.resize(pos_v.size());
  reset();
}

void SampledMap::reset() {
  const GridSpec& g = grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) pos_u[std::size_t(j) * (g.nx + 1) + i] = g.u_face(i, j);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) pos_v[std::size_t(j) * g.nx + i] = g.v_face(i, j);
  std::fill(jac_u.begin(), jac_u.end(), Mat2::identity());
  std::fill(jac_v.begin(), jac_v.end(), Mat2::identity());
}

bool SampledMap::is_identity() const {
  SampledMap id(grid);
  return pos_u == id.pos_u && pos_v == id.pos_v && jac_u == id.jac_u && jac_v == id.jac_v;
}

bool SampledMap::jacobians_valid() const {
  auto ok = [](const Mat2& m) {
    const double d = m.det();
    return std::isfinite(d) && d != 0.0;
  };
  return std::all_of(jac_u.begin(), jac_u.end(), ok) && std::all_of(jac_v.begin(), jac_v.end(), ok);
}

Vec2& SampledMap::pos(Stagger s, int i, int j) {
  return s == Stagger::UFace ? pos_u[std::size_t(j) * (grid.nx + 1) + i] : pos_v[std::size_t(j) * grid.nx + i];
}

Vec2 SampledMap::pos(Stagger s, int i, int j) const {
  return s == Stagger::UFace ? pos_u[std::size_t(j) * (grid.nx + 1) + i] : pos_v[std::size_t(j) * grid.nx + i];
}

const Mat2& SampledMap::jac(Stagger s, int i, int j) const {
  return s == Stagger::UFace ? jac_u[std::size_t(j) * (grid.nx + 1) + i] : jac_v[std::size_t(j) * grid.nx + i];
}

Vec2 SampledMap::cell_pos(int i, int j) const {
  const Vec2 dl = pos(Stagger::UFace, i, j) - grid.u_face(i, j);
  const Vec2 dr = pos(Stagger::UFace, i + 1, j) - grid.u_face(i + 1, j);
  return grid.cell_center(i, j) + (dl + dr) * 0.5;
}

MissingCheckpoint::MissingCheckpoint(int s)
    : std::runtime_error("missing midpoint checkpoint for step " + std::to_string(s)), step(s) {}

MidpointBuffer::MidpointBuffer(std::size_t memory_capacity, std::filesystem::path spill_dir)
    : capacity_(memory_capacity), dir_(std::move(spill_dir)) {}

MidpointBuffer::~MidpointBuffer() {
  std::error_code ec;
  for (auto& [s, p] : disk_) std::filesystem::remove(p, ec);
  if (owns_dir_) std::filesystem::remove(dir_, ec);
}

MidpointBuffer::MidpointBuffer(MidpointBuffer&& o) noexcept
    : capacity_(o.capacity_),
      dir_(std::move(o.dir_)),
      owns_dir_(o.owns_dir_),
      grid_(o.grid_),
      memory_(std::move(o.memory_)),
      disk_(std::move(o.disk_)) {
  o.owns_dir_ = false;
  o.disk_.clear();
}

MidpointBuffer& MidpointBuffer::operator=(MidpointBuffer&& o) noexcept {
  if (this != &o) {
    clear();
    capacity_ = o.capacity_;
    dir_ = std::move(o.dir_);
    owns_dir_ = o.owns_dir_;
    grid_ = o.grid_;
    memory_ = std::move(o.memory_);
    disk_ = std::move(o.disk_);
    o.owns_dir_ = false;
    o.disk_.clear();
  }
  return *this;
}

void MidpointBuffer::ensure_spill_dir() {
  if (dir_.empty()) {
    static std::atomic<int> counter{0};
    dir_ = std::filesystem::temp_directory_path() /
           ("fmadj_umid_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    owns_dir_ = !std::filesystem::exists(dir_);
  }
  std::filesystem::create_directories(dir_);
}

std::filesystem::path MidpointBuffer::spill_path(int step) const {
  return dir_ / ("umid_" + std::to_string(step) + ".fma");
}

void MidpointBuffer::store(int step, const VectorField& u_mid) {
  if (empty()) {
    grid_ = u_mid.grid;
  } else {
    require_same_grid(grid_, u_mid.grid, "midpoint buffer");
  }
  disk_.erase(step);
  memory_[step] = std::make_shared<const VectorField>(u_mid);
  while (capacity_ > 0 && memory_.size() > capacity_) {
    auto oldest = memory_.begin();
    ensure_spill_dir();
    const auto path = spill_path(oldest->first);
    write_snapshot(path, *oldest->second);
    disk_[oldest->first] = path;
    memory_.erase(oldest);
  }
}

std::shared_ptr<const VectorField> MidpointBuffer::get(int step) const {
  if (auto it = memory_.find(step); it != memory_.end()) return it->second;
  if (auto it = disk_.find(step); it != disk_.end())
    return std::make_shared<const VectorField>(read_vector_snapshot(it->second));
  throw MissingCheckpoint(step);
}

bool MidpointBuffer::contains(int step) const { return memory_.count(step) || disk_.count(step); }

void MidpointBuffer::clear() {
  std::error_code ec;
  for (auto& [s, p] : disk_) std::filesystem::remove(p, ec);
  disk_.clear();
  memory_.clear();
}

VectorField compute_midpoint_velocity(const VectorField& u, double dt) {
  const GridSpec& g = u.grid;
  VectorField out(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const Vec2 x = g.u_face(i, j);
      out.u(i, j) = interp_w2(u, 0, x - interp_w2(u, x) * (0.5 * dt));
    }
#pragma omp parallel for schedule(static)
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 x = g.v_face(i, j);
      out.v(i, j) = interp_w2(u, 1, x - interp_w2(u, x) * (0.5 * dt));
    }
  return out;
}

namespace {

inline void rk4_sample(Vec2& x, Mat2& J, const VectorField& u, double dt, const GridSpec& g) {
  const VelocitySample s1 = sample_velocity(u, x);
  const Mat2 K1 = s1.grad * J;
  const Vec2 x2 = x + s1.u * (0.5 * dt);
  const Mat2 J2 = J + K1 * (0.5 * dt);
  const VelocitySample s2 = sample_velocity(u, x2);
  const Mat2 K2 = s2.grad * J2;
  const Vec2 x3 = x + s2.u * (0.5 * dt);
  const Mat2 J3 = J + K2 * (0.5 * dt);
  const VelocitySample s3 = sample_velocity(u, x3);
  const Mat2 K3 = s3.grad * J3;
  const Vec2 x4 = x + s3.u * dt;
  const Mat2 J4 = J + K3 * dt;
  const VelocitySample s4 = sample_velocity(u, x4);
  const Mat2 K4 = s4.grad * J4;
  x = g.clamp(x + (s1.u + s2.u * 2.0 + s3.u * 2.0 + s4.u) * (dt / 6.0));
  J = J + (K1 + K2 * 2.0 + K3 * 2.0 + K4) * (dt / 6.0);
}

}  // namespace

void march(SampledMap& map, const VectorField& u_mid, double dt_signed) {
  require_same_grid(map.grid, u_mid.grid, "map march");
  const GridSpec& g = map.grid;
  const std::ptrdiff_t nu = std::ptrdiff_t(map.pos_u.size()), nv = std::ptrdiff_t(map.pos_v.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < nu; ++k) rk4_sample(map.pos_u[k], map.jac_u[k], u_mid, dt_signed, g);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < nv; ++k) rk4_sample(map.pos_v[k], map.jac_v[k], u_mid, dt_signed, g);
}

SampledMap integrate_map(const MidpointBuffer& buffer, int from_step, int to_step, double dt) {
  if (buffer.empty()) throw MissingCheckpoint(std::min(from_step, to_step));
  SampledMap m(buffer.grid());
  if (to_step > from_step) {
    for (int k = from_step; k < to_step; ++k) march(m, *buffer.get(k), dt);
  } else {
    for (int k = from_step - 1; k >= to_step; --k) march(m, *buffer.get(k), -dt);
  }
  return m;
}

namespace {

// [J^T src(p)]_c for face component c.
inline double pull_component(const VectorField& src, const Mat2& J, Vec2 p, int c) {
  const Vec2 v = interp_w2(src, p);
  const Vec2 r = J.tmul(v);
  return c == 0 ? r.x : r.y;
}

template <class Fn>
void for_each_face(const GridSpec& g, Fn&& fn) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) fn(Stagger::UFace, i, j);
#pragma omp parallel for schedule(static)
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) fn(Stagger::VFace, i, j);
}

inline double& face_ref(VectorField& f, Stagger s, int i, int j) { return s == Stagger::UFace ? f.u(i, j) : f.v(i, j); }

VectorField pull(const VectorField& src, const SampledMap& m) {
  VectorField out(src.grid);
  for_each_face(src.grid, [&](Stagger s, int i, int j) {
    const int c = s == Stagger::UFace ? 0 : 1;
    face_ref(out, s, i, j) = pull_component(src, m.jac(s, i, j), m.pos(s, i, j), c);
  });
  return out;
}

ScalarField pull(const ScalarField& src, const SampledMap& m) {
  const GridSpec& g = src.grid;
  ScalarField out(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out(i, j) = interp_w2(src, m.cell_pos(i, j));
  return out;
}

}  // namespace

VectorField map_covector(const VectorField& src, const SampledMap& back, const SampledMap& fwd, bool bfecc) {
  require_same_grid(src.grid, back.grid, "map_covector");
  VectorField q1 = pull(src, back);
  if (!bfecc) return q1;
  require_same_grid(src.grid, fwd.grid, "map_covector");
  VectorField err = src - pull(q1, fwd);
  q1.axpy(0.5, pull(err, back));
  return q1;
}

ScalarField map_scalar(const ScalarField& src, const SampledMap& back, const SampledMap& fwd, bool bfecc,
                       bool clamp) {
  require_same_grid(src.grid, back.grid, "map_scalar");
  const ScalarField plain = pull(src, back);
  ScalarField out = plain;
  if (bfecc) {
    require_same_grid(src.grid, fwd.grid, "map_scalar");
    ScalarField err = src - pull(out, fwd);
    out.axpy(0.5, pull(err, back));
  }
  if (clamp) {
    const GridSpec& g = src.grid;
    // An out-of-range corrected value falls back to the uncorrected sample,
    // which is then clamped to the stencil range.
#pragma omp parallel for schedule(static)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const auto [lo, hi] = stencil_range_w2(src.values, Stagger::Cell, g, back.cell_pos(i, j));
        if (out(i, j) < lo || out(i, j) > hi) out(i, j) = std::clamp(plain(i, j), lo, hi);
      }
  }
  return out;
}

VectorField mapped_adjoint_velocity(const VectorField& u_star_anchor, const SampledMap& phi_F) {
  return pull(u_star_anchor, phi_F);
}

void accumulate_covector(VectorField& acc, const SampledMap& fwd, const VectorField& increment) {
  require_same_grid(acc.grid, fwd.grid, "path integrator update");
  for_each_face(acc.grid, [&](Stagger s, int i, int j) {
    const int c = s == Stagger::UFace ? 0 : 1;
    face_ref(acc, s, i, j) += pull_component(increment, fwd.jac(s, i, j), fwd.pos(s, i, j), c);
  });
}

void accumulate_scalar(ScalarField& acc, const SampledMap& fwd, const ScalarField& increment) {
  const GridSpec& g = acc.grid;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) acc(i, j) += interp_w2(increment, fwd.cell_pos(i, j));
}

namespace {

inline Vec2 backtrace(const VectorField& u_mid, Vec2 x, double dt) {
  const Vec2 xm = x - interp_w2(u_mid, x) * (0.5 * dt);
  return x - interp_w2(u_mid, xm) * dt;
}

}  // namespace

VectorField sl_advect(const VectorField& q, const VectorField& u_mid, double dt_signed) {
  require_same_grid(q.grid, u_mid.grid, "semi-Lagrangian advection");
  VectorField out(q.grid);
  const GridSpec& g = q.grid;
  for_each_face(g, [&](Stagger s, int i, int j) {
    const int c = s == Stagger::UFace ? 0 : 1;
    face_ref(out, s, i, j) = interp_w2(q, c, backtrace(u_mid, g.sample_position(s, i, j), dt_signed));
  });
  return out;
}

ScalarField sl_advect(const ScalarField& q, const VectorField& u_mid, double dt_signed) {
  require_same_grid(q.grid, u_mid.grid, "semi-Lagrangian advection");
  const GridSpec& g = q.grid;
  ScalarField out(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out(i, j) = interp_w2(q, backtrace(u_mid, g.cell_center(i, j), dt_signed));
  return out;
}

}  // namespace fmadj
