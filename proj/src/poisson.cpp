#include "fmadj/poisson.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "fmadj/operators.hpp"

namespace fmadj {

void PoissonConfig::validate(const GridSpec& g) const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("poisson tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("poisson max_iterations must be >= 1");
  if (pre_sweeps < 0 || post_sweeps < 0) throw std::invalid_argument("poisson sweep counts must be >= 0");
  if (mg_levels < 0 || mg_levels > max_mg_levels(g.nx, g.ny)) {
    std::ostringstream os;
    os << "poisson mg_levels " << mg_levels << " not in [0, " << max_mg_levels(g.nx, g.ny) << "] for a " << g.nx
       << "x" << g.ny << " grid";
    throw std::invalid_argument(os.str());
  }
}

int max_mg_levels(int nx, int ny) {
  int levels = 1;
  while (nx % 2 == 0 && ny % 2 == 0 && nx / 2 >= 4 && ny / 2 >= 4) {
    nx /= 2;
    ny /= 2;
    ++levels;
  }
  return levels;
}

void BoundarySpec::validate(const GridSpec& g) const {
  for (bool w : walls)
    if (!w) throw std::invalid_argument("open boundaries are not supported; every side of the box must be a wall");
  if (solids.nx != 0 && (solids.nx != g.nx || solids.ny != g.ny))
    throw ShapeMismatch("solid mask does not match the grid");
}

NonConvergence::NonConvergence(double res, int its)
    : std::runtime_error("poisson solve did not converge: relative residual " + std::to_string(res) + " after " +
                         std::to_string(its) + " iterations"),
      residual(res),
      iterations(its) {}

namespace {

using Mask = std::vector<unsigned char>;

struct Level {
  int nx = 0, ny = 0;
  double h = 0.0;
  Mask fluid;
  std::vector<double> x, b, r;

  std::size_t idx(int i, int j) const { return std::size_t(j) * nx + i; }
  bool is_fluid(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny && fluid[idx(i, j)]; }
};

// Sum of a per-row quantity in a fixed order so results do not depend on the
// thread count.
template <class RowFn>
double ordered_sum(int rows, RowFn&& fn) {
  std::vector<double> part(rows);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < rows; ++j) part[j] = fn(j);
  double s = 0.0;
  for (double p : part) s += p;
  return s;
}

// lap(p) = div(grad p) on the finest level, matching operators.cpp term order.
void fine_laplacian(const Level& L, const double* p, double* out) {
  const double inv = 1.0 / L.h;
  const int nx = L.nx, ny = L.ny;
  auto gu = [&](int i, int j) -> double {
    if (i <= 0 || i >= nx) return 0.0;
    if (!L.fluid[L.idx(i - 1, j)] || !L.fluid[L.idx(i, j)]) return 0.0;
    return (p[L.idx(i, j)] - p[L.idx(i - 1, j)]) * inv;
  };
  auto gv = [&](int i, int j) -> double {
    if (j <= 0 || j >= ny) return 0.0;
    if (!L.fluid[L.idx(i, j - 1)] || !L.fluid[L.idx(i, j)]) return 0.0;
    return (p[L.idx(i, j)] - p[L.idx(i, j - 1)]) * inv;
  };
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out[L.idx(i, j)] = ((gu(i + 1, j) - gu(i, j)) + (gv(i, j + 1) - gv(i, j))) * inv;
}

// Coarse indices and weights of the bilinear cell-centered prolongation for fine
// cell (fi, fj). Invalid neighbours fall back to the parent.
struct ProlongStencil {
  std::size_t c[4];
  double w[4];
};

ProlongStencil prolong_stencil(const Level& C, int fi, int fj) {
  const int I = fi / 2, J = fj / 2;
  const int sx = (fi % 2 == 0) ? -1 : 1;
  const int sy = (fj % 2 == 0) ? -1 : 1;
  auto pick = [&](int i, int j) { return C.is_fluid(i, j) ? C.idx(i, j) : C.idx(I, J); };
  return {{C.idx(I, J), pick(I + sx, J), pick(I, J + sy), pick(I + sx, J + sy)},
          {9.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 1.0 / 16.0}};
}

}  // namespace

ScalarField poisson_apply(const ScalarField& p, const BoundarySpec& bc) {
  Level L;
  L.nx = p.grid.nx;
  L.ny = p.grid.ny;
  L.h = p.grid.dx;
  L.fluid.assign(std::size_t(L.nx) * L.ny, 1);
  if (const SolidMask* m = bc.mask())
    for (std::size_t k = 0; k < L.fluid.size(); ++k) L.fluid[k] = m->solid[k] ? 0 : 1;
  ScalarField out(p.grid);
  fine_laplacian(L, p.values.data(), out.values.data());
  return out;
}

struct PoissonSolver::Impl {
  GridSpec grid;
  PoissonConfig cfg;
  std::vector<Level> levels;
  // Coarsest level direct solve.
  Eigen::LLT<Eigen::MatrixXd> coarse_llt;
  std::vector<int> coarse_index;
  bool coarse_direct = false;
  std::size_t fluid_count = 0;
  std::vector<double> x, r, z, p, Ap;

  Impl(const GridSpec& g, const BoundarySpec& bc, const PoissonConfig& c) : grid(g), cfg(c) {
    g.validate();
    bc.validate(g);
    c.validate(g);
    const int nlev = c.mg_levels == 0 ? max_mg_levels(g.nx, g.ny) : c.mg_levels;
    Level L0;
    L0.nx = g.nx;
    L0.ny = g.ny;
    L0.h = g.dx;
    L0.fluid.assign(std::size_t(g.nx) * g.ny, 1);
    if (const SolidMask* m = bc.mask())
      for (std::size_t k = 0; k < L0.fluid.size(); ++k) L0.fluid[k] = m->solid[k] ? 0 : 1;
    levels.push_back(std::move(L0));
    for (int l = 1; l < nlev; ++l) {
      const Level& F = levels.back();
      Level C;
      C.nx = F.nx / 2;
      C.ny = F.ny / 2;
      C.h = F.h * 2.0;
      C.fluid.assign(std::size_t(C.nx) * C.ny, 0);
      for (int j = 0; j < F.ny; ++j)
        for (int i = 0; i < F.nx; ++i)
          if (F.fluid[F.idx(i, j)]) C.fluid[C.idx(i / 2, j / 2)] = 1;
      levels.push_back(std::move(C));
    }
    for (Level& L : levels) {
      const std::size_t n = std::size_t(L.nx) * L.ny;
      L.x.assign(n, 0.0);
      L.b.assign(n, 0.0);
      L.r.assign(n, 0.0);
    }
    for (unsigned char f : levels[0].fluid) fluid_count += f;
    build_coarse();
    const std::size_t n = std::size_t(g.nx) * g.ny;
    x.assign(n, 0.0);
    r.assign(n, 0.0);
    z.assign(n, 0.0);
    p.assign(n, 0.0);
    Ap.assign(n, 0.0);
  }

  void build_coarse() {
    const Level& C = levels.back();
    const std::size_t n = std::size_t(C.nx) * C.ny;
    coarse_index.assign(n, -1);
    int m = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (C.fluid[k]) coarse_index[k] = m++;
    coarse_direct = m > 0 && m <= 2048;
    if (!coarse_direct) return;
    const double ih2 = 1.0 / (C.h * C.h);
    Eigen::MatrixXd A = Eigen::MatrixXd::Constant(m, m, ih2 / m);
    for (int j = 0; j < C.ny; ++j)
      for (int i = 0; i < C.nx; ++i) {
        const int row = coarse_index[C.idx(i, j)];
        if (row < 0) continue;
        const int di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
          if (!C.is_fluid(i + di[d], j + dj[d])) continue;
          A(row, row) += ih2;
          A(row, coarse_index[C.idx(i + di[d], j + dj[d])]) -= ih2;
        }
      }
    coarse_llt.compute(A);
  }

  // A = -lap with the count-based stencil.
  static void residual(Level& L) {
    const double ih2 = 1.0 / (L.h * L.h);
    auto& r = L.r;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < L.ny; ++j)
      for (int i = 0; i < L.nx; ++i) {
        const std::size_t k = L.idx(i, j);
        if (!L.fluid[k]) {
          r[k] = 0.0;
          continue;
        }
        double s = 0.0;
        int cnt = 0;
        if (L.is_fluid(i - 1, j)) s += L.x[k - 1], ++cnt;
        if (L.is_fluid(i + 1, j)) s += L.x[k + 1], ++cnt;
        if (L.is_fluid(i, j - 1)) s += L.x[k - L.nx], ++cnt;
        if (L.is_fluid(i, j + 1)) s += L.x[k + L.nx], ++cnt;
        r[k] = L.b[k] - (cnt * L.x[k] - s) * ih2;
      }
  }

  static void gs_color(Level& L, int color) {
    const double h2 = L.h * L.h;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < L.ny; ++j)
      for (int i = (j + color) % 2; i < L.nx; i += 2) {
        const std::size_t k = L.idx(i, j);
        if (!L.fluid[k]) continue;
        double s = 0.0;
        int cnt = 0;
        if (L.is_fluid(i - 1, j)) s += L.x[k - 1], ++cnt;
        if (L.is_fluid(i + 1, j)) s += L.x[k + 1], ++cnt;
        if (L.is_fluid(i, j - 1)) s += L.x[k - L.nx], ++cnt;
        if (L.is_fluid(i, j + 1)) s += L.x[k + L.nx], ++cnt;
        L.x[k] = cnt > 0 ? (L.b[k] * h2 + s) / cnt : 0.0;
      }
  }

  void coarse_solve(Level& C) {
    if (!coarse_direct) {
      std::fill(C.x.begin(), C.x.end(), 0.0);
      for (int s = 0; s < 30; ++s) gs_color(C, 0), gs_color(C, 1);
      for (int s = 0; s < 30; ++s) gs_color(C, 1), gs_color(C, 0);
      return;
    }
    const int m = static_cast<int>(coarse_llt.rows());
    Eigen::VectorXd rhs(m);
    double mean = 0.0;
    for (std::size_t k = 0; k < C.b.size(); ++k)
      if (coarse_index[k] >= 0) rhs(coarse_index[k]) = C.b[k], mean += C.b[k];
    rhs.array() -= mean / m;
    Eigen::VectorXd sol = coarse_llt.solve(rhs);
    sol.array() -= sol.mean();
    for (std::size_t k = 0; k < C.x.size(); ++k) C.x[k] = coarse_index[k] >= 0 ? sol(coarse_index[k]) : 0.0;
  }

  void vcycle(std::size_t l) {
    Level& L = levels[l];
    if (l + 1 == levels.size()) {
      coarse_solve(L);
      return;
    }
    std::fill(L.x.begin(), L.x.end(), 0.0);
    for (int s = 0; s < cfg.pre_sweeps; ++s) gs_color(L, 0), gs_color(L, 1);
    residual(L);
    Level& C = levels[l + 1];
    std::fill(C.b.begin(), C.b.end(), 0.0);
    for (int j = 0; j < L.ny; ++j)
      for (int i = 0; i < L.nx; ++i) {
        const std::size_t k = L.idx(i, j);
        if (!L.fluid[k]) continue;
        const ProlongStencil st = prolong_stencil(C, i, j);
        for (int q = 0; q < 4; ++q) C.b[st.c[q]] += 0.25 * st.w[q] * L.r[k];
      }
    vcycle(l + 1);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < L.ny; ++j)
      for (int i = 0; i < L.nx; ++i) {
        const std::size_t k = L.idx(i, j);
        if (!L.fluid[k]) continue;
        const ProlongStencil st = prolong_stencil(C, i, j);
        double e = 0.0;
        for (int q = 0; q < 4; ++q) e += st.w[q] * C.x[st.c[q]];
        L.x[k] += e;
      }
    for (int s = 0; s < cfg.post_sweeps; ++s) gs_color(L, 1), gs_color(L, 0);
  }

  double dot(const std::vector<double>& a, const std::vector<double>& b) const {
    const int nx = grid.nx;
    return ordered_sum(grid.ny, [&](int j) {
      double s = 0.0;
      for (int i = 0; i < nx; ++i) s += a[std::size_t(j) * nx + i] * b[std::size_t(j) * nx + i];
      return s;
    });
  }

  void remove_mean(std::vector<double>& a) const {
    if (fluid_count == 0) return;
    const Level& L = levels[0];
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (L.fluid[k]) s += a[k];
    const double mean = s / double(fluid_count);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = L.fluid[k] ? a[k] - mean : 0.0;
  }

  void precondition() {
    Level& L = levels[0];
    std::copy(r.begin(), r.end(), L.b.begin());
    vcycle(0);
    std::copy(L.x.begin(), L.x.end(), z.begin());
    remove_mean(z);
  }

  // A = -lap, applied through the fine-level div(grad) form.
  void apply_A(const std::vector<double>& in, std::vector<double>& out) {
    fine_laplacian(levels[0], in.data(), out.data());
    for (double& v : out) v = -v;
  }

  ScalarField solve(const ScalarField& rhs, PoissonStats* stats, const std::function<void(int, double)>& hook) {
    require_same_grid(rhs.grid, grid, "poisson solve");
    if (!rhs.values.all_finite()) throw std::invalid_argument("poisson rhs is not finite");
    const std::size_t n = x.size();
    // lap(x) = rhs  <=>  A x = -rhs.
    for (std::size_t k = 0; k < n; ++k) r[k] = -rhs.values[k];
    remove_mean(r);
    std::fill(x.begin(), x.end(), 0.0);
    ScalarField out(grid);
    const double bnorm = std::sqrt(dot(r, r));
    if (stats) *stats = {};
    if (bnorm == 0.0) return out;
    precondition();
    std::copy(z.begin(), z.end(), p.begin());
    double rz = dot(r, z);
    double rel = 1.0;
    int it = 0;
    while (true) {
      if (it >= cfg.max_iterations) throw NonConvergence(rel, it);
      apply_A(p, Ap);
      const double pAp = dot(p, Ap);
      if (!(pAp > 0.0)) throw NonConvergence(rel, it);
      const double alpha = rz / pAp;
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t k = 0; k < std::ptrdiff_t(n); ++k) {
        x[k] += alpha * p[k];
        r[k] -= alpha * Ap[k];
      }
      ++it;
      rel = std::sqrt(dot(r, r)) / bnorm;
      if (hook) hook(it, rel);
      if (rel <= cfg.tolerance) break;
      precondition();
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t k = 0; k < std::ptrdiff_t(n); ++k) p[k] = z[k] + beta * p[k];
    }
    remove_mean(x);
    std::copy(x.begin(), x.end(), out.values.data());
    if (stats) *stats = {it, rel};
    return out;
  }
};

PoissonSolver::PoissonSolver(const GridSpec& g, const BoundarySpec& bc, const PoissonConfig& cfg)
    : impl_(std::make_unique<Impl>(g, bc, cfg)) {}
PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

ScalarField PoissonSolver::solve(const ScalarField& rhs, PoissonStats* stats) {
  return impl_->solve(rhs, stats, on_iteration);
}

int PoissonSolver::levels() const { return static_cast<int>(impl_->levels.size()); }

ScalarField solve_poisson(const ScalarField& rhs, const BoundarySpec& bc, const PoissonConfig& cfg,
                          PoissonStats* stats) {
  PoissonSolver s(rhs.grid, bc, cfg);
  return s.solve(rhs, stats);
}

Projector::Projector(const GridSpec& g, const BoundarySpec& bc, const PoissonConfig& cfg)
    : bc_(bc), solver_(g, bc, cfg) {}

Projection Projector::project(const VectorField& vel) {
  if (!vel.all_finite()) throw std::invalid_argument("projection input velocity is not finite");
  Projection out;
  out.velocity = vel;
  zero_boundary_faces(out.velocity, bc_.mask());
  out.phi = solver_.solve(divergence(out.velocity), &out.stats);
  out.velocity -= gradient(out.phi, bc_.mask());
  return out;
}

Projection project(const VectorField& vel, const BoundarySpec& bc, const PoissonConfig& cfg) {
  Projector p(vel.grid, bc, cfg);
  return p.project(vel);
}

}  // namespace fmadj
