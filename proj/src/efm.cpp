#include "fmadj/efm.hpp"

#include <stdexcept>

namespace fmadj {

std::string to_string(TimeSparseMode m) { return m == TimeSparseMode::LongShort ? "long-short" : "plain"; }

TimeSparseMode time_sparse_mode_from_string(const std::string& s) {
  if (s == "long-short") return TimeSparseMode::LongShort;
  if (s == "plain") return TimeSparseMode::Plain;
  throw std::invalid_argument("unknown time-sparse mode '" + s + "' (expected long-short or plain)");
}

EfmWindow::EfmWindow(WindowKind kind, const GridSpec& g) {
  window.kind = kind;
  window.map = SampledMap(g);
}

void EfmWindow::reset(int step, const VectorField& u, const ScalarField* xi) {
  window.reinit(step);
  anchor_u = u;
  integ_u = VectorField(u.grid);
  if (xi) {
    anchor_xi = *xi;
    if (integ_xi) {
      integ_xi->values.fill(0.0);
    } else {
      integ_xi.emplace(u.grid);
    }
  } else {
    anchor_xi.reset();
    integ_xi.reset();
  }
}

VectorField EfmWindow::reconstruct_u(const SampledMap& back, bool bfecc) const {
  return map_covector(anchor_u + integ_u, back, window.map, bfecc);
}

ScalarField EfmWindow::reconstruct_xi(const SampledMap& back, bool bfecc, bool clamp) const {
  if (!anchor_xi) throw std::logic_error("window has no passive field");
  if (integ_xi) return map_scalar(*anchor_xi + *integ_xi, back, window.map, bfecc, clamp);
  return map_scalar(*anchor_xi, back, window.map, bfecc, clamp);
}

void EfmWindow::accumulate(const VectorField& increment_u, const ScalarField* increment_xi) {
  accumulate_covector(integ_u, window.map, increment_u);
  if (increment_xi && integ_xi) accumulate_scalar(*integ_xi, window.map, *increment_xi);
}

}  // namespace fmadj
