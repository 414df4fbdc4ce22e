#pragma once

#include <optional>

#include "fmadj/flowmap.hpp"

namespace fmadj {

enum class TimeSparseMode { LongShort, Plain };

std::string to_string(TimeSparseMode m);
TimeSparseMode time_sparse_mode_from_string(const std::string& s);

// State of one map window shared by both passes: the marched anchor->current
// map, the anchor fields and their path integrators.
struct EfmWindow {
  FlowMapWindow window;
  VectorField anchor_u;
  VectorField integ_u;
  std::optional<ScalarField> anchor_xi;
  std::optional<ScalarField> integ_xi;

  EfmWindow() = default;
  EfmWindow(WindowKind kind, const GridSpec& g);

  void reset(int step, const VectorField& u, const ScalarField* xi);
  int anchor() const { return window.anchor_step; }

  // Covector reconstruction of anchor_u + integ_u through `back` (current ->
  // anchor) and the marched map.
  VectorField reconstruct_u(const SampledMap& back, bool bfecc) const;
  // Scalar reconstruction of anchor_xi (+ integ_xi when present).
  ScalarField reconstruct_xi(const SampledMap& back, bool bfecc, bool clamp) const;

  // integ_u += J^T I(M(y)); integ_xi += I_xi(M(y)).
  void accumulate(const VectorField& increment_u, const ScalarField* increment_xi);
};

}  // namespace fmadj
