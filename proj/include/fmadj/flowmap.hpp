#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fmadj/grid.hpp"

namespace fmadj {

// Map value and Jacobian per velocity-face sample, one set per face family.
struct SampledMap {
  GridSpec grid;
  std::vector<Vec2> pos_u, pos_v;
  std::vector<Mat2> jac_u, jac_v;

  SampledMap() = default;
  explicit SampledMap(const GridSpec& g);  // identity

  void reset();
  bool is_identity() const;
  // All Jacobian determinants finite and nonzero.
  bool jacobians_valid() const;

  Vec2& pos(Stagger s, int i, int j);
  Vec2 pos(Stagger s, int i, int j) const;
  const Mat2& jac(Stagger s, int i, int j) const;

  // Cell-center map values from the average displacement of the two adjacent
  // u-faces.
  Vec2 cell_pos(int i, int j) const;
};

class MissingCheckpoint : public std::runtime_error {
 public:
  explicit MissingCheckpoint(int s);
  int step;
};

// Midpoint velocities per step. Keeps up to `memory_capacity` fields in memory
// (0 = unlimited) and spills older ones to `umid_<step>.fma` files.
class MidpointBuffer {
 public:
  explicit MidpointBuffer(std::size_t memory_capacity = 0, std::filesystem::path spill_dir = {});
  ~MidpointBuffer();
  MidpointBuffer(const MidpointBuffer&) = delete;
  MidpointBuffer& operator=(const MidpointBuffer&) = delete;
  MidpointBuffer(MidpointBuffer&&) noexcept;
  MidpointBuffer& operator=(MidpointBuffer&&) noexcept;

  void store(int step, const VectorField& u_mid);
  std::shared_ptr<const VectorField> get(int step) const;
  bool contains(int step) const;
  bool empty() const { return memory_.empty() && disk_.empty(); }
  const GridSpec& grid() const { return grid_; }
  std::size_t in_memory() const { return memory_.size(); }
  std::size_t on_disk() const { return disk_.size(); }
  void clear();

 private:
  std::filesystem::path spill_path(int step) const;
  void ensure_spill_dir();

  std::size_t capacity_ = 0;
  std::filesystem::path dir_;
  bool owns_dir_ = false;
  GridSpec grid_;
  std::map<int, std::shared_ptr<const VectorField>> memory_;
  std::map<int, std::filesystem::path> disk_;
};

// Half-step advection u(x - dt/2 u(x)), sampled per face. The forward pass
// projects the result before using it as the midpoint velocity.
VectorField compute_midpoint_velocity(const VectorField& u, double dt);

// One RK4 step of dX/dt = u_mid(X), dJ/dt = grad u_mid(X) J for every sample;
// all stages read the same field.
void march(SampledMap& map, const VectorField& u_mid, double dt_signed);

// Integrates a map from identity at `from_step` to `to_step` through the stored
// midpoint fields. Steps forward (u_mid[k], +dt for k = from..to-1) or backward
// (u_mid[k], -dt for k = from-1..to).
SampledMap integrate_map(const MidpointBuffer& buffer, int from_step, int to_step, double dt);

// Pulls a covector field through a map pair. `back` takes current positions to
// the anchor time, `fwd` takes anchor positions to the current time. With
// bfecc, the round-trip error is half-corrected as in back-and-forth error
// compensation; otherwise a single Jacobian-weighted mapping is returned.
VectorField map_covector(const VectorField& src, const SampledMap& back, const SampledMap& fwd, bool bfecc = true);

// Scalar analogue without Jacobians. `clamp` limits each result to the source
// range in the stencil around the back-mapped point.
ScalarField map_scalar(const ScalarField& src, const SampledMap& back, const SampledMap& fwd, bool bfecc = true,
                       bool clamp = false);

// Single mapping u*(x) = F(x)^T u*_anchor(Phi(x)) without error correction.
VectorField mapped_adjoint_velocity(const VectorField& u_star_anchor, const SampledMap& phi_F);

// Gamma(y) += J_M(y)^T I(M(y)) per face sample.
void accumulate_covector(VectorField& acc, const SampledMap& fwd, const VectorField& increment);
// Lambda(y) += I(M(y)) per cell.
void accumulate_scalar(ScalarField& acc, const SampledMap& fwd, const ScalarField& increment);

// Semi-Lagrangian advection with an RK2 backtrace through u_mid over dt_signed
// (negative dt traces forward in time, used by the backward pass).
VectorField sl_advect(const VectorField& q, const VectorField& u_mid, double dt_signed);
ScalarField sl_advect(const ScalarField& q, const VectorField& u_mid, double dt_signed);

enum class WindowKind { Long, Short };

struct FlowMapWindow {
  WindowKind kind = WindowKind::Long;
  int anchor_step = 0;
  SampledMap map;  // anchor -> current

  void reinit(int step) {
    anchor_step = step;
    map.reset();
  }
};

}  // namespace fmadj
