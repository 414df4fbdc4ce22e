#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fmadj/efm.hpp"
#include "fmadj/flowmap.hpp"
#include "fmadj/objectives.hpp"
#include "fmadj/poisson.hpp"

namespace fmadj {

struct SimConfig {
  GridSpec grid;
  double dt = 0.0;
  int n_steps = 0;
  int n_long = 20;
  int n_short = 2;
  double viscosity = 0.0;
  BoundarySpec bc;
  PoissonConfig poisson;
  TimeSparseMode mode = TimeSparseMode::LongShort;
  bool bfecc = true;
  std::size_t midpoint_memory = 0;  // fields kept in memory, 0 = all
  std::filesystem::path spill_dir;

  void validate() const;
  // Whether the state at `step` comes from a short/long map reconstruction.
  bool short_reinit(int step) const { return mode == TimeSparseMode::LongShort && step % n_short == 0; }
  bool long_reinit(int step) const { return step % n_long == 0; }
};

class NumericalBlowup : public std::runtime_error {
 public:
  NumericalBlowup(int step, const std::string& field);
  int step;
  std::string field;
};

// Force applied during the transition step -> step + 1; nullopt means zero.
using ForceProvider = std::function<std::optional<VectorField>(int step, const GridSpec& g)>;

struct StepDiagnostics {
  int step = 0;
  double energy = 0.0;
  double mass = 0.0;
  double relative_divergence = 0.0;
  int poisson_iterations = 0;
};

struct TrajectoryRecord {
  SimConfig cfg;
  std::vector<VectorField> u;    // u_0 .. u_n
  std::vector<ScalarField> xi;   // xi_0 .. xi_n when a passive field is present
  std::unique_ptr<MidpointBuffer> umid;
  std::vector<StepDiagnostics> diagnostics;  // one per stored state

  bool has_passive() const { return !xi.empty(); }
};

struct LossReport {
  double total = 0.0;
  std::vector<std::pair<int, double>> per_step;
};

struct ForwardResult {
  TrajectoryRecord traj;
  LossReport loss;
};

// Called after every stored state (step 0 included).
using StepObserver = std::function<void(int step, const VectorField& u, const ScalarField* xi)>;

ForwardResult run_forward(const SimConfig& cfg, const VectorField& u0, const ScalarField* xi0,
                          const ForceProvider& forces = {}, const ObjectiveSpec* objective = nullptr,
                          const StepObserver& observer = {});

// RK2 semi-Lagrangian advection of a passive field.
ScalarField advect_passive_sl(const ScalarField& xi, const VectorField& u_mid, double dt);

// 1/2 grad |u|^2 sampled per face through the w3 gradient of the cell speed.
VectorField kinetic_gradient(const VectorField& u);

// Reconstruction of the current velocity from a window: J_B^T (anchor + Gamma)(B)
// with error correction.
VectorField map_convert_forward(const EfmWindow& window, const SampledMap& back, bool bfecc);

}  // namespace fmadj
