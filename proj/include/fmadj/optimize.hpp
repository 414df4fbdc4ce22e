#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmadj/params.hpp"

namespace fmadj {

// Everything needed to run forward and backward for one parameter vector.
struct Problem {
  SimConfig sim;
  ObjectiveSpec objective;
  VectorField init_u;  // ignored when blobs are set
  std::optional<ScalarField> init_xi;
  std::optional<GaussianWindSet> wind;
  bool optimize_wind_centers = false;
  std::optional<VortexBlobSet> blobs;
  bool optimize_blob_geometry = true;
  bool optimize_viscosity = false;
};

// Flat parameter vector layout: wind strengths, wind centers, blob
// (strength, cx, cy, r), viscosity, in that order when enabled.
class ParamLayout {
 public:
  explicit ParamLayout(const Problem& p);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<double> pack(const Problem& p) const;
  void unpack(const std::vector<double>& theta, Problem& p) const;
  // Clamps viscosity to >= 0 and radii to a positive floor.
  void project_feasible(std::vector<double>& theta) const;

 private:
  std::vector<std::string> names_;
  std::size_t wind_strengths_ = 0, wind_centers_ = 0, blobs_ = 0;
  bool blob_geometry_ = false, viscosity_ = false;
  double radius_floor_ = 0.0;
};

VectorField initial_velocity(const Problem& p);
ForwardResult run_problem_forward(const Problem& p, const StepObserver& observer = {});

struct Evaluation {
  double loss = 0.0;
  std::vector<double> gradient;
};

double evaluate_loss(const Problem& base, const ParamLayout& layout, const std::vector<double>& theta);
Evaluation evaluate_gradient(const Problem& base, const ParamLayout& layout, const std::vector<double>& theta);

enum class Algorithm { GradientDescent, Adam };
std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::Adam;
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_iterations = 200;
  // Stop when |L_k - L_{k-1}| <= tolerance * |L_{k-1}|; 0 disables.
  double tolerance = 0.0;
  // Stop when every parameter moved by at most this much; 0 disables.
  double param_tolerance = 0.0;
  int checkpoint_every = 0;
  unsigned long long seed = 0;

  void validate() const;
};

class DivergedLoss : public std::runtime_error {
 public:
  DivergedLoss(int iteration, const std::string& why);
  int iteration;
};

class Adam {
 public:
  Adam(const OptimizerConfig& cfg, std::size_t n);
  // Returns the parameter update to add.
  std::vector<double> step(const std::vector<double>& grad);
  int t() const { return t_; }

 private:
  OptimizerConfig cfg_;
  std::vector<double> m_, v_;
  int t_ = 0;
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;
  std::vector<double> params;
};

struct OptRunRecord {
  std::vector<IterationRecord> iterations;
  std::vector<double> final_params;
  double final_loss = 0.0;
  std::string stop_reason;
};

using EvaluateFn = std::function<Evaluation(const std::vector<double>&)>;
using LossFn = std::function<double(const std::vector<double>&)>;
using ProjectFn = std::function<void(std::vector<double>&)>;
using IterationCallback = std::function<void(const IterationRecord&)>;

// Generic loop over an evaluator; the simulation overload wires in the adjoint.
OptRunRecord optimize(const OptimizerConfig& cfg, const EvaluateFn& eval, const LossFn& loss,
                      std::vector<double> theta, const ProjectFn& project = {},
                      const IterationCallback& on_iteration = {});

OptRunRecord optimize(const OptimizerConfig& cfg, const Problem& problem, const IterationCallback& on_iteration = {});

struct GradCheckEntry {
  std::size_t index = 0;
  std::string name;
  double adjoint = 0.0;
  double finite_difference = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  double loss = 0.0;
  std::vector<GradCheckEntry> entries;
  double cosine = 0.0;
  double magnitude_error = 0.0;  // | |g_adj| - |g_fd| | / |g_fd| over the subset
};

// Central differences of the full forward loss on `subset` (all coordinates
// when empty) against the adjoint gradient.
GradCheckReport grad_check(const Problem& problem, const std::vector<std::size_t>& subset, double h);

}  // namespace fmadj
