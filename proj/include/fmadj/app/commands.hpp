#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fmadj/app/config.hpp"
#include "fmadj/optimize.hpp"

namespace fmadj::app {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfigError = 2, kSolverError = 3, kCriterionFailed = 4 };

// Grid, initial fields, objective targets and parameterization for a config.
Problem build_problem(const RunConfig& cfg);
GridSpec grid_of(const RunConfig& cfg);
ScalarField shape_field(const ShapeCfg& s, const GridSpec& g);
VectorField taylor_green(const GridSpec& g, double amplitude);
std::vector<VortexBlob> jittered(const std::vector<VortexBlob>& blobs, double jitter, unsigned long long seed,
                                 const GridSpec& g);

struct SimulateSummary {
  int steps = 0;
  double dt = 0.0;
  std::vector<StepDiagnostics> diagnostics;
  double loss = 0.0;
  double seconds = 0.0;
};

struct AdjointCheckSummary {
  std::vector<double> errors;          // per step
  std::vector<double> energy;          // forward
  std::vector<double> adjoint_energy;  // backward
  std::vector<double> adjoint_divergence;
  double max_error = 0.0;
  double bound = 0.0;
  double seconds = 0.0;
  bool passed() const { return max_error <= bound; }
};

struct GradCheckSummary {
  GradCheckReport report;
  double min_cosine = 0.0;
  bool passed() const { return report.cosine >= min_cosine; }
};

struct OptimizeSummary {
  OptRunRecord record;
  std::vector<std::string> names;
  std::vector<double> initial_params;
};

// Each command writes its outputs and a manifest under cfg.out_dir.
SimulateSummary simulate(const RunConfig& cfg, std::ostream& log);
AdjointCheckSummary adjoint_check(const RunConfig& cfg, std::ostream& log);
GradCheckSummary grad_check(const RunConfig& cfg, std::ostream& log);
OptimizeSummary optimize(const RunConfig& cfg, std::ostream& log);
// Snapshot to PGM (scalar, grayscale) or PPM (vector, vorticity); returns the
// image path.
std::filesystem::path render(const std::filesystem::path& input, const std::filesystem::path& out_dir,
                             std::ostream& log);

struct CliRequest {
  std::string command;
  std::optional<std::string> config_path;
  Overrides overrides;
  std::optional<std::string> input;
};

// Runs a command and maps failures to exit codes, reporting on `err`.
int run(const CliRequest& req, std::ostream& out, std::ostream& err);

}  // namespace fmadj::app
