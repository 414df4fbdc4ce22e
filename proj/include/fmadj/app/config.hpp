#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmadj/grid.hpp"
#include "fmadj/optimize.hpp"

namespace fmadj::app {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BlobCfg {
  Vec2 center;
  double strength = 0.0;
  double radius = 0.1;
};

// Smooth indicator of a disk or an axis-aligned square; `size` is the radius
// or half-width, `edge` the tanh transition width (0 = sharp).
struct ShapeCfg {
  std::string type = "none";  // none | disk | square | snapshot
  Vec2 center{0.5, 0.5};
  double size = 0.1;
  double edge = 0.0;
  std::string path;
};

struct VelocityInitCfg {
  std::string type = "zero";  // zero | blobs | taylor-green | snapshot
  std::vector<BlobCfg> blobs;
  double amplitude = 1.0;
  std::string path;
};

// Velocity targets: a snapshot, the Taylor-Green field, or a reference run of
// the same problem with some inputs replaced.
struct VelocityTargetCfg {
  std::string type = "none";  // none | zero | snapshot | taylor-green | simulate
  std::string path;
  double amplitude = 1.0;
  std::optional<double> viscosity;
  std::vector<BlobCfg> blobs;
};

struct TermCfg {
  std::string kind;
  // Negative entries count from the end: -1 is the final step.
  std::vector<int> steps{-1};
  double weight = 1.0;
  VelocityTargetCfg target_u;
  ShapeCfg target_xi;
};

struct WindCfg {
  bool enabled = false;
  double sharpness = 100.0;
  int windows = 1;
  int steps_per_window = 0;  // 0 splits the run evenly
  std::vector<Vec2> centers;
  std::vector<int> lattice;  // [kx, ky] evenly spaced centers when `centers` is empty
  double margin = 0.15;
  std::vector<Vec2> strengths;
  bool optimize_centers = false;
};

struct RunConfig {
  std::string preset;

  int nx = 64, ny = 64;
  double dx = 0.0;     // derived from width when 0
  double width = 1.0;
  Vec2 origin{};

  double dt = 0.0;
  double cfl = 0.0;  // dt = cfl dx / max|u0| when dt is 0
  int steps = 100;
  int n_long = 20;
  int n_short = 2;
  double viscosity = 0.0;
  std::string mode = "long-short";
  bool bfecc = true;
  std::size_t midpoint_memory = 0;
  std::string spill_dir;

  PoissonConfig poisson;

  VelocityInitCfg init_u;
  ShapeCfg init_xi;

  std::vector<TermCfg> terms;

  WindCfg wind;
  bool optimize_blobs = true;
  bool optimize_blob_geometry = true;
  bool optimize_viscosity = false;
  // Starting viscosity for `optimize`; sim viscosity otherwise.
  std::optional<double> viscosity_initial;
  // Deterministic perturbation of the initial blobs, for inference tasks.
  double blob_jitter = 0.0;

  OptimizerConfig optimizer;

  double adjoint_bound = 0.02;

  double grad_h = 1e-4;
  std::vector<std::size_t> grad_subset;
  double grad_min_cosine = 0.99;

  std::string out_dir = "out";
  int frame_every = 0;
  int snapshot_every = 0;

  unsigned long long seed = 0;

  // Canonical YAML of the merged configuration, used for the manifest hash.
  std::string canonical;

  void validate() const;
  std::uint64_t hash() const;
};

// Overrides applied after loading, in the order the CLI exposes them.
struct Overrides {
  std::optional<std::string> preset;
  std::optional<std::string> out_dir;
  std::optional<int> steps;
  std::optional<unsigned long long> seed;
  std::optional<std::string> mode;
};

// Parses YAML text. A `preset:` key pulls in that preset's YAML first and
// merges the given document over it. Unknown keys are rejected with their line
// and column.
RunConfig parse_config(const std::string& yaml_text, const std::string& origin_name = "<config>",
                       const Overrides& ov = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& ov = {});
// Preset only (plus overrides), no file.
RunConfig preset_config(const std::string& name, const Overrides& ov = {});

std::uint64_t fnv1a64(const std::string& s);

}  // namespace fmadj::app
