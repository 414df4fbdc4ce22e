#include "fmadj/app/presets.hpp"

#include <map>

#include "fmadj/app/config.hpp"

namespace fmadj::app {

namespace {

const std::map<std::string, std::string>& table() {
  static const std::map<std::string, std::string> presets{
      {"zero", R"(
grid: {nx: 32, ny: 32, width: 1.0}
sim: {dt: 0.01, steps: 20, n_long: 10, n_short: 2}
init:
  velocity: {type: zero}
  smoke: {type: disk, center: [0.5, 0.5], size: 0.2, edge: 0.03}
objective:
  - {kind: velocity-self, steps: [-1]}
output: {frame_every: 10, snapshot_every: 10}
)"},
      {"single-vortex", R"(
grid: {nx: 128, ny: 128, width: 1.0}
sim: {cfl: 0.5, steps: 200, n_long: 20, n_short: 2}
init:
  velocity:
    type: blobs
    blobs:
      - {center: [0.5, 0.5], strength: 100.0, radius: 0.1}
  smoke: {type: disk, center: [0.5, 0.62], size: 0.12, edge: 0.04}
objective:
  - {kind: velocity-self, steps: [-1]}
params:
  blobs: {optimize_geometry: false}
output: {frame_every: 20}
)"},
      {"leapfrog", R"(
grid: {nx: 128, ny: 128, width: 1.0}
sim: {cfl: 0.5, steps: 100, n_long: 20, n_short: 2}
init:
  velocity:
    type: blobs
    blobs:
      - {center: [0.25, 0.62], strength: 493.8271604938272, radius: 0.045}
      - {center: [0.25, 0.38], strength: -493.8271604938272, radius: 0.045}
      - {center: [0.35, 0.62], strength: 493.8271604938272, radius: 0.045}
      - {center: [0.35, 0.38], strength: -493.8271604938272, radius: 0.045}
objective:
  - {kind: velocity-self, steps: [-1]}
params:
  blobs: {optimize_geometry: false}
output: {frame_every: 10}
)"},
      {"taylor-green-128", R"(
grid: {nx: 128, ny: 128, width: 6.283185307179586}
sim: {dt: 0.025, steps: 800, n_long: 20, n_short: 2, viscosity: 0.01}
init:
  velocity: {type: taylor-green, amplitude: 1.0}
objective:
  - kind: viscosity-target
    steps: [-1]
    target: {type: simulate, viscosity: 0.01}
params:
  viscosity: {optimize: true, initial: 0.005}
optimizer:
  algorithm: gradient-descent
  learning_rate: 5.0e-5
  max_iterations: 50
  param_tolerance: 5.0e-5
output: {frame_every: 100}
)"},
      {"smoke-disk-to-square-64", R"(
grid: {nx: 64, ny: 64, width: 1.0}
sim: {dt: 0.01, steps: 100, n_long: 20, n_short: 2}
init:
  velocity: {type: zero}
  smoke: {type: disk, center: [0.5, 0.4], size: 0.14, edge: 0.02}
objective:
  - kind: keyframe-passive
    steps: [-1]
    target: {type: square, center: [0.5, 0.55], size: 0.14, edge: 0.02}
params:
  wind: {sharpness: 50.0, windows: 4, lattice: [4, 4], margin: 0.2}
optimizer:
  algorithm: adam
  learning_rate: 0.05
  max_iterations: 100
  checkpoint_every: 10
grad_check: {h: 1.0e-3, subset: [0, 1, 10, 11, 40, 41]}
output: {frame_every: 20}
)"},
      {"vortex-infer-8", R"(
grid: {nx: 64, ny: 64, width: 1.0}
sim: {cfl: 0.5, steps: 60, n_long: 20, n_short: 2}
init:
  velocity:
    type: blobs
    blobs:
      - {center: [0.30, 0.30], strength: 40.0, radius: 0.08}
      - {center: [0.50, 0.25], strength: -40.0, radius: 0.08}
      - {center: [0.70, 0.30], strength: 40.0, radius: 0.08}
      - {center: [0.75, 0.50], strength: -40.0, radius: 0.08}
      - {center: [0.70, 0.70], strength: 40.0, radius: 0.08}
      - {center: [0.50, 0.75], strength: -40.0, radius: 0.08}
      - {center: [0.30, 0.70], strength: 40.0, radius: 0.08}
      - {center: [0.25, 0.50], strength: -40.0, radius: 0.08}
objective:
  - kind: terminal-velocity
    steps: [-1]
    target: {type: simulate}
params:
  blobs: {optimize: true, optimize_geometry: true, jitter: 0.2}
optimizer:
  algorithm: adam
  learning_rate: 0.002
  max_iterations: 200
  checkpoint_every: 20
grad_check: {h: 1.0e-4, subset: [0, 4, 8]}
output: {frame_every: 20}
)"},
  };
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : table()) names.push_back(k);
  return names;
}

bool has_preset(const std::string& name) { return table().count(name) != 0; }

const std::string& preset_yaml(const std::string& name) {
  const auto it = table().find(name);
  if (it == table().end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (available: " + known + ")");
  }
  return it->second;
}

}  // namespace fmadj::app
