#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fmadj/grid.hpp"

namespace fmadj {

enum class TermKind { TerminalVelocity, KeyframePassive, VelocitySelf, ViscosityTarget };

std::string to_string(TermKind k);
TermKind term_kind_from_string(const std::string& s);

// One delta-in-time loss term, active at each listed step.
//   terminal-velocity, viscosity-target: w/2 ||u - u_target||^2
//   velocity-self:                       w/2 ||u||^2
//   keyframe-passive:                    w ||xi - xi_target||^2
struct ObjectiveTerm {
  TermKind kind = TermKind::VelocitySelf;
  std::vector<int> steps;
  double weight = 1.0;
  std::shared_ptr<const VectorField> target_u;
  std::shared_ptr<const ScalarField> target_xi;

  bool active_at(int step) const;
  bool uses_passive() const { return kind == TermKind::KeyframePassive; }
};

struct ObjectiveSpec {
  std::vector<ObjectiveTerm> terms;

  void validate(const GridSpec& g, int n_steps, bool has_passive) const;
  bool active_at(int step) const;
  bool uses_passive() const;
};

// Loss of one term on a state, with the dx^2 quadrature weight.
double eval_loss(const ObjectiveTerm& term, const VectorField& u, const ScalarField* xi);

// Derivative densities: the loss gradient per sample divided by dx^2.
VectorField source_dJdu(const ObjectiveTerm& term, const VectorField& u);
ScalarField source_dJdxi(const ObjectiveTerm& term, const ScalarField& xi);

// Sums over the terms active at `step`.
double eval_loss_at(const ObjectiveSpec& spec, int step, const VectorField& u, const ScalarField* xi);
std::optional<VectorField> total_dJdu(const ObjectiveSpec& spec, int step, const VectorField& u);
std::optional<ScalarField> total_dJdxi(const ObjectiveSpec& spec, int step, const ScalarField& xi);

}  // namespace fmadj
