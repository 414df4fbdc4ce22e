#include "fmadj/objectives.hpp"

#include <algorithm>
#include <stdexcept>

namespace fmadj {

std::string to_string(TermKind k) {
  switch (k) {
    case TermKind::TerminalVelocity: return "terminal-velocity";
    case TermKind::KeyframePassive: return "keyframe-passive";
    case TermKind::VelocitySelf: return "velocity-self";
    case TermKind::ViscosityTarget: return "viscosity-target";
  }
  return "?";
}

TermKind term_kind_from_string(const std::string& s) {
  if (s == "terminal-velocity") return TermKind::TerminalVelocity;
  if (s == "keyframe-passive") return TermKind::KeyframePassive;
  if (s == "velocity-self") return TermKind::VelocitySelf;
  if (s == "viscosity-target") return TermKind::ViscosityTarget;
  throw std::invalid_argument("unknown objective kind '" + s + "'");
}

bool ObjectiveTerm::active_at(int step) const { return std::find(steps.begin(), steps.end(), step) != steps.end(); }

void ObjectiveSpec::validate(const GridSpec& g, int n_steps, bool has_passive) const {
  for (const auto& t : terms) {
    const std::string name = to_string(t.kind);
    if (!std::isfinite(t.weight)) throw std::invalid_argument(name + ": weight must be finite");
    if (t.steps.empty()) throw std::invalid_argument(name + ": needs at least one step");
    for (int s : t.steps)
      if (s < 0 || s > n_steps)
        throw std::invalid_argument(name + ": step " + std::to_string(s) + " outside [0, " + std::to_string(n_steps) +
                                    "]");
    switch (t.kind) {
      case TermKind::TerminalVelocity:
      case TermKind::ViscosityTarget:
        if (!t.target_u) throw std::invalid_argument(name + ": missing velocity target");
        if (!(t.target_u->grid == g)) throw ShapeMismatch(name + ": target grid does not match the simulation grid");
        break;
      case TermKind::KeyframePassive:
        if (!has_passive) throw std::invalid_argument(name + ": the simulation has no passive field");
        if (!t.target_xi) throw std::invalid_argument(name + ": missing passive target");
        if (!(t.target_xi->grid == g)) throw ShapeMismatch(name + ": target grid does not match the simulation grid");
        break;
      case TermKind::VelocitySelf: break;
    }
  }
}

bool ObjectiveSpec::active_at(int step) const {
  return std::any_of(terms.begin(), terms.end(), [&](const ObjectiveTerm& t) { return t.active_at(step); });
}

bool ObjectiveSpec::uses_passive() const {
  return std::any_of(terms.begin(), terms.end(), [](const ObjectiveTerm& t) { return t.uses_passive(); });
}

double eval_loss(const ObjectiveTerm& term, const VectorField& u, const ScalarField* xi) {
  switch (term.kind) {
    case TermKind::TerminalVelocity:
    case TermKind::ViscosityTarget: {
      require_same_grid(u.grid, term.target_u->grid, "velocity loss");
      const VectorField d = u - *term.target_u;
      return 0.5 * term.weight * inner(d, d);
    }
    case TermKind::VelocitySelf: return 0.5 * term.weight * inner(u, u);
    case TermKind::KeyframePassive: {
      if (!xi) throw std::invalid_argument("keyframe-passive loss needs a passive field");
      require_same_grid(xi->grid, term.target_xi->grid, "keyframe loss");
      const ScalarField d = *xi - *term.target_xi;
      return term.weight * inner(d, d);
    }
  }
  return 0.0;
}

VectorField source_dJdu(const ObjectiveTerm& term, const VectorField& u) {
  switch (term.kind) {
    case TermKind::TerminalVelocity:
    case TermKind::ViscosityTarget: return term.weight * (u - *term.target_u);
    case TermKind::VelocitySelf: return term.weight * u;
    case TermKind::KeyframePassive: return VectorField(u.grid);
  }
  return VectorField(u.grid);
}

ScalarField source_dJdxi(const ObjectiveTerm& term, const ScalarField& xi) {
  if (term.kind != TermKind::KeyframePassive) return ScalarField(xi.grid);
  return (2.0 * term.weight) * (xi - *term.target_xi);
}

double eval_loss_at(const ObjectiveSpec& spec, int step, const VectorField& u, const ScalarField* xi) {
  double total = 0.0;
  for (const auto& t : spec.terms)
    if (t.active_at(step)) total += eval_loss(t, u, xi);
  return total;
}

std::optional<VectorField> total_dJdu(const ObjectiveSpec& spec, int step, const VectorField& u) {
  std::optional<VectorField> out;
  for (const auto& t : spec.terms) {
    if (!t.active_at(step) || t.uses_passive()) continue;
    if (!out) out.emplace(u.grid);
    *out += source_dJdu(t, u);
  }
  return out;
}

std::optional<ScalarField> total_dJdxi(const ObjectiveSpec& spec, int step, const ScalarField& xi) {
  std::optional<ScalarField> out;
  for (const auto& t : spec.terms) {
    if (!t.active_at(step) || !t.uses_passive()) continue;
    if (!out) out.emplace(xi.grid);
    *out += source_dJdxi(t, xi);
  }
  return out;
}

}  // namespace fmadj
