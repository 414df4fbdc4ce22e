#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fmadj/forward.hpp"

namespace fmadj {

// Loss derivative sources at a step, as delta contributions (weight 1, no dt).
struct AdjointSourceHook {
  std::function<std::optional<VectorField>(int step)> dJdu;
  std::function<std::optional<ScalarField>(int step)> dJdxi;
};

AdjointSourceHook sources_from_objective(const ObjectiveSpec& spec, const TrajectoryRecord& traj);

struct AdjointTrajectory {
  std::vector<VectorField> u_star;   // indexed by step, 0 .. n
  std::vector<ScalarField> xi_star;  // empty without a passive field
  std::vector<StepDiagnostics> diagnostics;
};

using AdjointObserver = std::function<void(int step, const VectorField& u_star, const ScalarField* xi_star)>;

// Backward pass from step n down to 0 on the trajectory's stored midpoint
// velocities. Terminal adjoints default to zero.
AdjointTrajectory run_backward(const TrajectoryRecord& traj, const AdjointSourceHook& sources,
                               const VectorField* terminal_u = nullptr, const ScalarField* terminal_xi = nullptr,
                               const AdjointObserver& observer = {});

// grad(u)^T w per face, with grad(u) from the w3 kernel: the face keeps its own
// component.
VectorField grad_transpose_product(const VectorField& u, const VectorField& w);

// xi_star * grad(xi) per face.
VectorField passive_coupling(const ScalarField& xi_star, const ScalarField& xi);

// u*A = u*M + F^T Lambda(Phi(x)) + 2 G dt_signed, with u*M already mapped and
// G = grad(u)^T u*.
VectorField long_short_convert(const VectorField& u_star_M, const SampledMap& phi_F, const VectorField& lambda_u,
                               const VectorField& grad_u_term, double dt_signed);

// xi* = xi*M + Lambda_xi(Phi(x)) - dJdxi dt_signed, with dJdxi a rate.
ScalarField update_adjoint_passive(const ScalarField& xi_star_M, const ScalarField& lambda_xi_at_phi,
                                   const ScalarField& dJdxi, double dt_signed);

// u*up = u*A + (xi* grad xi - nu lap(u*A) - dJdu) dt_signed, with dJdu a rate.
// The diffusion sign makes the backward step dissipative; the adjoint pressure
// is left to the projection that follows.
VectorField assemble_unprojected(const VectorField& u_star_A, const ScalarField* xi_star, const ScalarField* xi,
                                 double viscosity, const VectorField* dJdu, double dt_signed);

// Lambda^u += J^T I(M(y)) and Lambda^xi += I_xi(M(y)) for each window.
void update_path_integrators(std::vector<EfmWindow*> windows, const VectorField& increment_u,
                             const ScalarField* increment_xi);

}  // namespace fmadj
