#pragma once

#include <vector>

#include "irkmg/hierarchy.hpp"
#include "irkmg/stage.hpp"

namespace irkmg
{

/// Nonlinear stage equations of one Navier-Stokes step:
/// F(k) = A_stokes k - rhs + [N(U_i)]_i on free rows, k - g on constrained rows, where
/// U_i = u^n + dt sum_j a_ij k_j^u and N(u) = (u . grad) u.
class NavierStokesStage
{
public:
  NavierStokesStage(const TaylorHoodLevel &level, const ButcherTableau &tableau, double dt);

  const StageOperator &stokes() const { return stokes_; }
  int size() const { return stokes_.size(); }

  /// Fixes u^n, p^n and the per-stage boundary values for the following calls.
  void set_step(const StepState &state, std::vector<Vector> stage_bc);

  void residual(const Vector &k, Vector &F) const;
  std::vector<Vector> stage_velocities(const Vector &k) const;
  /// Convection Jacobians dN/du at each U_i.
  std::vector<SparseMatrix> convection_jacobians(const Vector &k) const;

private:
  const TaylorHoodLevel *level_;
  StageOperator stokes_;
  StepState state_;
  std::vector<Vector> bc_;
  Vector base_;
};

}  // namespace irkmg
