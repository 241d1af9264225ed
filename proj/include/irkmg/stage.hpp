#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "irkmg/fem.hpp"
#include "irkmg/tableau.hpp"

namespace irkmg
{

/// The stage-coupled operator I_r (x) diag(M, 0) + dt A (x) [[K, B], [B^T, 0]].
///
/// Vectors are stage-major: [(k_1^u, k_1^p), (k_2^u, k_2^p), ...]. Constrained velocity
/// dofs (the same set in every stage) act as identity rows and columns. For Newton
/// linearizations an optional per-stage convection Jacobian J_i adds
/// J_i (dt sum_j a_ij k_j^u) to the velocity rows of stage i.
class StageOperator
{
public:
  StageOperator(std::shared_ptr<const BlockSystem> blocks, ButcherTableau tableau, double dt,
                std::vector<int> velocity_constrained = {});

  int stages() const { return tableau_.stages(); }
  int n_u() const { return blocks_->n_u; }
  int n_p() const { return blocks_->n_p; }
  int block_size() const { return n_u() + n_p(); }
  int size() const { return stages() * block_size(); }
  double dt() const { return dt_; }

  const BlockSystem &blocks() const { return *blocks_; }
  const ButcherTableau &tableau() const { return tableau_; }
  const SparseMatrix &Bt() const { return Bt_; }

  /// Sorted velocity dof indices constrained in each stage.
  const std::vector<int> &velocity_constrained() const { return vel_constrained_; }
  const std::vector<bool> &velocity_mask() const { return vel_mask_; }
  /// Stage-level (global) indices of all constrained rows.
  std::vector<int> constrained_indices() const;

  int velocity_offset(int stage) const { return stage * block_size(); }
  int pressure_offset(int stage) const { return stage * block_size() + n_u(); }

  void set_convection(std::vector<SparseMatrix> jacobians);
  void clear_convection() { convection_.clear(); }
  bool has_convection() const { return !convection_.empty(); }
  const std::vector<SparseMatrix> &convection() const { return convection_; }

  /// y = A x with Dirichlet identity rows.
  void apply(const Vector &x, Vector &y) const;
  Vector apply(const Vector &x) const;
  /// y = A x with no boundary treatment at all.
  void apply_raw(const Vector &x, Vector &y) const;

  /// Explicit sparse form. Only permitted for small systems (size <= limit).
  SparseMatrix materialize(bool with_dirichlet = true, int limit = 10000) const;

  /// Removes the per-stage mean of the pressure entries (the constant-pressure nullspace).
  void project_nullspace(Vector &v) const;

private:
  void apply_impl(const Vector &x, Vector &y, bool dirichlet) const;

  std::shared_ptr<const BlockSystem> blocks_;
  ButcherTableau tableau_;
  double dt_;
  SparseMatrix Bt_;
  std::vector<int> vel_constrained_;
  std::vector<bool> vel_mask_;
  std::vector<SparseMatrix> convection_;
};

struct StepState
{
  double t = 0.0;
  Vector u;
  Vector p;
  double dt = 0.0;
};

/// Stage right-hand side: velocity rows M f_i - K u^n - B p^n, pressure rows -B^T u^n,
/// stage-major, then lifted with the stage boundary values.
///
/// `forcing` holds velocity coefficient vectors f_i (empty means f = 0). `stage_bc` holds,
/// per stage, values on op.velocity_constrained() (empty means homogeneous).
Vector assemble_stage_rhs(const StageOperator &op, const StepState &state,
                          std::span<const Vector> forcing, std::span<const Vector> stage_bc);

/// Lifts an unlifted right-hand side: free rows lose A g, constrained rows take g.
void lift_stage_rhs(const StageOperator &op, Vector &rhs, std::span<const Vector> stage_bc);

/// Copies `guess` (or zeros) and overwrites constrained entries with the stage values.
Vector stage_initial_guess(const StageOperator &op, const Vector *guess,
                           std::span<const Vector> stage_bc);

/// u^{n+1} = u^n + dt sum_j b_j k_j^u, likewise for p, then the pressure mean is removed
/// using `pressure_integrals` when given.
StepState advance_step(const StepState &state, const ButcherTableau &tableau, const Vector &k,
                       const Vector *pressure_integrals = nullptr);

enum class StageBC
{
  /// Stage values U_i = u^n + dt sum_j a_ij k_j match g(t^n + c_i dt) on the boundary.
  StageValue,
  /// Stage unknowns take the time derivative g_t(t^n + c_i dt) on the boundary.
  Derivative
};

StageBC parse_stage_bc(const std::string &name);

/// Per-stage values for the constrained velocity dofs of `bc` at step start t. StageValue
/// solves dt A K = G - u^n for the boundary rows (A must be invertible).
std::vector<Vector> stage_boundary_data(const ButcherTableau &tableau, double dt, double t,
                                        const DirichletSpec &bc, const DofMap &velocity,
                                        const Vector &u_n, StageBC mode);

/// Stage values U_i = u^n + dt sum_j a_ij k_j^u.
std::vector<Vector> stage_velocities(const ButcherTableau &tableau, double dt,
                                     const Vector &u_n, const Vector &k, int n_u, int n_p);

}  // namespace irkmg
