#pragma once

#include <vector>

#include <Eigen/Dense>

#include "irkmg/fem.hpp"
#include "irkmg/mesh.hpp"
#include "irkmg/stage.hpp"

namespace irkmg
{

/// Vertex-star patches for the stage-coupled Taylor-Hood operator.
///
/// Patch v holds every free velocity dof on the closure of the star of vertex v, plus the
/// pressure dof at v, in all stages. Local ordering is stage-major: for each stage the
/// patch velocity dofs (ascending), then the pressure dof. The local matrices are factored
/// densely and stored as explicit inverses.
class VankaPatchSet
{
public:
  VankaPatchSet(const Mesh2D &mesh, const StageOperator &op);

  int num_patches() const { return static_cast<int>(velocity_dofs_.size()); }
  int stages() const { return stages_; }
  /// Free velocity dofs of patch v (within one stage block).
  const std::vector<int> &patch_velocity_dofs(int v) const { return velocity_dofs_.at(v); }
  int patch_size(int v) const;

  /// Recomputes all patch inverses from `op` (same topology, e.g. new convection terms).
  void refactor(const StageOperator &op);

  /// Dense restriction R_v A R_v^T of the operator onto patch v.
  Eigen::MatrixXd local_matrix(const StageOperator &op, int v) const;

  /// z = omega sum_v R_v^T A_v^{-1} R_v r on free rows; constrained rows copy r.
  void apply(const Vector &r, Vector &z, double omega = 1.0) const;

  /// Order in which patch contributions are accumulated (a permutation of all patches).
  /// The additive result does not depend on it beyond roundoff.
  void set_order(std::vector<int> order);

  /// Bytes held by the stored inverses.
  std::size_t memory_bytes() const;

private:
  void gather(const Vector &x, int v, Eigen::VectorXd &loc) const;

  int stages_ = 0;
  int n_u_ = 0;
  int n_p_ = 0;
  std::vector<std::vector<int>> velocity_dofs_;
  std::vector<int> constrained_;
  std::vector<Eigen::MatrixXd> inverses_;
  std::vector<int> order_;
};

}  // namespace irkmg
