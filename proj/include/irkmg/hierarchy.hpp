#pragma once

#include <memory>
#include <vector>

#include "irkmg/fem.hpp"
#include "irkmg/mesh.hpp"

namespace irkmg
{

/// One level of a Taylor-Hood discretization of the unit square with Dirichlet velocity
/// on the whole boundary.
struct TaylorHoodLevel
{
  const Mesh2D *mesh = nullptr;
  DofMap velocity;
  DofMap pressure;
  std::shared_ptr<const BlockSystem> blocks;
  std::vector<int> velocity_constrained;
  Vector pressure_integrals;
};

/// Discretizations on every level of a MeshHierarchy plus the interpolation operators
/// between consecutive levels. Level 0 is the coarsest.
class TaylorHoodHierarchy
{
public:
  TaylorHoodHierarchy(int n0, int refinements, double mu = 1.0);

  int num_levels() const { return static_cast<int>(levels_.size()); }
  const MeshHierarchy &meshes() const { return *meshes_; }
  const TaylorHoodLevel &level(int k) const { return levels_.at(k); }
  const TaylorHoodLevel &finest() const { return levels_.back(); }
  double mu() const { return mu_; }

  /// Velocity (vector P2) and pressure (P1) interpolation from level k-1 to level k.
  const SparseMatrix &velocity_prolongation(int k) const { return pu_.at(k - 1); }
  const SparseMatrix &pressure_prolongation(int k) const { return pp_.at(k - 1); }

private:
  std::unique_ptr<MeshHierarchy> meshes_;
  std::vector<TaylorHoodLevel> levels_;
  std::vector<SparseMatrix> pu_;
  std::vector<SparseMatrix> pp_;
  double mu_;
};

/// Restriction of a fine vector P2 field to the coarse level by nodal injection. Coarse
/// nodes coincide with the first V_c + E_c fine vertices.
Vector inject_velocity(const Vector &fine, int coarse_velocity_dofs);

}  // namespace irkmg
