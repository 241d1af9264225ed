#include "irkmg/hierarchy.hpp"

#include "irkmg/error.hpp"

namespace irkmg
{

TaylorHoodHierarchy::TaylorHoodHierarchy(int n0, int refinements, double mu)
  : meshes_(std::make_unique<MeshHierarchy>(n0, refinements)), mu_(mu)
{
  require(mu > 0.0, "TaylorHoodHierarchy: viscosity must be positive");
  for (int k = 0; k < meshes_->num_levels(); k++)
  {
    const Mesh2D &mesh = meshes_->level(k);
    TaylorHoodLevel lvl{&mesh,
                        DofMap(mesh, SpaceKind::P2Vec),
                        DofMap(mesh, SpaceKind::P1),
                        nullptr,
                        {},
                        {}};
    lvl.blocks = std::make_shared<const BlockSystem>(
        assemble_stokes_blocks(mesh, lvl.velocity, lvl.pressure, mu));
    lvl.velocity_constrained = lvl.velocity.boundary_dofs();
    lvl.pressure_integrals = p1_integrals(mesh, lvl.pressure);
    levels_.push_back(std::move(lvl));
    if (k > 0)
    {
      const Mesh2D &coarse = meshes_->level(k - 1);
      pu_.push_back(prolongation(coarse, mesh, meshes_->parentage(k - 1), SpaceKind::P2Vec));
      pp_.push_back(prolongation(coarse, mesh, meshes_->parentage(k - 1), SpaceKind::P1));
    }
  }
}

Vector inject_velocity(const Vector &fine, int coarse_velocity_dofs)
{
  require(coarse_velocity_dofs <= fine.size(), "inject_velocity: coarse space is larger");
  return fine.head(coarse_velocity_dofs);
}

}  // namespace irkmg
