#include "irkmg/ns_stage.hpp"

#include "irkmg/error.hpp"

namespace irkmg
{

NavierStokesStage::NavierStokesStage(const TaylorHoodLevel &level,
                                     const ButcherTableau &tableau, double dt)
  : level_(&level), stokes_(level.blocks, tableau, dt, level.velocity_constrained)
{
}

void NavierStokesStage::set_step(const StepState &state, std::vector<Vector> stage_bc)
{
  require(static_cast<int>(stage_bc.size()) == stokes_.stages(),
          "NavierStokesStage::set_step: need boundary values for every stage");
  state_ = state;
  bc_ = std::move(stage_bc);
  // Unlifted Stokes right-hand side; constrained rows are handled in the residual.
  base_ = assemble_stage_rhs(stokes_, state_, {}, {});
}

std::vector<Vector> NavierStokesStage::stage_velocities(const Vector &k) const
{
  return irkmg::stage_velocities(stokes_.tableau(), stokes_.dt(), state_.u, k, stokes_.n_u(),
                                 stokes_.n_p());
}

void NavierStokesStage::residual(const Vector &k, Vector &F) const
{
  require(base_.size() == k.size(), "NavierStokesStage::residual: call set_step first");
  stokes_.apply_raw(k, F);
  F -= base_;
  const auto U = stage_velocities(k);
  const int nu = stokes_.n_u();
  for (int i = 0; i < stokes_.stages(); i++)
  {
    F.segment(stokes_.velocity_offset(i), nu) +=
        assemble_convection(*level_->mesh, level_->velocity, U[i], false).residual;
  }
  const auto &cons = stokes_.velocity_constrained();
  for (int i = 0; i < stokes_.stages(); i++)
  {
    for (std::size_t j = 0; j < cons.size(); j++)
    {
      const int idx = stokes_.velocity_offset(i) + cons[j];
      F[idx] = k[idx] - bc_[i][static_cast<Eigen::Index>(j)];
    }
  }
}

std::vector<SparseMatrix> NavierStokesStage::convection_jacobians(const Vector &k) const
{
  std::vector<SparseMatrix> out;
  for (const auto &u : stage_velocities(k))
  {
    out.push_back(assemble_convection(*level_->mesh, level_->velocity, u, true).jacobian);
  }
  return out;
}

}  // namespace irkmg
