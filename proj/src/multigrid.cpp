#include "irkmg/multigrid.hpp"

#include "irkmg/error.hpp"

namespace irkmg
{

CoarseDirectSolver::CoarseDirectSolver(const StageOperator &op, int max_dofs)
  : n_(op.size()), r_(op.stages())
{
  const SparseMatrix A = op.materialize(true, max_dofs);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nonZeros() + 2 * static_cast<std::size_t>(r_) * op.n_p());
  for (int row = 0; row < A.outerSize(); row++)
  {
    for (SparseMatrix::InnerIterator it(A, row); it; ++it)
    {
      trip.emplace_back(row, static_cast<int>(it.col()), it.value());
    }
  }
  for (int s = 0; s < r_; s++)
  {
    for (int k = 0; k < op.n_p(); k++)
    {
      trip.emplace_back(op.pressure_offset(s) + k, n_ + s, 1.0);
      trip.emplace_back(n_ + s, op.pressure_offset(s) + k, 1.0);
    }
  }
  Eigen::SparseMatrix<double> bordered(n_ + r_, n_ + r_);
  bordered.setFromTriplets(trip.begin(), trip.end());
  bordered.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->analyzePattern(bordered);
  lu_->factorize(bordered);
  if (lu_->info() != Eigen::Success)
  {
    throw SingularMatrix("coarse stage system could not be factored: " + lu_->lastErrorMessage());
  }
}

void CoarseDirectSolver::solve(const Vector &b, Vector &x) const
{
  require(b.size() == n_, "CoarseDirectSolver::solve: size mismatch");
  Vector rhs = Vector::Zero(n_ + r_);
  rhs.head(n_) = b;
  const Vector sol = lu_->solve(rhs);
  x = sol.head(n_);
}

namespace
{

SparseMatrix masked(const SparseMatrix &P, const std::vector<bool> &fine_mask,
                    const std::vector<bool> &coarse_mask)
{
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(P.nonZeros());
  for (int row = 0; row < P.outerSize(); row++)
  {
    if (fine_mask[row])
    {
      continue;
    }
    for (SparseMatrix::InnerIterator it(P, row); it; ++it)
    {
      if (!coarse_mask[it.col()])
      {
        trip.emplace_back(row, static_cast<int>(it.col()), it.value());
      }
    }
  }
  SparseMatrix out(P.rows(), P.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

}  // namespace

MultigridPreconditioner::MultigridPreconditioner(const TaylorHoodHierarchy &hierarchy,
                                                 const ButcherTableau &tableau, double dt,
                                                 MGConfig config)
  : hierarchy_(&hierarchy), tableau_(tableau), dt_(dt), config_(config)
{
  const int total = hierarchy.num_levels();
  const int used = config_.levels < 0 ? total : config_.levels;
  if (used < 1 || used > total)
  {
    throw InvalidParameter("mg.levels must be -1 or between 1 and " + std::to_string(total));
  }
  const auto &sm = config_.smoother;
  require(sm.sweeps >= 0, "smoother.sweeps must be non-negative");
  require(sm.accel == SmootherAccel::GMRES || (sm.cheby_a > 0.0 && sm.cheby_a < sm.cheby_b),
          "smoother.cheby_a and smoother.cheby_b must satisfy 0 < a < b");
  require(sm.omega > 0.0, "smoother.omega must be positive");
  require(dt > 0.0, "MultigridPreconditioner: timestep must be positive");
  first_ = total - used;

  for (int k = first_; k < total; k++)
  {
    Level lvl;
    lvl.discretization = &hierarchy.level(k);
    lvl.op = std::make_unique<StageOperator>(lvl.discretization->blocks, tableau_, dt_,
                                             lvl.discretization->velocity_constrained);
    if (k > first_)
    {
      const auto &prev = *levels_.back().op;
      lvl.Pu = masked(hierarchy.velocity_prolongation(k), lvl.op->velocity_mask(),
                      prev.velocity_mask());
      lvl.Pp = hierarchy.pressure_prolongation(k);
      lvl.PuT = lvl.Pu.transpose();
      lvl.PpT = lvl.Pp.transpose();
      lvl.vanka = std::make_unique<VankaPatchSet>(*lvl.discretization->mesh, *lvl.op);
    }
    levels_.push_back(std::move(lvl));
  }
  if (num_levels() == 1 && levels_[0].op->size() > config_.coarse_max_dofs)
  {
    throw InvalidParameter("single-level solve is larger than the coarse solver limit");
  }
  coarse_ = std::make_unique<CoarseDirectSolver>(*levels_[0].op, config_.coarse_max_dofs);
}

const VankaPatchSet &MultigridPreconditioner::vanka(int level) const
{
  require(level > 0 && level < num_levels(), "MultigridPreconditioner::vanka: no smoother there");
  return *levels_[level].vanka;
}

void MultigridPreconditioner::prolong(int level, const Vector &coarse, Vector &fine) const
{
  const Level &f = levels_.at(level);
  const StageOperator &cop = *levels_.at(level - 1).op;
  const StageOperator &fop = *f.op;
  fine.setZero(fop.size());
  for (int s = 0; s < fop.stages(); s++)
  {
    fine.segment(fop.velocity_offset(s), fop.n_u()).noalias() =
        f.Pu * coarse.segment(cop.velocity_offset(s), cop.n_u());
    fine.segment(fop.pressure_offset(s), fop.n_p()).noalias() =
        f.Pp * coarse.segment(cop.pressure_offset(s), cop.n_p());
  }
}

void MultigridPreconditioner::restrict_to(int level, const Vector &fine, Vector &coarse) const
{
  const Level &f = levels_.at(level);
  const StageOperator &cop = *levels_.at(level - 1).op;
  const StageOperator &fop = *f.op;
  coarse.setZero(cop.size());
  for (int s = 0; s < fop.stages(); s++)
  {
    coarse.segment(cop.velocity_offset(s), cop.n_u()).noalias() =
        f.PuT * fine.segment(fop.velocity_offset(s), fop.n_u());
    coarse.segment(cop.pressure_offset(s), cop.n_p()).noalias() =
        f.PpT * fine.segment(fop.pressure_offset(s), fop.n_p());
  }
}

void MultigridPreconditioner::smooth(int level, const Vector &b, Vector &x) const
{
  const Level &lvl = levels_[level];
  const auto &sm = config_.smoother;
  if (sm.sweeps == 0)
  {
    return;
  }
  const LinearMap A = [&](const Vector &in, Vector &out) { lvl.op->apply(in, out); };
  const LinearMap M = [&](const Vector &in, Vector &out) { lvl.vanka->apply(in, out, sm.omega); };
  if (sm.accel == SmootherAccel::Chebyshev)
  {
    chebyshev_smooth(A, M, sm.cheby_a, sm.cheby_b, sm.sweeps, x, b);
  }
  else
  {
    KrylovConfig kc;
    kc.rtol = 0.0;
    kc.atol = 0.0;
    kc.maxiter = sm.sweeps;
    kc.restart = sm.sweeps;
    fgmres(A, M, b, x, kc);
  }
}

void MultigridPreconditioner::vcycle(int level, const Vector &b, Vector &x) const
{
  if (level == 0)
  {
    coarse_->solve(b, x);
    return;
  }
  const Level &lvl = levels_[level];
  if (x.size() != b.size())
  {
    x.setZero(b.size());
  }
  smooth(level, b, x);
  Vector r;
  lvl.op->apply(x, r);
  r = b - r;
  Vector rc, ec;
  restrict_to(level, r, rc);
  vcycle(level - 1, rc, ec);
  Vector corr;
  prolong(level, ec, corr);
  x += corr;
  smooth(level, b, x);
}

void MultigridPreconditioner::apply(const Vector &b, Vector &x) const
{
  x.setZero(b.size());
  vcycle(num_levels() - 1, b, x);
}

void MultigridPreconditioner::set_convection_state(const std::vector<Vector> &stage_velocities)
{
  require(static_cast<int>(stage_velocities.size()) == tableau_.stages(),
          "set_convection_state: need one velocity per stage");
  std::vector<Vector> U = stage_velocities;
  for (int l = num_levels() - 1; l >= 0; l--)
  {
    Level &lvl = levels_[l];
    const int nu = lvl.op->n_u();
    std::vector<SparseMatrix> jac;
    for (auto &u : U)
    {
      if (u.size() != nu)
      {
        u = inject_velocity(u, nu);
      }
      jac.push_back(assemble_convection(*lvl.discretization->mesh,
                                        lvl.discretization->velocity, u, true)
                        .jacobian);
    }
    lvl.op->set_convection(std::move(jac));
  }
  refactor_all();
}

void MultigridPreconditioner::clear_convection()
{
  for (auto &lvl : levels_)
  {
    lvl.op->clear_convection();
  }
  refactor_all();
}

void MultigridPreconditioner::refactor_all()
{
  for (int l = 1; l < num_levels(); l++)
  {
    levels_[l].vanka->refactor(*levels_[l].op);
  }
  coarse_ = std::make_unique<CoarseDirectSolver>(*levels_[0].op, config_.coarse_max_dofs);
}

}  // namespace irkmg
