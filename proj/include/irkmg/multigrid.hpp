#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "irkmg/hierarchy.hpp"
#include "irkmg/krylov.hpp"
#include "irkmg/stage.hpp"
#include "irkmg/vanka.hpp"

namespace irkmg
{

enum class SmootherAccel
{
  Chebyshev,
  GMRES
};

struct SmootherSpec
{
  /// Pre- and post-smoothing steps each.
  int sweeps = 2;
  SmootherAccel accel = SmootherAccel::Chebyshev;
  double cheby_a = 2.0;
  double cheby_b = 8.0;
  /// Vanka damping inside the accelerator.
  double omega = 1.0;
};

struct MGConfig
{
  SmootherSpec smoother;
  /// Number of levels to use counting from the finest; -1 uses all of them.
  int levels = -1;
  /// The coarsest used level is solved directly and may have at most this many unknowns.
  int coarse_max_dofs = 10000;
};

/// Sparse LU of the stage operator bordered by its per-stage constant-pressure nullspace:
/// [[A, Z], [Z^T, 0]]. Returns the solution orthogonal to Z.
class CoarseDirectSolver
{
public:
  CoarseDirectSolver(const StageOperator &op, int max_dofs);
  void solve(const Vector &b, Vector &x) const;
  int size() const { return n_; }

private:
  int n_ = 0;
  int r_ = 0;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// One V-cycle of monolithic multigrid for the stage-coupled Taylor-Hood system with
/// Vanka-preconditioned Chebyshev (or GMRES) smoothing and masked interpolation.
class MultigridPreconditioner
{
public:
  MultigridPreconditioner(const TaylorHoodHierarchy &hierarchy, const ButcherTableau &tableau,
                          double dt, MGConfig config = {});

  /// Number of levels used; level 0 is the direct-solve level.
  int num_levels() const { return static_cast<int>(levels_.size()); }
  const StageOperator &op(int level) const { return *levels_.at(level).op; }
  const StageOperator &finest_op() const { return *levels_.back().op; }
  const VankaPatchSet &vanka(int level) const;
  const MGConfig &config() const { return config_; }

  /// x = V-cycle(b) from a zero initial guess on the finest level.
  void apply(const Vector &b, Vector &x) const;
  void vcycle(int level, const Vector &b, Vector &x) const;

  /// Linearizes the convection term about finest-level stage velocities U_i on every level
  /// (coarse states by nodal injection) and refactors all patch and coarse solvers.
  void set_convection_state(const std::vector<Vector> &stage_velocities);
  void clear_convection();

  /// Stage-level masked interpolation from level-1 to level.
  void prolong(int level, const Vector &coarse, Vector &fine) const;
  void restrict_to(int level, const Vector &fine, Vector &coarse) const;

private:
  struct Level
  {
    const TaylorHoodLevel *discretization = nullptr;
    std::unique_ptr<StageOperator> op;
    std::unique_ptr<VankaPatchSet> vanka;
    SparseMatrix Pu;  // masked velocity interpolation from the previous level
    SparseMatrix Pp;
    SparseMatrix PuT;
    SparseMatrix PpT;
  };

  void smooth(int level, const Vector &b, Vector &x) const;
  void refactor_all();

  const TaylorHoodHierarchy *hierarchy_;
  ButcherTableau tableau_;
  double dt_;
  MGConfig config_;
  int first_ = 0;
  std::vector<Level> levels_;
  std::unique_ptr<CoarseDirectSolver> coarse_;
};

}  // namespace irkmg
