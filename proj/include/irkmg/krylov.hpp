#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "irkmg/fem.hpp"

namespace irkmg
{

/// y = Op(x). y is resized by the callee.
using LinearMap = std::function<void(const Vector &x, Vector &y)>;
/// In-place projection (e.g. removal of a known nullspace component).
using Projection = std::function<void(Vector &v)>;

struct KrylovConfig
{
  double rtol = 1e-8;
  double atol = 0.0;
  int maxiter = 200;
  int restart = 30;
};

struct KrylovStats
{
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  double relative_residual = 0.0;
  bool converged = false;
  /// Residual estimate after every iteration (entry 0 is the initial residual).
  std::vector<double> history;
};

/// Flexible GMRES (right preconditioned, preconditioned directions stored). Stops once
/// ||b - A x|| <= max(rtol ||r0||, atol), checked on the true residual. A null `precond`
/// means no preconditioning. An empty `x` starts from zero.
KrylovStats fgmres(const LinearMap &op, const LinearMap &precond, const Vector &b, Vector &x,
                   const KrylovConfig &config, const Projection &project = {});

/// Three-term Chebyshev iteration on precond(op) targeting the eigenvalue interval [a, b]:
/// `steps` applications of precond, polynomial degree `steps`.
void chebyshev_smooth(const LinearMap &op, const LinearMap &precond, double a, double b,
                      int steps, Vector &x, const Vector &rhs);

/// [lambda/4, lambda] with lambda the largest-magnitude Ritz value of precond(op) after an
/// m-step Arnoldi process from a seeded random probe.
std::pair<double, double> estimate_interval(const LinearMap &op, const LinearMap &precond,
                                            int size, int m, unsigned seed = 42,
                                            const Projection &project = {});

}  // namespace irkmg
