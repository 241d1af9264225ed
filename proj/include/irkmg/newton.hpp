#pragma once

#include <functional>
#include <vector>

#include "irkmg/krylov.hpp"

namespace irkmg
{

struct NewtonConfig
{
  double atol = 1e-10;
  int maxit = 20;
  double ew_gamma = 0.9;
  double ew_alpha = 2.0;
  double eta0 = 0.5;
  double eta_max = 0.9;
  bool safeguard = true;
  /// When positive, every inner solve uses this forcing term instead of Eisenstat-Walker.
  double fixed_eta = 0.0;
};

struct ForcingTerm
{
  double eta;
  /// Whether the safeguard threshold gamma * eta_prev^alpha > 0.1 was crossed.
  bool safeguarded;
};

/// Eisenstat-Walker "choice 2" forcing term for the next inner solve.
ForcingTerm ew_forcing(double eta_prev, double norm_k, double norm_prev,
                       const NewtonConfig &config);

struct NewtonStats
{
  int iterations = 0;
  bool converged = false;
  /// Nonlinear residual norm before each iteration and after the last one.
  std::vector<double> residual_norms;
  std::vector<double> etas;
  std::vector<KrylovStats> linear;
  int total_linear_iterations() const;
};

/// Callbacks describing one nonlinear system F(k) = 0.
struct NewtonProblem
{
  /// F(k).
  std::function<void(const Vector &k, Vector &F)> residual;
  /// Prepares the Jacobian (and any preconditioner) at k.
  std::function<void(const Vector &k)> linearize;
  /// y = J x for the current linearization.
  LinearMap jacobian;
  /// Solves J d = rhs from d = 0 to relative tolerance eta.
  std::function<KrylovStats(const Vector &rhs, Vector &d, double eta)> solve;
  /// Optional projection applied to residuals before taking norms.
  Projection project;
};

/// Inexact Newton iteration from the initial guess in k. Each direction is accepted only if
/// ||F + J d|| <= eta ||F|| holds when recomputed. Throws SolverFailure when an inner solve
/// fails or maxit is reached.
NewtonStats newton_solve(const NewtonProblem &problem, Vector &k, const NewtonConfig &config);

/// Initial guess for the next step: the previous stage solution, or zeros of the given size
/// when there is none yet.
Vector warm_start(const Vector *previous, int size);

}  // namespace irkmg
