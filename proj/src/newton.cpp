#include "irkmg/newton.hpp"

#include <cmath>
#include <sstream>

#include "irkmg/error.hpp"

namespace irkmg
{

namespace
{

constexpr double eta_floor = 1e-12;

void check_config(const NewtonConfig &c)
{
  require(c.atol > 0.0, "newton.atol must be positive");
  require(c.maxit >= 1, "newton.maxit must be at least 1");
  require(c.ew_gamma > 0.0 && c.ew_gamma <= 1.0, "newton.ew_gamma must lie in (0, 1]");
  require(c.ew_alpha >= 1.0, "newton.ew_alpha must be >= 1");
  require(c.eta0 > 0.0 && c.eta0 < 1.0, "newton.eta0 must lie in (0, 1)");
  require(c.eta_max > 0.0 && c.eta_max < 1.0, "newton.eta_max must lie in (0, 1)");
  require(c.fixed_eta >= 0.0 && c.fixed_eta < 1.0, "fixed forcing term must lie in [0, 1)");
}

double norm_of(const Vector &v, const Projection &project)
{
  if (!project)
  {
    return v.norm();
  }
  Vector w = v;
  project(w);
  return w.norm();
}

}  // namespace

ForcingTerm ew_forcing(double eta_prev, double norm_k, double norm_prev,
                       const NewtonConfig &config)
{
  require(norm_prev > 0.0 && norm_k >= 0.0, "ew_forcing: residual norms must be positive");
  const double ratio = norm_k / norm_prev;
  double eta = config.ew_gamma * std::pow(ratio, config.ew_alpha);
  const double guard = config.ew_gamma * std::pow(eta_prev, config.ew_alpha);
  const bool safeguarded = config.safeguard && guard > 0.1;
  if (safeguarded)
  {
    eta = std::max(eta, guard);
  }
  eta = std::min(eta, config.eta_max);
  return {std::max(eta, eta_floor), safeguarded};
}

int NewtonStats::total_linear_iterations() const
{
  int total = 0;
  for (const auto &s : linear)
  {
    total += s.iterations;
  }
  return total;
}

NewtonStats newton_solve(const NewtonProblem &problem, Vector &k, const NewtonConfig &config)
{
  check_config(config);
  require(problem.residual && problem.linearize && problem.jacobian && problem.solve,
          "newton_solve: incomplete problem description");
  NewtonStats stats;
  Vector F, d, Jd;
  problem.residual(k, F);
  double norm = norm_of(F, problem.project);
  stats.residual_norms.push_back(norm);
  double eta = config.fixed_eta > 0.0 ? config.fixed_eta : config.eta0;

  while (true)
  {
    if (!std::isfinite(norm))
    {
      throw SolverFailure("Newton residual is not finite at iteration " +
                          std::to_string(stats.iterations));
    }
    if (norm <= config.atol)
    {
      stats.converged = true;
      return stats;
    }
    if (stats.iterations >= config.maxit)
    {
      std::ostringstream msg;
      msg << "Newton did not converge in " << config.maxit << " iterations (residual " << norm
          << ", tolerance " << config.atol << ")";
      throw SolverFailure(msg.str());
    }
    if (stats.iterations > 0 && config.fixed_eta == 0.0)
    {
      const auto &h = stats.residual_norms;
      eta = ew_forcing(eta, h[h.size() - 1], h[h.size() - 2], config).eta;
    }
    problem.linearize(k);
    d.setZero(k.size());
    const Vector rhs = -F;
    KrylovStats ls = problem.solve(rhs, d, eta);
    if (!ls.converged)
    {
      std::ostringstream msg;
      msg << "linear solve failed in Newton iteration " << stats.iterations + 1 << " after "
          << ls.iterations << " iterations (relative residual " << ls.relative_residual
          << ", forcing term " << eta << ")";
      throw SolverFailure(msg.str());
    }
    problem.jacobian(d, Jd);
    const double inner = norm_of(F + Jd, problem.project);
    if (inner > eta * norm * (1.0 + 1e-8))
    {
      std::ostringstream msg;
      msg << "Newton direction " << stats.iterations + 1 << " fails the forcing condition: "
          << inner << " > " << eta << " * " << norm;
      throw SolverFailure(msg.str());
    }
    stats.linear.push_back(std::move(ls));
    stats.etas.push_back(eta);
    k += d;
    stats.iterations++;
    problem.residual(k, F);
    norm = norm_of(F, problem.project);
    stats.residual_norms.push_back(norm);
  }
}

Vector warm_start(const Vector *previous, int size)
{
  if (previous == nullptr || previous->size() == 0)
  {
    return Vector::Zero(size);
  }
  require(previous->size() == size, "warm_start: previous stage vector has the wrong size");
  return *previous;
}

}  // namespace irkmg
