#include "irkmg/krylov.hpp"

#include <cmath>
#include <random>

#include "irkmg/error.hpp"

namespace irkmg
{

namespace
{

void residual(const LinearMap &op, const Vector &b, const Vector &x, Vector &r,
              const Projection &project)
{
  op(x, r);
  r = b - r;
  if (project)
  {
    project(r);
  }
}

}  // namespace

KrylovStats fgmres(const LinearMap &op, const LinearMap &precond, const Vector &b, Vector &x,
                   const KrylovConfig &config, const Projection &project)
{
  require(config.restart >= 1 && config.maxiter >= 0, "fgmres: invalid restart/maxiter");
  if (x.size() == 0)
  {
    x.setZero(b.size());
  }
  require(x.size() == b.size(), "fgmres: initial guess has the wrong size");
  const int m = config.restart;
  KrylovStats stats;

  Vector r;
  residual(op, b, x, r, project);
  double beta = r.norm();
  stats.initial_residual = beta;
  stats.history.push_back(beta);
  const double target = std::max(config.rtol * beta, config.atol);
  if (beta <= target || beta == 0.0)
  {
    stats.final_residual = beta;
    stats.relative_residual = beta > 0.0 ? 1.0 : 0.0;
    stats.converged = true;
    return stats;
  }

  std::vector<Vector> V(m + 1), Z(m);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);
  Vector w;

  while (true)
  {
    V[0] = r / beta;
    g.setZero();
    g[0] = beta;
    int j = 0;
    bool done = false;
    for (; j < m && stats.iterations < config.maxiter; j++)
    {
      if (precond)
      {
        precond(V[j], Z[j]);
      }
      else
      {
        Z[j] = V[j];
      }
      if (project)
      {
        project(Z[j]);
      }
      op(Z[j], w);
      for (int i = 0; i <= j; i++)
      {
        H(i, j) = V[i].dot(w);
        w -= H(i, j) * V[i];
      }
      // One reorthogonalization pass keeps the basis orthogonal under a variable
      // preconditioner.
      for (int i = 0; i <= j; i++)
      {
        const double h = V[i].dot(w);
        H(i, j) += h;
        w -= h * V[i];
      }
      H(j + 1, j) = w.norm();
      const bool breakdown = H(j + 1, j) <= 1e-14 * H.col(j).head(j + 1).norm();
      if (!breakdown)
      {
        V[j + 1] = w / H(j + 1, j);
      }
      for (int i = 0; i < j; i++)
      {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = H(j, j) / denom;
      sn[j] = H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      stats.iterations++;
      const double est = std::abs(g[j + 1]);
      stats.history.push_back(std::min(est, stats.history.back()));
      if (est <= target || breakdown)
      {
        done = true;
        j++;
        break;
      }
    }

    // Solve the (j x j) upper triangular least-squares system and update x.
    Eigen::VectorXd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    for (int i = 0; i < j; i++)
    {
      x += y[i] * Z[i];
    }
    residual(op, b, x, r, project);
    beta = r.norm();
    stats.final_residual = beta;
    stats.relative_residual = beta / stats.initial_residual;
    if (beta <= target)
    {
      stats.converged = true;
      return stats;
    }
    if (stats.iterations >= config.maxiter)
    {
      return stats;
    }
    if (done && beta > target)
    {
      // Arnoldi estimate converged but the true residual lags; restart from it.
      stats.history.back() = std::min(stats.history.back(), beta);
    }
  }
}

void chebyshev_smooth(const LinearMap &op, const LinearMap &precond, double a, double b,
                      int steps, Vector &x, const Vector &rhs)
{
  require(a > 0.0 && a < b, "chebyshev_smooth: need 0 < a < b");
  require(steps >= 0, "chebyshev_smooth: negative step count");
  if (steps == 0)
  {
    return;
  }
  const double theta = 0.5 * (b + a);
  const double delta = 0.5 * (b - a);
  const double sigma = theta / delta;
  double rho = 1.0 / sigma;

  Vector r, z, d, Ad;
  op(x, r);
  r = rhs - r;
  precond(r, z);
  d = z / theta;
  for (int k = 0; k < steps; k++)
  {
    x += d;
    if (k + 1 == steps)
    {
      break;
    }
    op(d, Ad);
    r -= Ad;
    precond(r, z);
    const double rho_next = 1.0 / (2.0 * sigma - rho);
    d = (rho_next * rho) * d + (2.0 * rho_next / delta) * z;
    rho = rho_next;
  }
}

std::pair<double, double> estimate_interval(const LinearMap &op, const LinearMap &precond,
                                            int size, int m, unsigned seed,
                                            const Projection &project)
{
  require(m >= 5, "estimate_interval: need at least 5 Arnoldi steps");
  require(size >= 1, "estimate_interval: empty operator");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(size);
  for (int i = 0; i < size; i++)
  {
    v[i] = normal(rng);
  }
  if (project)
  {
    project(v);
  }
  std::vector<Vector> V;
  V.push_back(v / v.norm());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Vector t, w;
  int k = 0;
  for (; k < m; k++)
  {
    op(V[k], t);
    if (precond)
    {
      precond(t, w);
    }
    else
    {
      w = t;
    }
    if (project)
    {
      project(w);
    }
    for (int i = 0; i <= k; i++)
    {
      H(i, k) = V[i].dot(w);
      w -= H(i, k) * V[i];
    }
    for (int i = 0; i <= k; i++)
    {
      const double h = V[i].dot(w);
      H(i, k) += h;
      w -= h * V[i];
    }
    H(k + 1, k) = w.norm();
    if (H(k + 1, k) <= 1e-12 * H.col(k).head(k + 1).norm())
    {
      k++;
      break;
    }
    V.push_back(w / H(k + 1, k));
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(k, k), false);
  double lambda = 0.0;
  for (int i = 0; i < k; i++)
  {
    lambda = std::max(lambda, std::abs(es.eigenvalues()[i]));
  }
  require(lambda > 0.0, "estimate_interval: preconditioned operator looks singular");
  return {lambda / 4.0, lambda};
}

}  // namespace irkmg
