#include "irkmg/stage.hpp"

#include <algorithm>

#include "irkmg/error.hpp"

namespace irkmg
{

StageOperator::StageOperator(std::shared_ptr<const BlockSystem> blocks, ButcherTableau tableau,
                             double dt, std::vector<int> velocity_constrained)
  : blocks_(std::move(blocks)), tableau_(std::move(tableau)), dt_(dt),
    vel_constrained_(std::move(velocity_constrained))
{
  require(blocks_ != nullptr, "StageOperator: missing blocks");
  const auto &bl = *blocks_;
  require(bl.M.rows() == bl.n_u && bl.M.cols() == bl.n_u && bl.K.rows() == bl.n_u &&
              bl.K.cols() == bl.n_u && bl.B.rows() == bl.n_u && bl.B.cols() == bl.n_p,
          "StageOperator: block dimensions are inconsistent");
  require(dt_ >= 0.0, "StageOperator: negative timestep");
  Bt_ = bl.B.transpose();
  Bt_.makeCompressed();
  std::sort(vel_constrained_.begin(), vel_constrained_.end());
  vel_mask_.assign(bl.n_u, false);
  for (int d : vel_constrained_)
  {
    require(d >= 0 && d < bl.n_u, "StageOperator: constrained dof out of range");
    vel_mask_[d] = true;
  }
}

std::vector<int> StageOperator::constrained_indices() const
{
  std::vector<int> out;
  out.reserve(vel_constrained_.size() * stages());
  for (int s = 0; s < stages(); s++)
  {
    for (int d : vel_constrained_)
    {
      out.push_back(velocity_offset(s) + d);
    }
  }
  return out;
}

void StageOperator::set_convection(std::vector<SparseMatrix> jacobians)
{
  require(static_cast<int>(jacobians.size()) == stages(),
          "StageOperator: need one convection Jacobian per stage");
  for (const auto &J : jacobians)
  {
    require(J.rows() == n_u() && J.cols() == n_u(), "StageOperator: convection shape");
  }
  convection_ = std::move(jacobians);
}

void StageOperator::apply(const Vector &x, Vector &y) const
{
  apply_impl(x, y, true);
}

Vector StageOperator::apply(const Vector &x) const
{
  Vector y;
  apply_impl(x, y, true);
  return y;
}

void StageOperator::apply_raw(const Vector &x, Vector &y) const
{
  apply_impl(x, y, false);
}

void StageOperator::apply_impl(const Vector &x, Vector &y, bool dirichlet) const
{
  require(x.size() == size(), "StageOperator::apply: size mismatch");
  const int r = stages(), nu = n_u(), np = n_p();
  const auto &bl = *blocks_;
  const auto &A = tableau_.A;
  y.setZero(size());

  std::vector<Vector> u(r), w(r), q(r);
  for (int j = 0; j < r; j++)
  {
    u[j] = x.segment(velocity_offset(j), nu);
    if (dirichlet)
    {
      for (int d : vel_constrained_)
      {
        u[j][d] = 0.0;
      }
    }
    const auto p = x.segment(pressure_offset(j), np);
    w[j].noalias() = bl.K * u[j];
    w[j].noalias() += bl.B * p;
    q[j].noalias() = Bt_ * u[j];
  }
  Vector accum(nu);
  for (int i = 0; i < r; i++)
  {
    auto yu = y.segment(velocity_offset(i), nu);
    auto yp = y.segment(pressure_offset(i), np);
    yu.noalias() = bl.M * u[i];
    for (int j = 0; j < r; j++)
    {
      const double s = dt_ * A(i, j);
      if (s != 0.0)
      {
        yu += s * w[j];
        yp += s * q[j];
      }
    }
    if (!convection_.empty())
    {
      accum.setZero();
      for (int j = 0; j < r; j++)
      {
        if (A(i, j) != 0.0)
        {
          accum += (dt_ * A(i, j)) * u[j];
        }
      }
      yu.noalias() += convection_[i] * accum;
    }
    if (dirichlet)
    {
      for (int d : vel_constrained_)
      {
        yu[d] = x[velocity_offset(i) + d];
      }
    }
  }
}

SparseMatrix StageOperator::materialize(bool with_dirichlet, int limit) const
{
  require(size() <= limit, "StageOperator::materialize: system too large to materialize");
  const int r = stages();
  const auto &bl = *blocks_;
  const auto &A = tableau_.A;
  std::vector<Eigen::Triplet<double>> trip;
  const auto add_block = [&](const SparseMatrix &S, int row0, int col0, double scale,
                             bool row_vel, bool col_vel) {
    for (int row = 0; row < S.outerSize(); row++)
    {
      if (with_dirichlet && row_vel && vel_mask_[row])
      {
        continue;
      }
      for (SparseMatrix::InnerIterator it(S, row); it; ++it)
      {
        if (with_dirichlet && col_vel && vel_mask_[it.col()])
        {
          continue;
        }
        trip.emplace_back(row0 + row, col0 + static_cast<int>(it.col()), scale * it.value());
      }
    }
  };
  for (int i = 0; i < r; i++)
  {
    add_block(bl.M, velocity_offset(i), velocity_offset(i), 1.0, true, true);
    for (int j = 0; j < r; j++)
    {
      const double s = dt_ * A(i, j);
      if (s == 0.0)
      {
        continue;
      }
      add_block(bl.K, velocity_offset(i), velocity_offset(j), s, true, true);
      add_block(bl.B, velocity_offset(i), pressure_offset(j), s, true, false);
      add_block(Bt_, pressure_offset(i), velocity_offset(j), s, false, true);
      if (!convection_.empty())
      {
        add_block(convection_[i], velocity_offset(i), velocity_offset(j), s, true, true);
      }
    }
  }
  if (with_dirichlet)
  {
    for (int idx : constrained_indices())
    {
      trip.emplace_back(idx, idx, 1.0);
    }
  }
  SparseMatrix out(size(), size());
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

void StageOperator::project_nullspace(Vector &v) const
{
  require(v.size() == size(), "project_nullspace: size mismatch");
  for (int s = 0; s < stages(); s++)
  {
    auto seg = v.segment(pressure_offset(s), n_p());
    seg.array() -= seg.mean();
  }
}

void lift_stage_rhs(const StageOperator &op, Vector &rhs, std::span<const Vector> stage_bc)
{
  if (stage_bc.empty())
  {
    for (int idx : op.constrained_indices())
    {
      rhs[idx] = 0.0;
    }
    return;
  }
  require(static_cast<int>(stage_bc.size()) == op.stages(),
          "lift_stage_rhs: need boundary values for every stage");
  const auto &cons = op.velocity_constrained();
  Vector g = Vector::Zero(op.size());
  for (int s = 0; s < op.stages(); s++)
  {
    require(stage_bc[s].size() == static_cast<Eigen::Index>(cons.size()),
            "lift_stage_rhs: boundary value count mismatch");
    for (std::size_t k = 0; k < cons.size(); k++)
    {
      g[op.velocity_offset(s) + cons[k]] = stage_bc[s][static_cast<Eigen::Index>(k)];
    }
  }
  Vector Ag;
  op.apply_raw(g, Ag);
  rhs -= Ag;
  for (int s = 0; s < op.stages(); s++)
  {
    for (std::size_t k = 0; k < cons.size(); k++)
    {
      rhs[op.velocity_offset(s) + cons[k]] = stage_bc[s][static_cast<Eigen::Index>(k)];
    }
  }
}

Vector assemble_stage_rhs(const StageOperator &op, const StepState &state,
                          std::span<const Vector> forcing, std::span<const Vector> stage_bc)
{
  const int nu = op.n_u(), np = op.n_p();
  require(state.u.size() == nu && state.p.size() == np,
          "assemble_stage_rhs: state does not match the operator");
  require(forcing.empty() || static_cast<int>(forcing.size()) == op.stages(),
          "assemble_stage_rhs: need forcing for every stage");
  const auto &bl = op.blocks();
  Vector base_u = -(bl.K * state.u);
  base_u.noalias() -= bl.B * state.p;
  const Vector base_p = -(op.Bt() * state.u);

  Vector rhs(op.size());
  for (int s = 0; s < op.stages(); s++)
  {
    auto ru = rhs.segment(op.velocity_offset(s), nu);
    ru = base_u;
    if (!forcing.empty())
    {
      require(forcing[s].size() == nu, "assemble_stage_rhs: forcing size mismatch");
      ru.noalias() += bl.M * forcing[s];
    }
    rhs.segment(op.pressure_offset(s), np) = base_p;
  }
  lift_stage_rhs(op, rhs, stage_bc);
  return rhs;
}

Vector stage_initial_guess(const StageOperator &op, const Vector *guess,
                           std::span<const Vector> stage_bc)
{
  Vector x = guess ? *guess : Vector::Zero(op.size());
  require(x.size() == op.size(), "stage_initial_guess: size mismatch");
  const auto &cons = op.velocity_constrained();
  for (int s = 0; s < op.stages(); s++)
  {
    for (std::size_t k = 0; k < cons.size(); k++)
    {
      x[op.velocity_offset(s) + cons[k]] =
          stage_bc.empty() ? 0.0 : stage_bc[s][static_cast<Eigen::Index>(k)];
    }
  }
  return x;
}

StepState advance_step(const StepState &state, const ButcherTableau &tableau, const Vector &k,
                       const Vector *pressure_integrals)
{
  const int nu = static_cast<int>(state.u.size());
  const int np = static_cast<int>(state.p.size());
  const int r = tableau.stages();
  require(k.size() == static_cast<Eigen::Index>(r) * (nu + np),
          "advance_step: stage vector size mismatch");
  StepState next = state;
  for (int j = 0; j < r; j++)
  {
    const double s = state.dt * tableau.b[j];
    next.u += s * k.segment(static_cast<Eigen::Index>(j) * (nu + np), nu);
    next.p += s * k.segment(static_cast<Eigen::Index>(j) * (nu + np) + nu, np);
  }
  if (pressure_integrals)
  {
    remove_mean(next.p, *pressure_integrals);
  }
  next.t = state.t + state.dt;
  return next;
}

std::vector<Vector> stage_velocities(const ButcherTableau &tableau, double dt,
                                     const Vector &u_n, const Vector &k, int n_u, int n_p)
{
  const int r = tableau.stages();
  std::vector<Vector> out(r, u_n);
  for (int i = 0; i < r; i++)
  {
    for (int j = 0; j < r; j++)
    {
      if (tableau.A(i, j) != 0.0)
      {
        out[i] += (dt * tableau.A(i, j)) * k.segment(static_cast<Eigen::Index>(j) * (n_u + n_p), n_u);
      }
    }
  }
  return out;
}

StageBC parse_stage_bc(const std::string &name)
{
  if (name == "stage-value")
  {
    return StageBC::StageValue;
  }
  if (name == "derivative")
  {
    return StageBC::Derivative;
  }
  throw InvalidParameter("stage-bc must be 'stage-value' or 'derivative', got '" + name + "'");
}

std::vector<Vector> stage_boundary_data(const ButcherTableau &tableau, double dt, double t,
                                        const DirichletSpec &bc, const DofMap &velocity,
                                        const Vector &u_n, StageBC mode)
{
  const int r = tableau.stages();
  std::vector<Vector> out;
  if (mode == StageBC::Derivative)
  {
    for (int i = 0; i < r; i++)
    {
      out.push_back(bc.values(velocity, t + tableau.c[i] * dt, true));
    }
    return out;
  }
  require(dt > 0.0, "stage_boundary_data: timestep must be positive");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(tableau.A);
  require(lu.isInvertible(), "stage_boundary_data: stage-value data needs an invertible A");
  const Eigen::MatrixXd Ainv = lu.inverse();
  const auto n = static_cast<Eigen::Index>(bc.constrained.size());
  Vector un(n);
  for (Eigen::Index k = 0; k < n; k++)
  {
    un[k] = u_n[bc.constrained[static_cast<std::size_t>(k)]];
  }
  std::vector<Vector> G;
  for (int i = 0; i < r; i++)
  {
    G.push_back((bc.values(velocity, t + tableau.c[i] * dt, false) - un) / dt);
  }
  for (int i = 0; i < r; i++)
  {
    Vector k = Vector::Zero(n);
    for (int j = 0; j < r; j++)
    {
      k += Ainv(i, j) * G[j];
    }
    out.push_back(std::move(k));
  }
  return out;
}

}  // namespace irkmg
