#include "irkmg/vanka.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "irkmg/error.hpp"

namespace irkmg
{

namespace
{

// Dense extraction of S restricted to rows/cols marked in `loc` (global -> local, -1 if
// absent).
Eigen::MatrixXd extract(const SparseMatrix &S, const std::vector<int> &rows,
                        const std::vector<int> &loc)
{
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; a++)
  {
    for (SparseMatrix::InnerIterator it(S, rows[a]); it; ++it)
    {
      const int b = loc[it.col()];
      if (b >= 0)
      {
        out(a, b) = it.value();
      }
    }
  }
  return out;
}

}  // namespace

VankaPatchSet::VankaPatchSet(const Mesh2D &mesh, const StageOperator &op)
  : stages_(op.stages()), n_u_(op.n_u()), n_p_(op.n_p()),
    constrained_(op.constrained_indices())
{
  const int V = mesh.num_vertices();
  require(n_p_ == V, "VankaPatchSet: pressure space must be P1 on this mesh");
  require(n_u_ == 2 * (V + mesh.num_edges()),
          "VankaPatchSet: velocity space must be vector P2 on this mesh");
  const auto &mask = op.velocity_mask();
  velocity_dofs_.resize(V);
  for (int v = 0; v < V; v++)
  {
    const StarClosure star = vertex_star_closure(mesh, v);
    auto &dofs = velocity_dofs_[v];
    const auto add_node = [&](int node) {
      for (int c = 0; c < 2; c++)
      {
        const int d = 2 * node + c;
        if (!mask[d])
        {
          dofs.push_back(d);
        }
      }
    };
    for (int w : star.vertices)
    {
      add_node(w);
    }
    for (int e : star.edges)
    {
      add_node(V + e);
    }
    std::sort(dofs.begin(), dofs.end());
  }
  order_.resize(V);
  std::iota(order_.begin(), order_.end(), 0);
  refactor(op);
}

int VankaPatchSet::patch_size(int v) const
{
  return stages_ * (static_cast<int>(velocity_dofs_.at(v).size()) + 1);
}

Eigen::MatrixXd VankaPatchSet::local_matrix(const StageOperator &op, int v) const
{
  require(op.stages() == stages_ && op.n_u() == n_u_ && op.n_p() == n_p_,
          "VankaPatchSet: operator does not match the patch topology");
  const auto &dofs = velocity_dofs_.at(v);
  const int nv = static_cast<int>(dofs.size());
  const int nb = nv + 1;
  const auto &bl = op.blocks();
  const auto &A = op.tableau().A;
  const double dt = op.dt();

  std::vector<int> loc(n_u_, -1);
  for (int a = 0; a < nv; a++)
  {
    loc[dofs[a]] = a;
  }
  const Eigen::MatrixXd Ml = extract(bl.M, dofs, loc);
  const Eigen::MatrixXd Kl = extract(bl.K, dofs, loc);
  std::vector<Eigen::MatrixXd> Cl;
  for (const auto &J : op.convection())
  {
    Cl.push_back(extract(J, dofs, loc));
  }
  Eigen::VectorXd Bl = Eigen::VectorXd::Zero(nv);
  for (int a = 0; a < nv; a++)
  {
    Bl[a] = bl.B.coeff(dofs[a], v);
  }
  Eigen::RowVectorXd Btl = Eigen::RowVectorXd::Zero(nv);
  for (SparseMatrix::InnerIterator it(op.Bt(), v); it; ++it)
  {
    const int b = loc[it.col()];
    if (b >= 0)
    {
      Btl[b] = it.value();
    }
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(stages_ * nb, stages_ * nb);
  for (int i = 0; i < stages_; i++)
  {
    out.block(i * nb, i * nb, nv, nv) += Ml;
    for (int j = 0; j < stages_; j++)
    {
      const double s = dt * A(i, j);
      if (s == 0.0)
      {
        continue;
      }
      auto blk = out.block(i * nb, j * nb, nv, nv);
      blk += s * Kl;
      if (!Cl.empty())
      {
        blk += s * Cl[i];
      }
      out.block(i * nb, j * nb + nv, nv, 1) += s * Bl;
      out.block(i * nb + nv, j * nb, 1, nv) += s * Btl;
    }
  }
  return out;
}

void VankaPatchSet::refactor(const StageOperator &op)
{
  inverses_.resize(velocity_dofs_.size());
  for (int v = 0; v < num_patches(); v++)
  {
    const Eigen::MatrixXd Av = local_matrix(op, v);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Av);
    const double rc = lu.rcond();
    if (!(rc > 1e-14))
    {
      throw SingularMatrix("Vanka patch at vertex " + std::to_string(v) +
                           " is singular (rcond " + std::to_string(rc) + ")");
    }
    inverses_[v] = lu.inverse();
  }
}

void VankaPatchSet::gather(const Vector &x, int v, Eigen::VectorXd &loc) const
{
  const auto &dofs = velocity_dofs_[v];
  const int nv = static_cast<int>(dofs.size());
  const int nb = nv + 1;
  const int block = n_u_ + n_p_;
  loc.resize(stages_ * nb);
  for (int s = 0; s < stages_; s++)
  {
    const int off = s * block;
    for (int a = 0; a < nv; a++)
    {
      loc[s * nb + a] = x[off + dofs[a]];
    }
    loc[s * nb + nv] = x[off + n_u_ + v];
  }
}

void VankaPatchSet::apply(const Vector &r, Vector &z, double omega) const
{
  require(r.size() == static_cast<Eigen::Index>(stages_) * (n_u_ + n_p_),
          "VankaPatchSet::apply: size mismatch");
  z.setZero(r.size());
  const int block = n_u_ + n_p_;
  Eigen::VectorXd rl, zl;
  for (int v : order_)
  {
    gather(r, v, rl);
    zl.noalias() = inverses_[v] * rl;
    const auto &dofs = velocity_dofs_[v];
    const int nv = static_cast<int>(dofs.size());
    const int nb = nv + 1;
    for (int s = 0; s < stages_; s++)
    {
      const int off = s * block;
      for (int a = 0; a < nv; a++)
      {
        z[off + dofs[a]] += omega * zl[s * nb + a];
      }
      z[off + n_u_ + v] += omega * zl[s * nb + nv];
    }
  }
  for (int idx : constrained_)
  {
    z[idx] = r[idx];
  }
}

void VankaPatchSet::set_order(std::vector<int> order)
{
  require(static_cast<int>(order.size()) == num_patches(),
          "VankaPatchSet::set_order: wrong length");
  std::vector<int> check = order;
  std::sort(check.begin(), check.end());
  for (int i = 0; i < num_patches(); i++)
  {
    require(check[i] == i, "VankaPatchSet::set_order: not a permutation");
  }
  order_ = std::move(order);
}

std::size_t VankaPatchSet::memory_bytes() const
{
  std::size_t total = 0;
  for (const auto &inv : inverses_)
  {
    total += static_cast<std::size_t>(inv.size()) * sizeof(double);
  }
  return total;
}

}  // namespace irkmg
