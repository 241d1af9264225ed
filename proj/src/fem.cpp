#include "irkmg/fem.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "irkmg/error.hpp"
#include "irkmg/quadrature.hpp"

namespace irkmg
{

namespace
{

using Grad = std::array<double, 2>;

struct CellGeometry
{
  std::array<Point, 3> v;
  double det;
  std::array<Grad, 3> grad_lambda;

  CellGeometry(const Mesh2D &mesh, int c)
  {
    for (int k = 0; k < 3; k++)
    {
      v[k] = mesh.vertices()[mesh.cells()[c][k]];
    }
    const double j00 = v[1].x - v[0].x, j01 = v[2].x - v[0].x;
    const double j10 = v[1].y - v[0].y, j11 = v[2].y - v[0].y;
    det = j00 * j11 - j01 * j10;
    grad_lambda[1] = {j11 / det, -j01 / det};
    grad_lambda[2] = {-j10 / det, j00 / det};
    grad_lambda[0] = {-grad_lambda[1][0] - grad_lambda[2][0],
                      -grad_lambda[1][1] - grad_lambda[2][1]};
  }

  Point map(double xi, double eta) const
  {
    return {v[0].x + xi * (v[1].x - v[0].x) + eta * (v[2].x - v[0].x),
            v[0].y + xi * (v[1].y - v[0].y) + eta * (v[2].y - v[0].y)};
  }
};

/// Scalar basis values and gradients at one point, local order [v0 v1 v2 e0 e1 e2].
struct BasisEval
{
  int n = 0;
  std::array<double, 6> phi{};
  std::array<Grad, 6> grad{};
};

void eval_basis(SpaceKind kind, const std::array<double, 3> &lam, const CellGeometry *geo,
                BasisEval &out)
{
  if (kind == SpaceKind::P1)
  {
    out.n = 3;
    for (int i = 0; i < 3; i++)
    {
      out.phi[i] = lam[i];
      if (geo)
      {
        out.grad[i] = geo->grad_lambda[i];
      }
    }
    return;
  }
  out.n = 6;
  for (int i = 0; i < 3; i++)
  {
    out.phi[i] = lam[i] * (2.0 * lam[i] - 1.0);
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    out.phi[3 + i] = 4.0 * lam[j] * lam[k];
    if (geo)
    {
      const auto &gl = geo->grad_lambda;
      for (int d = 0; d < 2; d++)
      {
        out.grad[i][d] = (4.0 * lam[i] - 1.0) * gl[i][d];
        out.grad[3 + i][d] = 4.0 * (lam[j] * gl[k][d] + lam[k] * gl[j][d]);
      }
    }
  }
}

std::array<double, 3> barycentric(const QuadraturePoint &q)
{
  return {1.0 - q.xi - q.eta, q.xi, q.eta};
}

SpaceKind scalar_kind(SpaceKind kind)
{
  return kind == SpaceKind::P2Vec ? SpaceKind::P2 : kind;
}

SparseMatrix from_triplets(int rows, int cols, std::vector<Eigen::Triplet<double>> &trip)
{
  SparseMatrix A(rows, cols);
  A.setFromTriplets(trip.begin(), trip.end());
  // Drop entries that vanish analytically but picked up roundoff.
  for (int i = 0; i < A.outerSize(); i++)
  {
    double scale = 0.0;
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
    {
      scale = std::max(scale, std::abs(it.value()));
    }
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
    {
      if (std::abs(it.value()) <= 1e-15 * scale)
      {
        it.valueRef() = 0.0;
      }
    }
  }
  A.prune(0.0, 0.0);
  A.makeCompressed();
  return A;
}

/// Assembles a bilinear form given by a per-cell scalar local matrix; vector spaces get
/// the form applied componentwise.
template <typename LocalKernel>
SparseMatrix assemble_scalar_form(const Mesh2D &mesh, const DofMap &dofs, int degree,
                                  LocalKernel &&kernel)
{
  dofs.check_mesh(mesh);
  const auto &rule = triangle_rule(degree);
  const SpaceKind sk = scalar_kind(dofs.kind());
  const int ncomp = dofs.components();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_cells()) * dofs.dofs_per_cell() *
               dofs.dofs_per_cell() / ncomp);
  BasisEval basis;
  Eigen::Matrix<double, 6, 6> local;
  for (int c = 0; c < mesh.num_cells(); c++)
  {
    const CellGeometry geo(mesh, c);
    const int nloc = sk == SpaceKind::P1 ? 3 : 6;
    local.setZero();
    for (const auto &q : rule)
    {
      eval_basis(sk, barycentric(q), &geo, basis);
      const double w = q.weight * geo.det;
      for (int i = 0; i < nloc; i++)
      {
        for (int j = 0; j < nloc; j++)
        {
          local(i, j) += w * kernel(basis, i, j);
        }
      }
    }
    const auto cd = dofs.cell_dofs(c);
    for (int i = 0; i < nloc; i++)
    {
      for (int j = 0; j < nloc; j++)
      {
        for (int comp = 0; comp < ncomp; comp++)
        {
          trip.emplace_back(cd[ncomp * i + comp], cd[ncomp * j + comp], local(i, j));
        }
      }
    }
  }
  return from_triplets(dofs.num_dofs(), dofs.num_dofs(), trip);
}

/// Child-cell vertices of a red-refined triangle in parent barycentric coordinates.
std::array<std::array<std::array<double, 3>, 3>, 4> child_barycentrics()
{
  const std::array<double, 3> v0{1, 0, 0}, v1{0, 1, 0}, v2{0, 0, 1};
  const std::array<double, 3> m0{0, 0.5, 0.5}, m1{0.5, 0, 0.5}, m2{0.5, 0.5, 0};
  return {{{v0, m2, m1}, {m2, v1, m0}, {m1, m0, v2}, {m0, m1, m2}}};
}

}  // namespace

DofMap::DofMap(const Mesh2D &mesh, SpaceKind kind)
  : kind_(kind), num_cells_(mesh.num_cells()), num_vertices_(mesh.num_vertices())
{
  const int nv = mesh.num_vertices();
  nodes_ = mesh.vertices();
  boundary_nodes_ = mesh.boundary_vertices();
  const bool quadratic = kind != SpaceKind::P1;
  if (quadratic)
  {
    for (int e = 0; e < mesh.num_edges(); e++)
    {
      nodes_.push_back(mesh.edge_midpoint(e));
      boundary_nodes_.push_back(mesh.boundary_edges()[e]);
    }
  }
  const int ncomp = components();
  num_dofs_ = ncomp * num_nodes();
  dofs_per_cell_ = ncomp * (quadratic ? 6 : 3);
  cell_dofs_.reserve(static_cast<std::size_t>(num_cells_) * dofs_per_cell_);
  for (int c = 0; c < mesh.num_cells(); c++)
  {
    std::array<int, 6> local{};
    for (int k = 0; k < 3; k++)
    {
      local[k] = mesh.cells()[c][k];
      local[3 + k] = nv + mesh.cell_edges()[c][k];
    }
    for (int i = 0; i < (quadratic ? 6 : 3); i++)
    {
      for (int comp = 0; comp < ncomp; comp++)
      {
        cell_dofs_.push_back(ncomp * local[i] + comp);
      }
    }
  }
}

std::vector<int> DofMap::boundary_dofs() const
{
  std::vector<int> out;
  const int ncomp = components();
  for (int n = 0; n < num_nodes(); n++)
  {
    if (boundary_nodes_[n])
    {
      for (int comp = 0; comp < ncomp; comp++)
      {
        out.push_back(ncomp * n + comp);
      }
    }
  }
  return out;
}

void DofMap::check_mesh(const Mesh2D &mesh) const
{
  require(mesh.num_cells() == num_cells_ && mesh.num_vertices() == num_vertices_,
          "DofMap does not belong to this mesh");
}

SparseMatrix assemble_mass(const Mesh2D &mesh, const DofMap &dofs, int degree)
{
  return assemble_scalar_form(mesh, dofs, degree, [](const BasisEval &b, int i, int j) {
    return b.phi[i] * b.phi[j];
  });
}

SparseMatrix assemble_stiffness(const Mesh2D &mesh, const DofMap &dofs, int degree)
{
  return assemble_scalar_form(mesh, dofs, degree, [](const BasisEval &b, int i, int j) {
    return b.grad[i][0] * b.grad[j][0] + b.grad[i][1] * b.grad[j][1];
  });
}

SparseMatrix assemble_divergence(const Mesh2D &mesh, const DofMap &velocity,
                                 const DofMap &pressure, int degree)
{
  require(velocity.kind() == SpaceKind::P2Vec && pressure.kind() == SpaceKind::P1,
          "assemble_divergence: expects P2 vector velocity and P1 pressure");
  velocity.check_mesh(mesh);
  pressure.check_mesh(mesh);
  const auto &rule = triangle_rule(degree);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_cells()) * 36);
  BasisEval vb, pb;
  Eigen::Matrix<double, 12, 3> local;
  for (int c = 0; c < mesh.num_cells(); c++)
  {
    const CellGeometry geo(mesh, c);
    local.setZero();
    for (const auto &q : rule)
    {
      const auto lam = barycentric(q);
      eval_basis(SpaceKind::P2, lam, &geo, vb);
      eval_basis(SpaceKind::P1, lam, nullptr, pb);
      const double w = q.weight * geo.det;
      for (int i = 0; i < 6; i++)
      {
        for (int comp = 0; comp < 2; comp++)
        {
          for (int j = 0; j < 3; j++)
          {
            local(2 * i + comp, j) -= w * pb.phi[j] * vb.grad[i][comp];
          }
        }
      }
    }
    const auto vd = velocity.cell_dofs(c);
    const auto pd = pressure.cell_dofs(c);
    for (int i = 0; i < 12; i++)
    {
      for (int j = 0; j < 3; j++)
      {
        trip.emplace_back(vd[i], pd[j], local(i, j));
      }
    }
  }
  return from_triplets(velocity.num_dofs(), pressure.num_dofs(), trip);
}

ConvectionTerms assemble_convection(const Mesh2D &mesh, const DofMap &velocity,
                                    const Vector &u, bool with_jacobian, int degree)
{
  require(velocity.kind() == SpaceKind::P2Vec, "assemble_convection: expects P2 vector");
  velocity.check_mesh(mesh);
  require(u.size() == velocity.num_dofs(), "assemble_convection: coefficient size mismatch");
  const auto &rule = triangle_rule(degree);
  ConvectionTerms out;
  out.residual = Vector::Zero(velocity.num_dofs());
  std::vector<Eigen::Triplet<double>> trip;
  if (with_jacobian)
  {
    trip.reserve(static_cast<std::size_t>(mesh.num_cells()) * 144);
  }
  BasisEval b;
  Eigen::Matrix<double, 12, 1> rloc;
  Eigen::Matrix<double, 12, 12> jloc;
  for (int c = 0; c < mesh.num_cells(); c++)
  {
    const CellGeometry geo(mesh, c);
    const auto cd = velocity.cell_dofs(c);
    rloc.setZero();
    jloc.setZero();
    for (const auto &q : rule)
    {
      eval_basis(SpaceKind::P2, barycentric(q), &geo, b);
      const double w = q.weight * geo.det;
      std::array<double, 2> uq{0.0, 0.0};
      std::array<std::array<double, 2>, 2> G{};  // G[c][d] = d u_c / d x_d
      for (int i = 0; i < 6; i++)
      {
        for (int comp = 0; comp < 2; comp++)
        {
          const double coef = u[cd[2 * i + comp]];
          uq[comp] += coef * b.phi[i];
          G[comp][0] += coef * b.grad[i][0];
          G[comp][1] += coef * b.grad[i][1];
        }
      }
      std::array<double, 6> adv{};
      for (int m = 0; m < 6; m++)
      {
        adv[m] = uq[0] * b.grad[m][0] + uq[1] * b.grad[m][1];
      }
      for (int n = 0; n < 6; n++)
      {
        for (int comp = 0; comp < 2; comp++)
        {
          rloc(2 * n + comp) += w * (uq[0] * G[comp][0] + uq[1] * G[comp][1]) * b.phi[n];
          if (!with_jacobian)
          {
            continue;
          }
          for (int m = 0; m < 6; m++)
          {
            for (int e = 0; e < 2; e++)
            {
              double val = b.phi[m] * G[comp][e];
              if (e == comp)
              {
                val += adv[m];
              }
              jloc(2 * n + comp, 2 * m + e) += w * b.phi[n] * val;
            }
          }
        }
      }
    }
    for (int i = 0; i < 12; i++)
    {
      out.residual[cd[i]] += rloc(i);
      if (with_jacobian)
      {
        for (int j = 0; j < 12; j++)
        {
          trip.emplace_back(cd[i], cd[j], jloc(i, j));
        }
      }
    }
  }
  if (with_jacobian)
  {
    out.jacobian = from_triplets(velocity.num_dofs(), velocity.num_dofs(), trip);
  }
  else
  {
    out.jacobian = SparseMatrix(velocity.num_dofs(), velocity.num_dofs());
  }
  return out;
}

BlockSystem assemble_stokes_blocks(const Mesh2D &mesh, const DofMap &velocity,
                                   const DofMap &pressure, double mu)
{
  BlockSystem blocks;
  blocks.M = assemble_mass(mesh, velocity);
  blocks.K = assemble_stiffness(mesh, velocity);
  if (mu != 1.0)
  {
    blocks.K *= mu;
  }
  blocks.B = assemble_divergence(mesh, velocity, pressure);
  blocks.n_u = velocity.num_dofs();
  blocks.n_p = pressure.num_dofs();
  return blocks;
}

SparseMatrix prolongation(const Mesh2D &coarse, const Mesh2D &fine,
                          const std::vector<VertexParent> &parentage, SpaceKind kind)
{
  const int nvc = coarse.num_vertices();
  require(fine.num_cells() == 4 * coarse.num_cells() &&
              fine.num_vertices() == nvc + coarse.num_edges() &&
              static_cast<int>(parentage.size()) == fine.num_vertices(),
          "prolongation: levels are not a parent/child pair");
  const auto children = child_barycentrics();
  // Fine vertex of child k at local position i, as a coarse node index (vertex or nvc+edge).
  for (int c = 0; c < coarse.num_cells(); c++)
  {
    const auto &cv = coarse.cells()[c];
    const auto &ce = coarse.cell_edges()[c];
    const std::array<std::array<int, 3>, 4> expect{{{cv[0], nvc + ce[2], nvc + ce[1]},
                                                    {nvc + ce[2], cv[1], nvc + ce[0]},
                                                    {nvc + ce[1], nvc + ce[0], cv[2]},
                                                    {nvc + ce[0], nvc + ce[1], nvc + ce[2]}}};
    for (int k = 0; k < 4; k++)
    {
      require(fine.cells()[4 * c + k] == expect[k],
              "prolongation: fine mesh is not the refinement of the coarse mesh");
    }
  }

  const SpaceKind sk = scalar_kind(kind);
  const bool quadratic = sk == SpaceKind::P2;
  const int nf_nodes = fine.num_vertices() + (quadratic ? fine.num_edges() : 0);
  const int nc_nodes = nvc + (quadratic ? coarse.num_edges() : 0);
  const int ncomp = kind == SpaceKind::P2Vec ? 2 : 1;

  std::vector<bool> done(nf_nodes, false);
  std::vector<Eigen::Triplet<double>> trip;
  BasisEval b;
  const auto emit = [&](int fine_node, const std::array<double, 3> &lam,
                        const std::array<int, 6> &coarse_nodes) {
    if (done[fine_node])
    {
      return;
    }
    done[fine_node] = true;
    eval_basis(sk, lam, nullptr, b);
    for (int i = 0; i < b.n; i++)
    {
      if (b.phi[i] != 0.0)
      {
        for (int comp = 0; comp < ncomp; comp++)
        {
          trip.emplace_back(ncomp * fine_node + comp, ncomp * coarse_nodes[i] + comp,
                            b.phi[i]);
        }
      }
    }
  };

  for (int c = 0; c < coarse.num_cells(); c++)
  {
    std::array<int, 6> coarse_nodes{};
    for (int k = 0; k < 3; k++)
    {
      coarse_nodes[k] = coarse.cells()[c][k];
      coarse_nodes[3 + k] = nvc + coarse.cell_edges()[c][k];
    }
    for (int k = 0; k < 4; k++)
    {
      const int fc = 4 * c + k;
      const auto &lam = children[k];
      for (int i = 0; i < 3; i++)
      {
        emit(fine.cells()[fc][i], lam[i], coarse_nodes);
      }
      if (quadratic)
      {
        for (int e = 0; e < 3; e++)
        {
          const auto &a = lam[(e + 1) % 3];
          const auto &d = lam[(e + 2) % 3];
          emit(fine.num_vertices() + fine.cell_edges()[fc][e],
               {0.5 * (a[0] + d[0]), 0.5 * (a[1] + d[1]), 0.5 * (a[2] + d[2])},
               coarse_nodes);
        }
      }
    }
  }
  SparseMatrix P(ncomp * nf_nodes, ncomp * nc_nodes);
  P.setFromTriplets(trip.begin(), trip.end());
  P.makeCompressed();
  return P;
}

Vector interpolate(const DofMap &dofs, const ScalarField &f)
{
  require(dofs.components() == 1, "interpolate: scalar field into a vector space");
  Vector out(dofs.num_dofs());
  for (int n = 0; n < dofs.num_nodes(); n++)
  {
    out[n] = f(dofs.nodes()[n].x, dofs.nodes()[n].y);
  }
  return out;
}

Vector interpolate(const DofMap &dofs, const VectorField &f)
{
  require(dofs.components() == 2, "interpolate: vector field into a scalar space");
  Vector out(dofs.num_dofs());
  for (int n = 0; n < dofs.num_nodes(); n++)
  {
    const auto v = f(dofs.nodes()[n].x, dofs.nodes()[n].y);
    out[2 * n] = v[0];
    out[2 * n + 1] = v[1];
  }
  return out;
}

Vector DirichletSpec::values(const DofMap &velocity, double t, bool derivative) const
{
  const auto &fn = derivative ? g_t : g;
  require(static_cast<bool>(fn), "DirichletSpec: boundary function not set");
  Vector out(constrained.size());
  for (std::size_t i = 0; i < constrained.size(); i++)
  {
    const int dof = constrained[i];
    const auto &p = velocity.nodes()[dof / 2];
    out[static_cast<Eigen::Index>(i)] = fn(p.x, p.y, t)[dof % 2];
  }
  return out;
}

void apply_dirichlet(SparseMatrix &A, Vector &rhs, std::span<const int> constrained,
                     const Vector &values)
{
  require(static_cast<Eigen::Index>(constrained.size()) == values.size(),
          "apply_dirichlet: value/constraint size mismatch");
  require(A.rows() == A.cols() && A.rows() == rhs.size(),
          "apply_dirichlet: system shape mismatch");
  std::vector<bool> is_bc(A.rows(), false);
  Vector lift = Vector::Zero(A.rows());
  for (std::size_t i = 0; i < constrained.size(); i++)
  {
    const int dof = constrained[i];
    require(dof >= 0 && dof < A.rows(), "apply_dirichlet: constrained index out of range");
    is_bc[dof] = true;
    lift[dof] = values[static_cast<Eigen::Index>(i)];
  }
  rhs -= A * lift;
  for (int i = 0; i < A.outerSize(); i++)
  {
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
    {
      if (is_bc[i] || is_bc[it.col()])
      {
        it.valueRef() = (i == it.col()) ? 1.0 : 0.0;
      }
    }
  }
  for (std::size_t i = 0; i < constrained.size(); i++)
  {
    const int dof = constrained[i];
    A.coeffRef(dof, dof) = 1.0;
    rhs[dof] = values[static_cast<Eigen::Index>(i)];
  }
  A.makeCompressed();
}

namespace
{

template <int Comp, typename Exact>
double l2_error_impl(const Mesh2D &mesh, const DofMap &dofs, const Vector &coeffs,
                     const Exact &exact, ErrorMode mode, int degree)
{
  dofs.check_mesh(mesh);
  require(coeffs.size() == dofs.num_dofs(), "l2_error: coefficient size mismatch");
  require(dofs.components() == Comp, "l2_error: field rank does not match the space");
  const auto &rule = triangle_rule(degree);
  const SpaceKind sk = scalar_kind(dofs.kind());
  BasisEval b;
  double err2 = 0.0, norm2 = 0.0;
  for (int c = 0; c < mesh.num_cells(); c++)
  {
    const CellGeometry geo(mesh, c);
    const auto cd = dofs.cell_dofs(c);
    for (const auto &q : rule)
    {
      eval_basis(sk, barycentric(q), nullptr, b);
      const Point x = geo.map(q.xi, q.eta);
      std::array<double, Comp> uh{};
      for (int i = 0; i < b.n; i++)
      {
        for (int comp = 0; comp < Comp; comp++)
        {
          uh[comp] += coeffs[cd[Comp * i + comp]] * b.phi[i];
        }
      }
      std::array<double, Comp> ue{};
      if constexpr (Comp == 1)
      {
        ue[0] = exact(x.x, x.y);
      }
      else
      {
        ue = exact(x.x, x.y);
      }
      const double w = q.weight * geo.det;
      for (int comp = 0; comp < Comp; comp++)
      {
        err2 += w * (uh[comp] - ue[comp]) * (uh[comp] - ue[comp]);
        norm2 += w * ue[comp] * ue[comp];
      }
    }
  }
  if (mode == ErrorMode::Absolute)
  {
    return std::sqrt(err2);
  }
  const double norm = std::sqrt(norm2);
  require(norm >= 1e-14, "l2_error: relative error of a zero exact field");
  return std::sqrt(err2) / norm;
}

}  // namespace

double l2_error(const Mesh2D &mesh, const DofMap &dofs, const Vector &coeffs,
                const ScalarField &exact, ErrorMode mode, int degree)
{
  return l2_error_impl<1>(mesh, dofs, coeffs, exact, mode, degree);
}

double l2_error(const Mesh2D &mesh, const DofMap &dofs, const Vector &coeffs,
                const VectorField &exact, ErrorMode mode, int degree)
{
  return l2_error_impl<2>(mesh, dofs, coeffs, exact, mode, degree);
}

Vector p1_integrals(const Mesh2D &mesh, const DofMap &pressure)
{
  require(pressure.kind() == SpaceKind::P1, "p1_integrals: expects a P1 space");
  pressure.check_mesh(mesh);
  Vector w = Vector::Zero(pressure.num_dofs());
  for (int c = 0; c < mesh.num_cells(); c++)
  {
    const double third = mesh.cell_area(c) / 3.0;
    for (int v : mesh.cells()[c])
    {
      w[v] += third;
    }
  }
  return w;
}

void remove_mean(Vector &p, const Vector &integrals)
{
  p.array() -= p.dot(integrals) / integrals.sum();
}

DofCounts count_dofs(int n0, int refinements)
{
  require(n0 >= 1 && refinements >= 0, "count_dofs: invalid hierarchy parameters");
  long long v = static_cast<long long>(n0 + 1) * (n0 + 1) + static_cast<long long>(n0) * n0;
  long long c = 4LL * n0 * n0;
  long long e = v + c - 1;
  for (int k = 0; k < refinements; k++)
  {
    const long long v2 = v + e;
    const long long e2 = 2 * e + 3 * c;
    c *= 4;
    v = v2;
    e = e2;
  }
  const long long nu = 2 * (v + e);
  return {nu, v, nu + v};
}

void write_matrix(std::ostream &os, const SparseMatrix &A)
{
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  for (int i = 0; i < A.outerSize(); i++)
  {
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
    {
      os << i << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace irkmg
