#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "irkmg/mesh.hpp"

namespace irkmg
{

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using ScalarField = std::function<double(double x, double y)>;
using VectorField = std::function<std::array<double, 2>(double x, double y)>;

enum class SpaceKind
{
  P1,
  P2,
  P2Vec
};

/// Global numbering of a Lagrange space on a mesh.
///
/// Scalar nodes are vertices first, then edge midpoints, in mesh order. Vector spaces
/// interleave components: dof 2*node + comp. Per-cell local order is
/// [v0 v1 v2 e0 e1 e2] for scalar nodes, interleaved the same way for vectors.
class DofMap
{
public:
  DofMap(const Mesh2D &mesh, SpaceKind kind);

  SpaceKind kind() const { return kind_; }
  int num_dofs() const { return num_dofs_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int components() const { return kind_ == SpaceKind::P2Vec ? 2 : 1; }
  int dofs_per_cell() const { return dofs_per_cell_; }
  int num_cells() const { return num_cells_; }

  std::span<const int> cell_dofs(int c) const
  {
    return {cell_dofs_.data() + static_cast<std::size_t>(c) * dofs_per_cell_,
            static_cast<std::size_t>(dofs_per_cell_)};
  }
  const std::vector<Point> &nodes() const { return nodes_; }
  const std::vector<bool> &boundary_nodes() const { return boundary_nodes_; }

  /// All dofs on boundary nodes (both components for vector spaces), ascending.
  std::vector<int> boundary_dofs() const;

  /// Throws InvalidParameter unless this map was built on a mesh shaped like `mesh`.
  void check_mesh(const Mesh2D &mesh) const;

private:
  SpaceKind kind_;
  int num_dofs_ = 0;
  int dofs_per_cell_ = 0;
  int num_cells_ = 0;
  int num_vertices_ = 0;
  std::vector<int> cell_dofs_;
  std::vector<Point> nodes_;
  std::vector<bool> boundary_nodes_;
};

/// Velocity mass, stiffness (scaled by mu) and B = -<q, div v> blocks.
struct BlockSystem
{
  SparseMatrix M;
  SparseMatrix K;
  SparseMatrix B;
  int n_u = 0;
  int n_p = 0;
};

struct ConvectionTerms
{
  Vector residual;
  SparseMatrix jacobian;
};

/// Mass matrix of any space; for vectors it is block-diagonal over components.
SparseMatrix assemble_mass(const Mesh2D &mesh, const DofMap &dofs, int degree = 4);
/// <grad u, grad v>; vector Laplacian for P2Vec.
SparseMatrix assemble_stiffness(const Mesh2D &mesh, const DofMap &dofs, int degree = 2);
/// B_ij = -<psi_j, div phi_i>, velocity rows, pressure columns.
SparseMatrix assemble_divergence(const Mesh2D &mesh, const DofMap &velocity,
                                 const DofMap &pressure, int degree = 3);
/// N(u)_i = <u . grad u, phi_i> and, if requested, dN/du.
ConvectionTerms assemble_convection(const Mesh2D &mesh, const DofMap &velocity,
                                    const Vector &u, bool with_jacobian = true,
                                    int degree = 5);

BlockSystem assemble_stokes_blocks(const Mesh2D &mesh, const DofMap &velocity,
                                   const DofMap &pressure, double mu = 1.0);

/// Interpolation from coarse to fine for nested spaces. `fine` must be refine_uniform of
/// `coarse` (children of coarse cell c are fine cells 4c..4c+3).
SparseMatrix prolongation(const Mesh2D &coarse, const Mesh2D &fine,
                          const std::vector<VertexParent> &parentage, SpaceKind kind);

Vector interpolate(const DofMap &dofs, const ScalarField &f);
Vector interpolate(const DofMap &dofs, const VectorField &f);

/// Prescribed values on a set of velocity dofs, time dependent.
struct DirichletSpec
{
  std::vector<int> constrained;
  std::function<std::array<double, 2>(double, double, double)> g;
  std::function<std::array<double, 2>(double, double, double)> g_t;

  /// Values of g(., t) (or g_t when derivative) on the constrained dofs.
  Vector values(const DofMap &velocity, double t, bool derivative = false) const;
};

/// Symmetric elimination: constrained rows and columns become identity, the right-hand
/// side carries the prescribed values and free rows are lifted.
void apply_dirichlet(SparseMatrix &A, Vector &rhs, std::span<const int> constrained,
                     const Vector &values);

enum class ErrorMode
{
  Absolute,
  Relative
};

double l2_error(const Mesh2D &mesh, const DofMap &dofs, const Vector &coeffs,
                const ScalarField &exact, ErrorMode mode, int degree = 8);
double l2_error(const Mesh2D &mesh, const DofMap &dofs, const Vector &coeffs,
                const VectorField &exact, ErrorMode mode, int degree = 8);

/// Coefficient weights w_j = integral of the j-th P1 basis function.
Vector p1_integrals(const Mesh2D &mesh, const DofMap &pressure);
/// Shifts p by a constant so that its integral vanishes.
void remove_mean(Vector &p, const Vector &integrals);

struct DofCounts
{
  long long velocity;
  long long pressure;
  long long total;
};
DofCounts count_dofs(int n0, int refinements);

/// Coordinate dump "row col value", one entry per line, row-major sorted.
void write_matrix(std::ostream &os, const SparseMatrix &A);

}  // namespace irkmg
