#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace irkmg
{

struct Point
{
  double x = 0.0;
  double y = 0.0;
};

/// Conforming triangulation of the unit square.
///
/// Cells are counterclockwise vertex triples. Local edge k of a cell is the edge opposite
/// local vertex k, i.e. (v1,v2), (v2,v0), (v0,v1). Edges are stored as sorted vertex pairs
/// in lexicographic order. Objects are immutable once built.
class Mesh2D
{
public:
  Mesh2D(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }

  const std::vector<Point> &vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>> &cells() const { return cells_; }
  const std::vector<std::array<int, 2>> &edges() const { return edges_; }
  const std::vector<std::array<int, 3>> &cell_edges() const { return cell_edges_; }
  const std::vector<bool> &boundary_vertices() const { return boundary_vertex_; }
  const std::vector<bool> &boundary_edges() const { return boundary_edge_; }

  /// Cells incident to vertex v, ascending.
  const std::vector<int> &vertex_cells(int v) const { return vertex_cells_.at(v); }

  /// Index of the edge joining a and b, or -1.
  int find_edge(int a, int b) const;

  Point edge_midpoint(int e) const;
  double cell_area(int c) const;

private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<bool> boundary_vertex_;
  std::vector<bool> boundary_edge_;
  std::vector<std::vector<int>> vertex_cells_;
};

/// Origin of a vertex of a refined mesh in its parent mesh.
struct VertexParent
{
  enum class Kind : std::uint8_t
  {
    Vertex,
    Edge
  };
  Kind kind;
  int index;
};

struct RefinedMesh
{
  Mesh2D mesh;
  /// One entry per fine vertex. Fine cells 4c..4c+3 are the children of coarse cell c.
  std::vector<VertexParent> parentage;
};

struct StarClosure
{
  std::vector<int> cells;
  std::vector<int> vertices;
  std::vector<int> edges;
};

/// n x n quadrilaterals of the unit square, each cut into 4 triangles around an added
/// center vertex. Grid points come first (y-major), then centers.
Mesh2D build_crossed_grid(int n);

/// Red refinement: every triangle is split into 4 by its edge midpoints. Fine vertex
/// V + e is the midpoint of coarse edge e.
RefinedMesh refine_uniform(const Mesh2D &mesh);

/// Cells containing v together with all vertices and edges of those cells (sorted).
StarClosure vertex_star_closure(const Mesh2D &mesh, int v);

class MeshHierarchy
{
public:
  MeshHierarchy(int n0, int refinements);

  int num_levels() const { return static_cast<int>(levels_.size()); }
  const Mesh2D &level(int k) const { return levels_.at(k); }
  const Mesh2D &finest() const { return levels_.back(); }
  /// Parentage of level k+1 vertices in level k.
  const std::vector<VertexParent> &parentage(int k) const { return parentage_.at(k); }

private:
  std::vector<Mesh2D> levels_;
  std::vector<std::vector<VertexParent>> parentage_;
};

/// Plain-text dump: "V E C", then vertex coordinates, edge pairs and cell triples.
void write_mesh(std::ostream &os, const Mesh2D &mesh);

}  // namespace irkmg
