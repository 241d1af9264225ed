#include "irkmg/mesh.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <string>

#include "irkmg/error.hpp"

namespace irkmg
{

namespace
{

std::array<int, 2> sorted_pair(int a, int b)
{
  return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

}  // namespace

Mesh2D::Mesh2D(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells)
  : vertices_(std::move(vertices)), cells_(std::move(cells))
{
  const int nv = num_vertices();
  for (std::size_t c = 0; c < cells_.size(); c++)
  {
    for (int v : cells_[c])
    {
      require(v >= 0 && v < nv, "Mesh2D: cell references an invalid vertex");
    }
    require(cell_area(static_cast<int>(c)) > 0.0,
            "Mesh2D: cell " + std::to_string(c) + " is not counterclockwise");
  }

  edges_.reserve(3 * cells_.size());
  for (const auto &cell : cells_)
  {
    for (int k = 0; k < 3; k++)
    {
      edges_.push_back(sorted_pair(cell[(k + 1) % 3], cell[(k + 2) % 3]));
    }
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  std::vector<int> edge_count(edges_.size(), 0);
  cell_edges_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); c++)
  {
    const auto &cell = cells_[c];
    for (int k = 0; k < 3; k++)
    {
      const int e = find_edge(cell[(k + 1) % 3], cell[(k + 2) % 3]);
      cell_edges_[c][k] = e;
      edge_count[e]++;
    }
  }

  boundary_edge_.assign(edges_.size(), false);
  boundary_vertex_.assign(vertices_.size(), false);
  for (std::size_t e = 0; e < edges_.size(); e++)
  {
    require(edge_count[e] <= 2, "Mesh2D: non-manifold edge");
    if (edge_count[e] == 1)
    {
      boundary_edge_[e] = true;
      boundary_vertex_[edges_[e][0]] = true;
      boundary_vertex_[edges_[e][1]] = true;
    }
  }

  vertex_cells_.resize(vertices_.size());
  for (std::size_t c = 0; c < cells_.size(); c++)
  {
    for (int v : cells_[c])
    {
      vertex_cells_[v].push_back(static_cast<int>(c));
    }
  }
}

int Mesh2D::find_edge(int a, int b) const
{
  const auto key = sorted_pair(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key)
  {
    return -1;
  }
  return static_cast<int>(it - edges_.begin());
}

Point Mesh2D::edge_midpoint(int e) const
{
  const auto &p = vertices_[edges_.at(e)[0]];
  const auto &q = vertices_[edges_.at(e)[1]];
  return {0.5 * (p.x + q.x), 0.5 * (p.y + q.y)};
}

double Mesh2D::cell_area(int c) const
{
  const auto &cell = cells_.at(c);
  const auto &a = vertices_[cell[0]];
  const auto &b = vertices_[cell[1]];
  const auto &d = vertices_[cell[2]];
  return 0.5 * ((b.x - a.x) * (d.y - a.y) - (b.y - a.y) * (d.x - a.x));
}

Mesh2D build_crossed_grid(int n)
{
  require(n >= 1, "build_crossed_grid: cells per side must be positive");
  const double h = 1.0 / n;
  std::vector<Point> vertices;
  vertices.reserve((n + 1) * (n + 1) + n * n);
  for (int j = 0; j <= n; j++)
  {
    for (int i = 0; i <= n; i++)
    {
      vertices.push_back({i * h, j * h});
    }
  }
  for (int j = 0; j < n; j++)
  {
    for (int i = 0; i < n; i++)
    {
      vertices.push_back({(i + 0.5) * h, (j + 0.5) * h});
    }
  }

  const auto grid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * n * n);
  for (int j = 0; j < n; j++)
  {
    for (int i = 0; i < n; i++)
    {
      const int bl = grid(i, j), br = grid(i + 1, j);
      const int tr = grid(i + 1, j + 1), tl = grid(i, j + 1);
      const int center = (n + 1) * (n + 1) + j * n + i;
      cells.push_back({bl, br, center});
      cells.push_back({br, tr, center});
      cells.push_back({tr, tl, center});
      cells.push_back({tl, bl, center});
    }
  }
  return Mesh2D(std::move(vertices), std::move(cells));
}

RefinedMesh refine_uniform(const Mesh2D &mesh)
{
  const int nv = mesh.num_vertices();
  std::vector<Point> vertices = mesh.vertices();
  std::vector<VertexParent> parentage;
  parentage.reserve(nv + mesh.num_edges());
  for (int v = 0; v < nv; v++)
  {
    parentage.push_back({VertexParent::Kind::Vertex, v});
  }
  for (int e = 0; e < mesh.num_edges(); e++)
  {
    vertices.push_back(mesh.edge_midpoint(e));
    parentage.push_back({VertexParent::Kind::Edge, e});
  }

  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); c++)
  {
    const auto &v = mesh.cells()[c];
    const auto &e = mesh.cell_edges()[c];
    const int m0 = nv + e[0], m1 = nv + e[1], m2 = nv + e[2];
    cells.push_back({v[0], m2, m1});
    cells.push_back({m2, v[1], m0});
    cells.push_back({m1, m0, v[2]});
    cells.push_back({m0, m1, m2});
  }
  return {Mesh2D(std::move(vertices), std::move(cells)), std::move(parentage)};
}

StarClosure vertex_star_closure(const Mesh2D &mesh, int v)
{
  require(v >= 0 && v < mesh.num_vertices(), "vertex_star_closure: invalid vertex index");
  StarClosure star;
  star.cells = mesh.vertex_cells(v);
  for (int c : star.cells)
  {
    for (int k = 0; k < 3; k++)
    {
      star.vertices.push_back(mesh.cells()[c][k]);
      star.edges.push_back(mesh.cell_edges()[c][k]);
    }
  }
  for (auto *list : {&star.vertices, &star.edges})
  {
    std::sort(list->begin(), list->end());
    list->erase(std::unique(list->begin(), list->end()), list->end());
  }
  return star;
}

MeshHierarchy::MeshHierarchy(int n0, int refinements)
{
  require(refinements >= 0, "MeshHierarchy: refinement count must be non-negative");
  levels_.push_back(build_crossed_grid(n0));
  for (int k = 0; k < refinements; k++)
  {
    auto refined = refine_uniform(levels_.back());
    levels_.push_back(std::move(refined.mesh));
    parentage_.push_back(std::move(refined.parentage));
  }
}

void write_mesh(std::ostream &os, const Mesh2D &mesh)
{
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << mesh.num_vertices() << ' ' << mesh.num_edges() << ' ' << mesh.num_cells() << '\n';
  os << std::setprecision(17);
  for (const auto &p : mesh.vertices())
  {
    os << p.x << ' ' << p.y << '\n';
  }
  for (const auto &e : mesh.edges())
  {
    os << e[0] << ' ' << e[1] << '\n';
  }
  for (const auto &c : mesh.cells())
  {
    os << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace irkmg
