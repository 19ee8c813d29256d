#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bamesh::mesh {

using Vec2 = Eigen::Vector2d;
using Triangle = std::array<int, 3>;
/// Undirected edge stored with a fixed orientation: low vertex index -> high.
using Edge = std::array<int, 2>;

enum class DomainShape { UnitDisc, UnitSquare };

enum class EdgeClass : std::uint8_t {
  InteriorTouching,  ///< at least one endpoint is an interior vertex
  BoundaryBoundary,  ///< both endpoints on the boundary
};

struct DomainSpec {
  DomainShape shape = DomainShape::UnitSquare;
  double h = 0.05;
};

double domain_diameter(DomainShape shape);

/// Edge-level connectivity derived from a triangle list.
struct EdgeTopology {
  std::vector<Edge> edges;
  /// Triangles sharing each edge; the second slot is -1 for boundary edges.
  std::vector<std::array<int, 2>> edge_triangles;
  /// For triangle t, entry k is the edge opposite local vertex k.
  std::vector<std::array<int, 3>> triangle_edges;
  std::vector<EdgeClass> edge_class;
  std::vector<std::uint8_t> boundary_edge;
  std::vector<std::uint8_t> boundary_vertex;
};

/// Builds edges with low->high orientation, classifies edges and vertices and
/// verifies conformity. Throws TopologyError when an edge is shared by more
/// than two triangles or a vertex index is out of range.
EdgeTopology build_edge_topology(std::span<const Vec2> vertices,
                                 std::span<const Triangle> triangles);

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

/// 2 * inradius / circumradius; 1 for an equilateral triangle.
double triangle_quality(const Vec2& a, const Vec2& b, const Vec2& c);

/// Conforming triangulation with counterclockwise triangles. Immutable after
/// construction.
class TriMesh {
 public:
  TriMesh() = default;
  /// Validates orientation (positive areas) and conformity, then builds the
  /// edge topology.
  TriMesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return topo_.edges; }
  const EdgeTopology& topology() const { return topo_; }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  const Edge& edge(int e) const { return topo_.edges[e]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(topo_.edges.size()); }
  /// n_v
  int num_interior_vertices() const {
    return static_cast<int>(interior_vertices_.size());
  }
  /// n_e: edges with at least one interior endpoint.
  int num_interior_edges() const {
    return static_cast<int>(interior_edges_.size());
  }
  int num_boundary_vertices() const {
    return num_vertices() - num_interior_vertices();
  }

  bool is_boundary_vertex(int v) const { return topo_.boundary_vertex[v] != 0; }
  bool is_boundary_edge(int e) const { return topo_.boundary_edge[e] != 0; }
  EdgeClass edge_class(int e) const { return topo_.edge_class[e]; }

  const std::array<int, 2>& edge_triangles(int e) const {
    return topo_.edge_triangles[e];
  }
  const std::array<int, 3>& triangle_edges(int t) const {
    return topo_.triangle_edges[t];
  }

  /// Triangles incident to vertex v.
  std::span<const int> vertex_triangles(int v) const {
    return {vertex_tri_.data() + vertex_tri_offset_[v],
            vertex_tri_.data() + vertex_tri_offset_[v + 1]};
  }

  /// Interior vertices in increasing index order (column order of L).
  const std::vector<int>& interior_vertices() const { return interior_vertices_; }
  /// Interior-touching edges in increasing index order (row order of L).
  const std::vector<int>& interior_edges() const { return interior_edges_; }
  /// Column of vertex v in L, or -1 for boundary vertices.
  int interior_vertex_index(int v) const { return interior_vertex_index_[v]; }
  /// Row of edge e in L, or -1 for boundary-boundary edges.
  int interior_edge_index(int e) const { return interior_edge_index_[e]; }

  double area(int t) const;
  double total_area() const;
  Vec2 centroid(int t) const;
  double edge_length(int e) const;
  std::vector<double> edge_lengths() const;
  double min_quality() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<Triangle> triangles_;
  EdgeTopology topo_;
  std::vector<int> vertex_tri_offset_;
  std::vector<int> vertex_tri_;
  std::vector<int> interior_vertices_;
  std::vector<int> interior_edges_;
  std::vector<int> interior_vertex_index_;
  std::vector<int> interior_edge_index_;
};

/// Structured initial mesh: crossed-diagonal grid on the unit square, radial
/// rings of near-equilateral triangles on the unit disc.
TriMesh generate_initial_mesh(const DomainSpec& spec);

struct EulerReport {
  int num_vertices = 0;
  int num_edges = 0;
  int num_triangles = 0;
  int euler_characteristic = 0;
  int num_interior_edges = 0;
  int num_interior_vertices = 0;
  /// n_v + N_t - 1, the interior edge count predicted when no interior edge
  /// joins two boundary vertices.
  int predicted_interior_edges = 0;
  bool interior_edge_identity_holds = false;
};

EulerReport euler_characteristic_check(const TriMesh& mesh);

/// Barycentric point location backed by a uniform bucket grid.
class PointLocator {
 public:
  struct Location {
    int triangle = -1;
    std::array<double, 3> barycentric{};
  };

  explicit PointLocator(const TriMesh& mesh, int buckets_per_axis = 0);

  /// Triangle containing p (barycentrics >= -tol), if any.
  std::optional<Location> locate(const Vec2& p, double tol = 1e-10) const;
  /// Like locate, but falls back to the closest triangle with barycentrics
  /// clipped onto it for points outside the mesh.
  Location locate_or_nearest(const Vec2& p) const;

  const TriMesh& mesh() const { return *mesh_; }

 private:
  std::array<double, 3> barycentric(int t, const Vec2& p) const;
  int bucket_of(double x, double y, int& ix, int& iy) const;

  const TriMesh* mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  double dx_ = 1, dy_ = 1;
  std::vector<int> offsets_;
  std::vector<int> items_;
};

/// Evaluates the P1 interpolant with nodal values `u` (length N_v) at p.
/// Points outside the mesh take the value of the closest triangle.
double evaluate_p1(const PointLocator& locator, std::span<const double> u,
                   const Vec2& p);

}  // namespace bamesh::mesh
