#include "bamesh/clement.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Cholesky>

#include "bamesh/error.hpp"
#include "bamesh/whitney.hpp"

namespace bamesh::clement {

namespace {

double local_mass(double area, int a, int b) { return area * (a == b ? 2.0 : 1.0) / 12.0; }

int local_index(std::vector<int>& nodes, int v) {
  auto it = std::find(nodes.begin(), nodes.end(), v);
  if (it != nodes.end()) return static_cast<int>(it - nodes.begin());
  nodes.push_back(v);
  return static_cast<int>(nodes.size()) - 1;
}

std::vector<int> patch_nodes(const TriMesh& mesh, int vertex) {
  std::vector<int> nodes{vertex};
  for (int t : mesh.vertex_triangles(vertex))
    for (int v : mesh.triangle(t)) local_index(nodes, v);
  return nodes;
}

}  // namespace

PatchSystem patch_project(const TriMesh& mesh, const Vector& z_full, int vertex, int component) {
  if (vertex < 0 || vertex >= mesh.num_vertices()) throw InvalidArgument("patch_project: bad vertex");
  if (component != 0 && component != 1) throw InvalidArgument("patch_project: component is 0 or 1");
  if (z_full.size() != mesh.num_edges()) throw InvalidArgument("patch_project: z has wrong length");

  PatchSystem ps;
  ps.vertex = vertex;
  ps.nodes = patch_nodes(mesh, vertex);
  for (int t : mesh.vertex_triangles(vertex))
    for (int e : mesh.triangle_edges(t))
      if (std::find(ps.edges.begin(), ps.edges.end(), e) == ps.edges.end()) ps.edges.push_back(e);

  const auto n = static_cast<Eigen::Index>(ps.nodes.size());
  ps.g = DenseMatrix::Zero(n, n);
  ps.b = DenseMatrix::Zero(n, static_cast<Eigen::Index>(ps.edges.size()));
  for (int t : mesh.vertex_triangles(vertex)) {
    const auto& tri = mesh.triangle(t);
    const double area = mesh.area(t);
    const auto grad = whitney::barycentric_gradients(mesh, t);
    std::array<int, 3> loc;
    for (int a = 0; a < 3; ++a) loc[a] = local_index(ps.nodes, tri[a]);
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) ps.g(loc[a], loc[c]) += local_mass(area, a, c);
    // w_e = psi_head grad psi_tail - psi_tail grad psi_head on this triangle.
    const auto& tedges = mesh.triangle_edges(t);
    for (int k = 0; k < 3; ++k) {
      int ta = (k + 1) % 3, hb = (k + 2) % 3;
      if (tri[ta] > tri[hb]) std::swap(ta, hb);
      const auto col = std::find(ps.edges.begin(), ps.edges.end(), tedges[k]) - ps.edges.begin();
      for (int l = 0; l < 3; ++l) {
        ps.b(loc[l], col) += grad[ta](component) * local_mass(area, hb, l) -
                             grad[hb](component) * local_mass(area, ta, l);
      }
    }
  }
  Vector z_patch(static_cast<Eigen::Index>(ps.edges.size()));
  for (std::size_t i = 0; i < ps.edges.size(); ++i) z_patch(static_cast<Eigen::Index>(i)) = z_full(ps.edges[i]);
  Eigen::LLT<DenseMatrix> llt(ps.g);
  if (llt.info() != Eigen::Success) {
    throw GeometryError("patch_project: singular mass matrix at vertex " + std::to_string(vertex));
  }
  ps.alpha = llt.solve(ps.b * z_patch);
  return ps;
}

std::vector<Vec2> clement_gradient_full(const TriMesh& mesh, const Vector& z_full) {
  if (z_full.size() != mesh.num_edges()) {
    throw InvalidArgument("clement_gradient: z must have one entry per edge");
  }
  // Loads integral_K F psi_a for each triangle, with F the linear Whitney field.
  std::vector<std::array<Vec2, 3>> loads(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto f = whitney::whitney_vertex_values(mesh, z_full, t);
    const double area = mesh.area(t);
    for (int a = 0; a < 3; ++a) {
      loads[t][a] = Vec2::Zero();
      for (int c = 0; c < 3; ++c) loads[t][a] += local_mass(area, c, a) * f[c];
    }
  }
  std::vector<Vec2> out(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::vector<int> nodes = patch_nodes(mesh, v);
    const auto n = static_cast<Eigen::Index>(nodes.size());
    DenseMatrix g = DenseMatrix::Zero(n, n);
    DenseMatrix rhs = DenseMatrix::Zero(n, 2);
    for (int t : mesh.vertex_triangles(v)) {
      const auto& tri = mesh.triangle(t);
      const double area = mesh.area(t);
      std::array<int, 3> loc;
      for (int a = 0; a < 3; ++a) loc[a] = local_index(nodes, tri[a]);
      for (int a = 0; a < 3; ++a) {
        for (int c = 0; c < 3; ++c) g(loc[a], loc[c]) += local_mass(area, a, c);
        rhs.row(loc[a]) += loads[t][a].transpose();
      }
    }
    Eigen::LLT<DenseMatrix> llt(g);
    if (llt.info() != Eigen::Success) {
      throw GeometryError("clement_gradient: singular mass matrix at vertex " + std::to_string(v));
    }
    const DenseMatrix alpha = llt.solve(rhs);
    out[v] = alpha.row(0).transpose();
  }
  return out;
}

std::vector<Vec2> clement_gradient(const TriMesh& mesh, const Vector& z) {
  return clement_gradient_full(mesh, whitney::expand_edges(mesh, z));
}

}  // namespace bamesh::clement
