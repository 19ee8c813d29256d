#include "bamesh/whitney.hpp"

#include <string>

#include "bamesh/error.hpp"

namespace bamesh::whitney {

IncidenceMatrix assemble_incidence(const TriMesh& mesh) {
  IncidenceMatrix inc;
  const int ne = mesh.num_edges();
  std::vector<linalg::Triplet> full, interior;
  full.reserve(2 * ne);
  interior.reserve(2 * mesh.num_interior_edges());
  for (int e = 0; e < ne; ++e) {
    const auto& [tail, head] = mesh.edge(e);
    full.emplace_back(e, tail, 1.0);
    full.emplace_back(e, head, -1.0);
    const int row = mesh.interior_edge_index(e);
    if (row < 0) continue;
    if (const int c = mesh.interior_vertex_index(tail); c >= 0) interior.emplace_back(row, c, 1.0);
    if (const int c = mesh.interior_vertex_index(head); c >= 0) interior.emplace_back(row, c, -1.0);
  }
  inc.full = linalg::from_triplets(ne, mesh.num_vertices(), full);
  inc.interior =
      linalg::from_triplets(mesh.num_interior_edges(), mesh.num_interior_vertices(), interior);
  inc.edge_of_row = mesh.interior_edges();
  inc.vertex_of_col = mesh.interior_vertices();
  return inc;
}

Vector gradient_coefficients(const SparseMatrix& l, const Vector& u) {
  return linalg::spmv(l, u);
}

std::array<Vec2, 3> barycentric_gradients(const TriMesh& mesh, int t) {
  const auto& tri = mesh.triangle(t);
  const double two_area = 2.0 * mesh.area(t);
  std::array<Vec2, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Vec2& b = mesh.vertex(tri[(k + 1) % 3]);
    const Vec2& c = mesh.vertex(tri[(k + 2) % 3]);
    g[k] = Vec2(b.y() - c.y(), c.x() - b.x()) / two_area;
  }
  return g;
}

std::array<double, 3> barycentric_coordinates(const TriMesh& mesh, int t, const Vec2& p) {
  const auto& tri = mesh.triangle(t);
  const Vec2& a = mesh.vertex(tri[0]);
  const Vec2& b = mesh.vertex(tri[1]);
  const Vec2& c = mesh.vertex(tri[2]);
  const double area = mesh::signed_area(a, b, c);
  return {mesh::signed_area(p, b, c) / area, mesh::signed_area(a, p, c) / area,
          mesh::signed_area(a, b, p) / area};
}

namespace {

// Whitney field on triangle t given barycentric coordinates `lam`.
Vec2 evaluate_local(const TriMesh& mesh, const Vector& z_full, int t,
                    const std::array<double, 3>& lam) {
  const auto& tri = mesh.triangle(t);
  const auto grad = barycentric_gradients(mesh, t);
  const auto& tedges = mesh.triangle_edges(t);
  Vec2 out = Vec2::Zero();
  for (int k = 0; k < 3; ++k) {
    const int e = tedges[k];
    const double ze = z_full(e);
    if (ze == 0.0) continue;
    // Edge opposite local vertex k joins local vertices a and b.
    int a = (k + 1) % 3, b = (k + 2) % 3;
    if (tri[a] > tri[b]) std::swap(a, b);  // a = tail (low index), b = head
    out += ze * (lam[b] * grad[a] - lam[a] * grad[b]);
  }
  return out;
}

void check_inside(const std::array<double, 3>& lam, int t) {
  constexpr double tol = 1e-10;
  if (lam[0] < -tol || lam[1] < -tol || lam[2] < -tol) {
    throw InvalidArgument("whitney_evaluate: point lies outside triangle " + std::to_string(t));
  }
}

}  // namespace

Vec2 whitney_evaluate_full(const TriMesh& mesh, const Vector& z_full, int t, const Vec2& p) {
  if (z_full.size() != mesh.num_edges()) {
    throw InvalidArgument("whitney_evaluate_full: z must have one entry per edge");
  }
  if (t < 0 || t >= mesh.num_triangles()) throw InvalidArgument("whitney_evaluate: bad triangle");
  const auto lam = barycentric_coordinates(mesh, t, p);
  check_inside(lam, t);
  return evaluate_local(mesh, z_full, t, lam);
}

Vec2 whitney_evaluate(const TriMesh& mesh, const Vector& z, int t, const Vec2& p) {
  if (z.size() != mesh.num_interior_edges()) {
    throw InvalidArgument("whitney_evaluate: z must have one entry per interior-touching edge");
  }
  if (t < 0 || t >= mesh.num_triangles()) throw InvalidArgument("whitney_evaluate: bad triangle");
  const auto lam = barycentric_coordinates(mesh, t, p);
  check_inside(lam, t);
  Vector z_local = Vector::Zero(mesh.num_edges());
  for (int e : mesh.triangle_edges(t)) {
    if (const int row = mesh.interior_edge_index(e); row >= 0) z_local(e) = z(row);
  }
  return evaluate_local(mesh, z_local, t, lam);
}

std::array<Vec2, 3> whitney_vertex_values(const TriMesh& mesh, const Vector& z_full, int t) {
  std::array<Vec2, 3> out;
  for (int a = 0; a < 3; ++a) {
    std::array<double, 3> lam{0.0, 0.0, 0.0};
    lam[a] = 1.0;
    out[a] = evaluate_local(mesh, z_full, t, lam);
  }
  return out;
}

Vector expand_edges(const TriMesh& mesh, const Vector& z) {
  if (z.size() != mesh.num_interior_edges()) {
    throw InvalidArgument("expand_edges: z must have one entry per interior-touching edge");
  }
  Vector full = Vector::Zero(mesh.num_edges());
  const auto& edges = mesh.interior_edges();
  for (std::size_t i = 0; i < edges.size(); ++i) full(edges[i]) = z(static_cast<Eigen::Index>(i));
  return full;
}

Vector expand_vertices(const TriMesh& mesh, const Vector& u) {
  if (u.size() != mesh.num_interior_vertices()) {
    throw InvalidArgument("expand_vertices: u must have one entry per interior vertex");
  }
  Vector full = Vector::Zero(mesh.num_vertices());
  const auto& verts = mesh.interior_vertices();
  for (std::size_t i = 0; i < verts.size(); ++i) full(verts[i]) = u(static_cast<Eigen::Index>(i));
  return full;
}

NodalRecovery nodal_from_coefficients(const linalg::ThinQR& qr, const Vector& z) {
  return {qr.solve(z), qr.range_residual(z)};
}

}  // namespace bamesh::whitney
