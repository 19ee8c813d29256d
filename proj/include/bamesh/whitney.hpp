#pragma once

#include <array>
#include <vector>

#include "bamesh/linalg.hpp"
#include "bamesh/mesh.hpp"

namespace bamesh::whitney {

using linalg::SparseMatrix;
using linalg::Vector;
using mesh::TriMesh;
using mesh::Vec2;

/// Edge-vertex incidence. Row l of `full` holds +1 at the tail (lower vertex
/// index) and -1 at the head of edge l, so (full * u)_l = u_tail - u_head.
struct IncidenceMatrix {
  SparseMatrix full;      ///< N_e x N_v
  SparseMatrix interior;  ///< n_e x n_v: interior-touching edges x interior vertices
  std::vector<int> edge_of_row;    ///< global edge index of each row of `interior`
  std::vector<int> vertex_of_col;  ///< global vertex index of each column of `interior`
};

IncidenceMatrix assemble_incidence(const TriMesh& mesh);

/// z = L u. Throws InvalidArgument on a dimension mismatch.
Vector gradient_coefficients(const SparseMatrix& l, const Vector& u);

/// Gradients of the three barycentric coordinates of triangle t.
std::array<Vec2, 3> barycentric_gradients(const TriMesh& mesh, int t);
std::array<double, 3> barycentric_coordinates(const TriMesh& mesh, int t, const Vec2& p);

/// Sum of z_l w_l at a point of triangle t, where z is indexed by the
/// interior-touching edges (length n_e) and boundary-boundary edges carry 0.
/// Throws InvalidArgument if p lies outside the triangle.
Vec2 whitney_evaluate(const TriMesh& mesh, const Vector& z, int t, const Vec2& p);
/// Same, with z indexed by all N_e edges.
Vec2 whitney_evaluate_full(const TriMesh& mesh, const Vector& z_full, int t, const Vec2& p);

/// Whitney field values at the three vertices of triangle t (the field is
/// linear on each triangle). z_full has length N_e.
std::array<Vec2, 3> whitney_vertex_values(const TriMesh& mesh, const Vector& z_full, int t);

/// Scatter interior-edge coefficients to all edges (zeros elsewhere).
Vector expand_edges(const TriMesh& mesh, const Vector& z);
/// Scatter interior nodal values to all vertices (zero boundary values).
Vector expand_vertices(const TriMesh& mesh, const Vector& u);

struct NodalRecovery {
  Vector u;
  /// ||z - Q1 Q1^T z||, zero exactly when z is a discrete gradient.
  double residual = 0.0;
};

/// u = R^{-1} Q1^T z from a thin QR of L, i.e. the least-squares solution of
/// L u = z, together with the compatibility residual.
NodalRecovery nodal_from_coefficients(const linalg::ThinQR& qr, const Vector& z);

}  // namespace bamesh::whitney
