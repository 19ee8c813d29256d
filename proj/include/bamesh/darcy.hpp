#pragma once

#include <array>
#include <functional>
#include <vector>

#include "bamesh/linalg.hpp"
#include "bamesh/mesh.hpp"

namespace bamesh::darcy {

using linalg::DenseMatrix;
using linalg::SparseMatrix;
using linalg::Vector;
using mesh::TriMesh;
using mesh::Vec2;

/// Quadratic Lagrange space: nodes are the mesh vertices followed by the
/// edge midpoints (node N_v + e for edge e).
struct P2Space {
  int num_nodes = 0;
  std::vector<Vec2> coords;
  /// Local nodes of each triangle: its three vertices, then the midpoints
  /// of the edges opposite local vertices 0, 1, 2.
  std::vector<std::array<int, 6>> element_nodes;
};

P2Space build_p2_space(const TriMesh& mesh);

/// Values of the six P2 shape functions at barycentric coordinates lam.
std::array<double, 6> p2_shape(const std::array<double, 3>& lam);

/// Poisson problem -lap f = u on the unit square with f = 0 on x1 in {0, 1}
/// and homogeneous Neumann data on x2 in {0, 1}, observed at grid points.
struct DarcyOperator {
  P2Space space;
  /// Nodes with 0 < x1 < 1.
  std::vector<int> free_nodes;
  /// Free index of each node, -1 for Dirichlet nodes.
  std::vector<int> free_index;
  SparseMatrix stiffness;    ///< G_h, free x free
  SparseMatrix mass;         ///< M_h, free x N_v (integral of phi_j psi_l)
  SparseMatrix observation;  ///< P_h, grid points x free
  std::vector<Vec2> observation_points;
  std::vector<int> interior_vertices;
};

/// Points ((i - 1/2)/n, (k - 1/2)/n), i, k = 1..n, ordered row by row.
std::vector<Vec2> observation_grid(int n);

/// Throws InvalidArgument unless the mesh covers the unit square.
DarcyOperator assemble_darcy_operators(const TriMesh& mesh, int grid = 20);

/// A_h = P_h G_h^{-1} M_h restricted to the interior vertices, or to all
/// vertices when `all_vertices` is set. Uses one sparse Cholesky
/// factorization and one solve per observation point.
DenseMatrix darcy_forward_matrix(const DarcyOperator& op, bool all_vertices = false);

/// P2 solution on all nodes (zero on Dirichlet nodes) for a P1 source given
/// on all vertices.
Vector solve_state(const DarcyOperator& op, const Vector& u_all);

/// P2 solution for a source given as a function, integrated against the P2
/// basis by the degree-4 rule rather than interpolated into P1 first.
Vector solve_state(const DarcyOperator& op, const std::function<double(const Vec2&)>& source);

}  // namespace bamesh::darcy
