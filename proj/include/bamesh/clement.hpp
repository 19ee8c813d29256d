#pragma once

#include <vector>

#include "bamesh/linalg.hpp"
#include "bamesh/mesh.hpp"

namespace bamesh::clement {

using linalg::DenseMatrix;
using linalg::Vector;
using mesh::TriMesh;
using mesh::Vec2;

/// Local L2 projection of one component of the Whitney field onto the hat
/// functions of the patch around a vertex.
struct PatchSystem {
  int vertex = -1;
  /// Patch nodes; nodes[0] is the centre vertex.
  std::vector<int> nodes;
  /// Edges of the patch triangles (global indices), columns of `b`.
  std::vector<int> edges;
  /// g_{lj} = integral over the patch of psi_j psi_l.
  DenseMatrix g;
  /// b_{lj} = integral over the patch of (w_j)_component psi_l.
  DenseMatrix b;
  Vector alpha;
};

/// z_full holds one coefficient per edge (length N_e). Throws GeometryError
/// if the patch mass matrix is singular.
PatchSystem patch_project(const TriMesh& mesh, const Vector& z_full, int vertex, int component);

/// Recovered gradient at every vertex from interior-edge coefficients
/// (length n_e; boundary-boundary edges carry zero).
std::vector<Vec2> clement_gradient(const TriMesh& mesh, const Vector& z);
/// Same, from coefficients on all N_e edges.
std::vector<Vec2> clement_gradient_full(const TriMesh& mesh, const Vector& z_full);

}  // namespace bamesh::clement
