#pragma once

#include <cmath>
#include <random>

#include "bamesh/linalg.hpp"
#include "bamesh/mesh.hpp"

namespace testing {

using bamesh::linalg::Vector;
using bamesh::mesh::TriMesh;
using bamesh::mesh::Vec2;

inline TriMesh single_triangle() {
  return TriMesh({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{0, 1, 2}});
}

inline TriMesh square_with_diagonal() {
  return TriMesh({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}, {{0, 1, 2}, {0, 2, 3}});
}

/// Unit square split into four triangles around its centre (vertex 4).
inline TriMesh square_with_center() {
  return TriMesh({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1), Vec2(0.5, 0.5)},
                 {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}});
}

inline Vector random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(gen);
  return v;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
