#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "bamesh/mesh.hpp"

namespace bamesh::metric {

using Mat2 = Eigen::Matrix2d;
using mesh::TriMesh;
using mesh::Vec2;

/// Polar factors of the affine map from the reference equilateral triangle
/// (unit side, centroid at the origin, vertices at 90, 210 and 330 degrees)
/// onto a physical triangle: F = P W with P SPD and W a rotation.
struct SteinerData {
  Mat2 f;
  Mat2 p;
  Mat2 w;
  Vec2 centroid;
};

/// Vertices of the reference triangle.
std::array<Vec2, 3> reference_triangle();

/// Throws GeometryError for degenerate or clockwise triangles.
SteinerData steiner_polar(const Vec2& a, const Vec2& b, const Vec2& c);
/// P^{-2}: the metric in which the triangle is congruent to the reference.
Mat2 element_metric(const SteinerData& s);

struct MetricParams {
  double h_min = 0.01;
  double h_max = 0.1;
  double alpha = 12.0;
};

/// Per-vertex metric tensors built from a recovered gradient.
struct MetricField {
  std::vector<Mat2> tensors;
  /// 1 where the anisotropic branch was taken.
  std::vector<std::uint8_t> anisotropic;
  double c = 0.0;
  double delta = 0.0;
  double max_gradient = 0.0;
  MetricParams params;
  /// Set when the gradient vanishes identically and the uniform fallback
  /// (1/h_max^2) I is returned.
  bool fallback = false;
};

/// C |g|^2 (e e^T + (1/alpha) e_perp e_perp^T) where |g| > delta, delta I
/// elsewhere, with C = 1/(h_min^2 M^2), delta = sqrt(alpha/C)/h_max and M the
/// largest gradient magnitude over all vertices.
MetricField build_metric(const std::vector<Vec2>& gradient, const MetricParams& params);

using MetricFunction = std::function<Mat2(const Vec2&)>;

/// Symmetric matrix logarithm / exponential via the eigen-decomposition.
Mat2 spd_log(const Mat2& g);
Mat2 sym_exp(const Mat2& s);
/// Eigenvalues clipped to [lo, hi], eigenvectors kept.
Mat2 clamp_eigenvalues(const Mat2& g, double lo, double hi);

/// Largest metric contained in both ellipses, i.e. the one prescribing the
/// smaller size in every direction.
Mat2 intersect(const Mat2& a, const Mat2& b);

/// Limits the growth of the prescribed size between neighbouring vertices
/// to a factor `ratio` per unit metric length by intersecting each tensor
/// with the propagated tensors of its neighbours. Returns the number of
/// sweeps over the edges.
int gradate(const TriMesh& mesh, std::vector<Mat2>& tensors, double ratio, int max_passes = 30);

/// Log-Euclidean interpolation of per-vertex tensors over a triangulation.
/// Points outside the mesh use the nearest triangle. Cheap to copy.
class MetricInterpolator {
 public:
  MetricInterpolator(const TriMesh& mesh, const std::vector<Mat2>& tensors);

  Mat2 operator()(const Vec2& p) const;
  Mat2 in_triangle(int t, const std::array<double, 3>& bary) const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

/// Metric length of the segment pq by 5-point Gauss-Legendre quadrature.
double metric_segment_length(const MetricFunction& g, const Vec2& p, const Vec2& q);

/// Max over triangles of the entrywise max-norm of G(centroid) - P_K^{-2}.
double metric_conformity(const TriMesh& mesh, const MetricFunction& g);

/// Metric edge lengths of every edge of the mesh.
std::vector<double> metric_edge_lengths(const TriMesh& mesh, const MetricFunction& g);

}  // namespace bamesh::metric
