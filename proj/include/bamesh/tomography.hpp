#pragma once

#include <vector>

#include "bamesh/linalg.hpp"
#include "bamesh/mesh.hpp"

namespace bamesh::tomo {

using mesh::TriMesh;
using mesh::Vec2;

/// Fan-beam acquisition around the unit disc: `views` sources equally spaced
/// on a circle of radius `source_radius`, each emitting `rays` rays that
/// evenly cover the disc.
struct FanBeamGeometry {
  int views = 15;
  int rays = 300;
  double source_radius = 3.0;

  int num_measurements() const { return views * rays; }
  void validate() const;
};

struct Ray {
  Vec2 origin;
  Vec2 direction;  ///< unit length
};

/// Rays ordered view-major: ray k = view * rays + i.
std::vector<Ray> fan_beam_rays(const FanBeamGeometry& geometry);

struct RaySegment {
  int triangle;
  double s_in;  ///< arc length parameter at entry
  double s_out;
  Vec2 entry;
  Vec2 exit;
};

/// Uniform bucket grid over triangle bounding boxes for ray queries.
class RayTracer {
 public:
  explicit RayTracer(const TriMesh& mesh);

  /// Pieces of the ray inside each triangle, sorted by arc length. A ray
  /// running along an interior edge is attributed to the triangle on its
  /// left only; zero-length touches are dropped.
  std::vector<RaySegment> trace(const Ray& ray) const;

 private:
  const TriMesh* mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  double dx_ = 1, dy_ = 1;
  std::vector<int> offsets_;
  std::vector<int> items_;
  mutable std::vector<int> stamp_;
  mutable int stamp_id_ = 0;
};

std::vector<RaySegment> trace_ray(const TriMesh& mesh, const Ray& ray);

struct TomoOperator {
  /// m x N_v: integral of every hat function along every ray.
  linalg::SparseMatrix a_all;
  /// m x n_v: interior columns of a_all.
  linalg::LinearOperator a;
};

TomoOperator tomo_system_matrix(const TriMesh& mesh, const FanBeamGeometry& geometry);

}  // namespace bamesh::tomo
