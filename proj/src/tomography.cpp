#include "bamesh/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bamesh/error.hpp"

namespace bamesh::tomo {

void FanBeamGeometry::validate() const {
  if (views < 1 || rays < 1) throw InvalidArgument("fan beam: views and rays must be >= 1");
  if (!(source_radius > 1.0)) throw InvalidArgument("fan beam: sources must lie outside the disc");
}

std::vector<Ray> fan_beam_rays(const FanBeamGeometry& g) {
  g.validate();
  const double gamma_max = std::asin(1.0 / g.source_radius);
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(g.num_measurements()));
  for (int k = 0; k < g.views; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / g.views;
    const Vec2 src = g.source_radius * Vec2(std::cos(phi), std::sin(phi));
    for (int i = 0; i < g.rays; ++i) {
      const double gamma = -gamma_max + (i + 0.5) * 2.0 * gamma_max / g.rays;
      const double ang = phi + std::numbers::pi + gamma;
      rays.push_back({src, Vec2(std::cos(ang), std::sin(ang))});
    }
  }
  return rays;
}

RayTracer::RayTracer(const TriMesh& mesh) : mesh_(&mesh) {
  lo_ = hi_ = mesh.vertex(0);
  for (const auto& p : mesh.vertices()) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  const int n = std::max(1, static_cast<int>(std::sqrt(mesh.num_triangles() / 2.0)));
  nx_ = ny_ = n;
  dx_ = std::max((hi_.x() - lo_.x()) / nx_, 1e-300);
  dy_ = std::max((hi_.y() - lo_.y()) / ny_, 1e-300);
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(nx_) * ny_);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    Vec2 a = mesh.vertex(mesh.triangle(t)[0]), b = a;
    for (int v : mesh.triangle(t)) {
      a = a.cwiseMin(mesh.vertex(v));
      b = b.cwiseMax(mesh.vertex(v));
    }
    const int i0 = std::clamp(static_cast<int>((a.x() - lo_.x()) / dx_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((b.x() - lo_.x()) / dx_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((a.y() - lo_.y()) / dy_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((b.y() - lo_.y()) / dy_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) cells[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
  }
  offsets_.assign(cells.size() + 1, 0);
  for (std::size_t c = 0; c < cells.size(); ++c) offsets_[c + 1] = offsets_[c] + static_cast<int>(cells[c].size());
  items_.reserve(offsets_.back());
  for (const auto& c : cells) items_.insert(items_.end(), c.begin(), c.end());
  stamp_.assign(mesh.num_triangles(), 0);
}

namespace {

// Clips the line o + s d against triangle t. Returns false when the
// intersection has no positive length or belongs to the neighbour.
bool clip(const TriMesh& mesh, int t, const Vec2& o, const Vec2& d, double& s_in, double& s_out) {
  const auto& tri = mesh.triangle(t);
  s_in = -std::numeric_limits<double>::infinity();
  s_out = std::numeric_limits<double>::infinity();
  int on_edge = -1;
  for (int k = 0; k < 3; ++k) {
    const Vec2& a = mesh.vertex(tri[k]);
    const Vec2& b = mesh.vertex(tri[(k + 1) % 3]);
    const Vec2 e = b - a;
    const Vec2 n(-e.y(), e.x());  // inward normal for ccw triangles
    const double num = n.dot(o - a);
    const double den = n.dot(d);
    const double tol = 1e-13 * e.norm() * (1.0 + (o - a).norm());
    if (std::abs(den) <= 1e-13 * e.norm()) {
      if (num < -tol) return false;
      if (num <= tol) on_edge = k;
      continue;
    }
    const double s = -num / den;
    if (den > 0.0) s_in = std::max(s_in, s);
    else s_out = std::min(s_out, s);
  }
  if (!(s_out - s_in > 1e-14)) return false;
  if (on_edge >= 0) {
    // Keep the piece only for the triangle on the left of the ray, unless
    // the edge lies on the boundary.
    const int edge = mesh.triangle_edges(t)[(on_edge + 2) % 3];
    if (!mesh.is_boundary_edge(edge)) {
      const Vec2& a = mesh.vertex(tri[on_edge]);
      const Vec2& b = mesh.vertex(tri[(on_edge + 1) % 3]);
      const Vec2 n(-(b - a).y(), (b - a).x());
      const Vec2 left(-d.y(), d.x());
      if (!(n.dot(left) > 0.0)) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<RaySegment> RayTracer::trace(const Ray& ray) const {
  const Vec2& o = ray.origin;
  const Vec2& d = ray.direction;
  // Parameter range of the line inside the padded bounding box.
  double s0 = -std::numeric_limits<double>::infinity(), s1 = std::numeric_limits<double>::infinity();
  const Vec2 pad = 1e-9 * Vec2::Ones();
  const Vec2 lo = lo_ - pad, hi = hi_ + pad;
  for (int k = 0; k < 2; ++k) {
    if (std::abs(d(k)) < 1e-300) {
      if (o(k) < lo(k) || o(k) > hi(k)) return {};
      continue;
    }
    double a = (lo(k) - o(k)) / d(k), b = (hi(k) - o(k)) / d(k);
    if (a > b) std::swap(a, b);
    s0 = std::max(s0, a);
    s1 = std::min(s1, b);
  }
  if (!(s1 > s0)) return {};

  if (++stamp_id_ == std::numeric_limits<int>::max()) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    stamp_id_ = 1;
  }
  std::vector<RaySegment> out;
  const double step = 0.5 * std::min(dx_, dy_);
  const int nsteps = static_cast<int>((s1 - s0) / step) + 2;
  int last_i = -10, last_j = -10;
  for (int k = 0; k <= nsteps; ++k) {
    const Vec2 x = o + std::min(s0 + k * step, s1) * d;
    const int ci = std::clamp(static_cast<int>((x.x() - lo_.x()) / dx_), 0, nx_ - 1);
    const int cj = std::clamp(static_cast<int>((x.y() - lo_.y()) / dy_), 0, ny_ - 1);
    if (ci == last_i && cj == last_j) continue;
    last_i = ci;
    last_j = cj;
    for (int j = std::max(0, cj - 1); j <= std::min(ny_ - 1, cj + 1); ++j) {
      for (int i = std::max(0, ci - 1); i <= std::min(nx_ - 1, ci + 1); ++i) {
        const std::size_t c = static_cast<std::size_t>(j) * nx_ + i;
        for (int idx = offsets_[c]; idx < offsets_[c + 1]; ++idx) {
          const int t = items_[idx];
          if (stamp_[t] == stamp_id_) continue;
          stamp_[t] = stamp_id_;
          double a, b;
          if (clip(*mesh_, t, o, d, a, b)) out.push_back({t, a, b, o + a * d, o + b * d});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const RaySegment& x, const RaySegment& y) { return x.s_in < y.s_in; });
  return out;
}

std::vector<RaySegment> trace_ray(const TriMesh& mesh, const Ray& ray) {
  return RayTracer(mesh).trace(ray);
}

TomoOperator tomo_system_matrix(const TriMesh& mesh, const FanBeamGeometry& geometry) {
  const auto rays = fan_beam_rays(geometry);
  RayTracer tracer(mesh);
  std::vector<linalg::Triplet> trip;
  for (std::size_t k = 0; k < rays.size(); ++k) {
    for (const auto& seg : tracer.trace(rays[k])) {
      const auto& tri = mesh.triangle(seg.triangle);
      const Vec2& a = mesh.vertex(tri[0]);
      const Vec2& b = mesh.vertex(tri[1]);
      const Vec2& c = mesh.vertex(tri[2]);
      const double area = mesh::signed_area(a, b, c);
      auto bary = [&](const Vec2& p) {
        return std::array<double, 3>{mesh::signed_area(p, b, c) / area,
                                     mesh::signed_area(a, p, c) / area,
                                     mesh::signed_area(a, b, p) / area};
      };
      const auto l0 = bary(seg.entry), l1 = bary(seg.exit);
      const double len = seg.s_out - seg.s_in;
      for (int q = 0; q < 3; ++q) {
        trip.emplace_back(static_cast<int>(k), tri[q], 0.5 * len * (l0[q] + l1[q]));
      }
    }
  }
  TomoOperator op;
  op.a_all = linalg::from_triplets(static_cast<Eigen::Index>(rays.size()), mesh.num_vertices(), trip);
  op.a = linalg::LinearOperator(op.a_all).select_columns(mesh.interior_vertices());
  return op;
}

}  // namespace bamesh::tomo
