#include "bamesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bamesh/error.hpp"

namespace bamesh::mesh {

double domain_diameter(DomainShape shape) {
  return shape == DomainShape::UnitDisc ? 2.0 : std::sqrt(2.0);
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double triangle_quality(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double la = (b - c).norm();
  const double lb = (c - a).norm();
  const double lc = (a - b).norm();
  const double area = std::abs(signed_area(a, b, c));
  if (area == 0.0) return 0.0;
  const double s = 0.5 * (la + lb + lc);
  const double inradius = area / s;
  const double circumradius = la * lb * lc / (4.0 * area);
  return 2.0 * inradius / circumradius;
}

EdgeTopology build_edge_topology(std::span<const Vec2> vertices,
                                 std::span<const Triangle> triangles) {
  const int nv = static_cast<int>(vertices.size());
  const int nt = static_cast<int>(triangles.size());

  struct HalfEdge {
    int lo, hi, tri, local;
  };
  std::vector<HalfEdge> half;
  half.reserve(3 * static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv) {
        throw TopologyError("triangle " + std::to_string(t) +
                            " references missing vertex " + std::to_string(tri[k]));
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw TopologyError("triangle " + std::to_string(t) + " repeats a vertex");
    }
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      half.push_back({std::min(a, b), std::max(a, b), t, k});
    }
  }
  std::sort(half.begin(), half.end(), [](const HalfEdge& x, const HalfEdge& y) {
    return x.lo != y.lo ? x.lo < y.lo : (x.hi != y.hi ? x.hi < y.hi : x.tri < y.tri);
  });

  EdgeTopology topo;
  topo.triangle_edges.assign(nt, {-1, -1, -1});
  topo.boundary_vertex.assign(nv, 0);
  for (std::size_t i = 0; i < half.size();) {
    std::size_t j = i;
    while (j < half.size() && half[j].lo == half[i].lo && half[j].hi == half[i].hi) ++j;
    const std::size_t count = j - i;
    if (count > 2) {
      throw TopologyError("edge {" + std::to_string(half[i].lo) + ", " +
                          std::to_string(half[i].hi) + "} is shared by " +
                          std::to_string(count) + " triangles");
    }
    const int e = static_cast<int>(topo.edges.size());
    topo.edges.push_back({half[i].lo, half[i].hi});
    std::array<int, 2> tris{half[i].tri, -1};
    if (count == 2) tris[1] = half[i + 1].tri;
    topo.edge_triangles.push_back(tris);
    topo.boundary_edge.push_back(count == 1 ? 1 : 0);
    for (std::size_t k = i; k < j; ++k) topo.triangle_edges[half[k].tri][half[k].local] = e;
    if (count == 1) {
      topo.boundary_vertex[half[i].lo] = 1;
      topo.boundary_vertex[half[i].hi] = 1;
    }
    i = j;
  }
  topo.edge_class.resize(topo.edges.size());
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    const bool both_boundary = topo.boundary_vertex[topo.edges[e][0]] &&
                               topo.boundary_vertex[topo.edges[e][1]];
    topo.edge_class[e] =
        both_boundary ? EdgeClass::BoundaryBoundary : EdgeClass::InteriorTouching;
  }
  return topo;
}

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  topo_ = build_edge_topology(vertices_, triangles_);
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    if (!(signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]) > 0.0)) {
      throw GeometryError("triangle " + std::to_string(t) +
                          " is degenerate or clockwise");
    }
  }

  const int nv = num_vertices();
  vertex_tri_offset_.assign(nv + 1, 0);
  for (const auto& tri : triangles_)
    for (int v : tri) ++vertex_tri_offset_[v + 1];
  for (int v = 0; v < nv; ++v) vertex_tri_offset_[v + 1] += vertex_tri_offset_[v];
  vertex_tri_.resize(vertex_tri_offset_[nv]);
  std::vector<int> fill(vertex_tri_offset_.begin(), vertex_tri_offset_.end() - 1);
  for (int t = 0; t < num_triangles(); ++t)
    for (int v : triangles_[t]) vertex_tri_[fill[v]++] = t;

  interior_vertex_index_.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (!topo_.boundary_vertex[v]) {
      interior_vertex_index_[v] = static_cast<int>(interior_vertices_.size());
      interior_vertices_.push_back(v);
    }
  }
  interior_edge_index_.assign(topo_.edges.size(), -1);
  for (int e = 0; e < num_edges(); ++e) {
    if (topo_.edge_class[e] == EdgeClass::InteriorTouching) {
      interior_edge_index_[e] = static_cast<int>(interior_edges_.size());
      interior_edges_.push_back(e);
    }
  }
}

double TriMesh::area(int t) const {
  const auto& tri = triangles_[t];
  return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double TriMesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < num_triangles(); ++t) s += area(t);
  return s;
}

Vec2 TriMesh::centroid(int t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

double TriMesh::edge_length(int e) const {
  return (vertices_[edge(e)[0]] - vertices_[edge(e)[1]]).norm();
}

std::vector<double> TriMesh::edge_lengths() const {
  std::vector<double> out(num_edges());
  for (int e = 0; e < num_edges(); ++e) out[e] = edge_length(e);
  return out;
}

double TriMesh::min_quality() const {
  double q = 1.0;
  for (const auto& tri : triangles_)
    q = std::min(q, triangle_quality(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]));
  return q;
}

namespace {

TriMesh square_mesh(double h) {
  const int n = std::max(1, static_cast<int>(std::lround(1.0 / h)));
  std::vector<Vec2> verts;
  verts.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<Triangle> tris;
  tris.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }
  }
  return TriMesh(std::move(verts), std::move(tris));
}

TriMesh disc_mesh(double h) {
  // Rings spaced by the height of an equilateral triangle of side h.
  const int rings = std::max(1, static_cast<int>(std::lround(1.0 / (h * std::sqrt(3.0) / 2.0))));
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Vec2> verts;
  std::vector<int> ring_start{0};
  std::vector<int> ring_size{1};
  verts.emplace_back(0.0, 0.0);
  for (int k = 1; k <= rings; ++k) {
    const double r = static_cast<double>(k) / rings;
    const int nk = std::max(5, static_cast<int>(std::lround(two_pi * r / h)));
    const double offset = (k % 2 == 0) ? 0.0 : 0.5;
    ring_start.push_back(static_cast<int>(verts.size()));
    ring_size.push_back(nk);
    for (int i = 0; i < nk; ++i) {
      const double phi = two_pi * (i + offset) / nk;
      if (k == rings) {
        verts.emplace_back(std::cos(phi), std::sin(phi));
      } else {
        verts.emplace_back(r * std::cos(phi), r * std::sin(phi));
      }
    }
  }

  std::vector<Triangle> tris;
  auto push_ccw = [&](int a, int b, int c) {
    if (signed_area(verts[a], verts[b], verts[c]) < 0.0) std::swap(b, c);
    tris.push_back({a, b, c});
  };
  for (int j = 0; j < ring_size[1]; ++j) {
    push_ccw(0, ring_start[1] + j, ring_start[1] + (j + 1) % ring_size[1]);
  }
  for (int k = 2; k <= rings; ++k) {
    const int na = ring_size[k - 1], nb = ring_size[k];
    const double off_a = ((k - 1) % 2 == 0) ? 0.0 : 0.5;
    const double off_b = (k % 2 == 0) ? 0.0 : 0.5;
    auto angle_a = [&](int i) { return two_pi * (i + off_a) / na; };
    auto angle_b = [&](int j) { return two_pi * (j + off_b) / nb; };
    auto va = [&](int i) { return ring_start[k - 1] + i % na; };
    auto vb = [&](int j) { return ring_start[k] + j % nb; };
    int i = 0, j = 0;
    while (i < na || j < nb) {
      const bool advance_inner =
          j >= nb || (i < na && angle_a(i + 1) <= angle_b(j + 1));
      if (advance_inner) {
        push_ccw(va(i), vb(j), va(i + 1));
        ++i;
      } else {
        push_ccw(va(i), vb(j), vb(j + 1));
        ++j;
      }
    }
  }
  return TriMesh(std::move(verts), std::move(tris));
}

}  // namespace

TriMesh generate_initial_mesh(const DomainSpec& spec) {
  if (!(spec.h > 0.0) || spec.h >= domain_diameter(spec.shape)) {
    throw InvalidArgument("mesh size h must lie in (0, domain diameter)");
  }
  return spec.shape == DomainShape::UnitSquare ? square_mesh(spec.h) : disc_mesh(spec.h);
}

EulerReport euler_characteristic_check(const TriMesh& mesh) {
  EulerReport r;
  r.num_vertices = mesh.num_vertices();
  r.num_edges = mesh.num_edges();
  r.num_triangles = mesh.num_triangles();
  r.euler_characteristic = r.num_vertices - r.num_edges + r.num_triangles;
  r.num_interior_edges = mesh.num_interior_edges();
  r.num_interior_vertices = mesh.num_interior_vertices();
  r.predicted_interior_edges = r.num_interior_vertices + r.num_triangles - 1;
  r.interior_edge_identity_holds = r.num_interior_edges == r.predicted_interior_edges;
  return r;
}

// ---------------------------------------------------------------------------
// PointLocator

PointLocator::PointLocator(const TriMesh& mesh, int buckets_per_axis) : mesh_(&mesh) {
  const auto& verts = mesh.vertices();
  lo_ = Vec2(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
  hi_ = -lo_;
  for (const auto& v : verts) {
    lo_ = lo_.cwiseMin(v);
    hi_ = hi_.cwiseMax(v);
  }
  if (verts.empty()) {
    lo_ = hi_ = Vec2::Zero();
  }
  const int n = buckets_per_axis > 0
                    ? buckets_per_axis
                    : std::max(1, static_cast<int>(std::sqrt(mesh.num_triangles() / 2.0)));
  nx_ = ny_ = n;
  dx_ = std::max((hi_.x() - lo_.x()) / nx_, 1e-300);
  dy_ = std::max((hi_.y() - lo_.y()) / ny_, 1e-300);

  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nx_) * ny_);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    Vec2 a = verts[tri[0]].cwiseMin(verts[tri[1]]).cwiseMin(verts[tri[2]]);
    Vec2 b = verts[tri[0]].cwiseMax(verts[tri[1]]).cwiseMax(verts[tri[2]]);
    int ix0, iy0, ix1, iy1;
    bucket_of(a.x(), a.y(), ix0, iy0);
    bucket_of(b.x(), b.y(), ix1, iy1);
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix) buckets[iy * nx_ + ix].push_back(t);
  }
  offsets_.assign(buckets.size() + 1, 0);
  for (std::size_t b = 0; b < buckets.size(); ++b)
    offsets_[b + 1] = offsets_[b] + static_cast<int>(buckets[b].size());
  items_.reserve(offsets_.back());
  for (const auto& b : buckets) items_.insert(items_.end(), b.begin(), b.end());
}

int PointLocator::bucket_of(double x, double y, int& ix, int& iy) const {
  ix = std::clamp(static_cast<int>(std::floor((x - lo_.x()) / dx_)), 0, nx_ - 1);
  iy = std::clamp(static_cast<int>(std::floor((y - lo_.y()) / dy_)), 0, ny_ - 1);
  return iy * nx_ + ix;
}

std::array<double, 3> PointLocator::barycentric(int t, const Vec2& p) const {
  const auto& tri = mesh_->triangle(t);
  const Vec2& a = mesh_->vertex(tri[0]);
  const Vec2& b = mesh_->vertex(tri[1]);
  const Vec2& c = mesh_->vertex(tri[2]);
  const double area = signed_area(a, b, c);
  return {signed_area(p, b, c) / area, signed_area(a, p, c) / area,
          signed_area(a, b, p) / area};
}

std::optional<PointLocator::Location> PointLocator::locate(const Vec2& p, double tol) const {
  if (mesh_->num_triangles() == 0) return std::nullopt;
  const double slack = tol * std::max(dx_, dy_);
  if (p.x() < lo_.x() - slack || p.x() > hi_.x() + slack || p.y() < lo_.y() - slack ||
      p.y() > hi_.y() + slack) {
    return std::nullopt;
  }
  int ix, iy;
  const int b = bucket_of(p.x(), p.y(), ix, iy);
  std::optional<Location> best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int k = offsets_[b]; k < offsets_[b + 1]; ++k) {
    const int t = items_[k];
    const auto bc = barycentric(t, p);
    const double m = std::min({bc[0], bc[1], bc[2]});
    if (m >= 0.0) return Location{t, bc};
    if (m >= -tol && m > best_min) {
      best_min = m;
      best = Location{t, bc};
    }
  }
  return best;
}

PointLocator::Location PointLocator::locate_or_nearest(const Vec2& p) const {
  if (auto loc = locate(p)) return *loc;
  if (mesh_->num_triangles() == 0) throw InvalidArgument("empty mesh");

  auto closest_on_triangle = [&](int t, double& dist) {
    const auto& tri = mesh_->triangle(t);
    double best = std::numeric_limits<double>::max();
    Location loc{t, {}};
    for (int k = 0; k < 3; ++k) {
      const int ia = (k + 1) % 3, ib = (k + 2) % 3;
      const Vec2& a = mesh_->vertex(tri[ia]);
      const Vec2& b = mesh_->vertex(tri[ib]);
      const Vec2 ab = b - a;
      const double s = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      const double d = (a + s * ab - p).norm();
      if (d < best) {
        best = d;
        loc.barycentric = {0.0, 0.0, 0.0};
        loc.barycentric[ia] = 1.0 - s;
        loc.barycentric[ib] = s;
      }
    }
    dist = best;
    return loc;
  };

  int ix, iy;
  bucket_of(p.x(), p.y(), ix, iy);
  Location best_loc;
  double best = std::numeric_limits<double>::max();
  const int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    for (int jy = iy - ring; jy <= iy + ring; ++jy) {
      for (int jx = ix - ring; jx <= ix + ring; ++jx) {
        if (jx < 0 || jy < 0 || jx >= nx_ || jy >= ny_) continue;
        if (std::max(std::abs(jx - ix), std::abs(jy - iy)) != ring) continue;
        const int b = jy * nx_ + jx;
        for (int k = offsets_[b]; k < offsets_[b + 1]; ++k) {
          double d;
          Location loc = closest_on_triangle(items_[k], d);
          if (d < best) {
            best = d;
            best_loc = loc;
          }
        }
      }
    }
    // Any unvisited bucket is at least `ring` cells away from p's bucket.
    if (best_loc.triangle >= 0 && best <= ring * std::min(dx_, dy_)) break;
  }
  return best_loc;
}

double evaluate_p1(const PointLocator& locator, std::span<const double> u, const Vec2& p) {
  const auto loc = locator.locate_or_nearest(p);
  const auto& tri = locator.mesh().triangle(loc.triangle);
  return loc.barycentric[0] * u[tri[0]] + loc.barycentric[1] * u[tri[1]] +
         loc.barycentric[2] * u[tri[2]];
}

}  // namespace bamesh::mesh
