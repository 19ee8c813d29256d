#include "bamesh/phantom.hpp"

#include <cmath>
#include <numbers>

#include "bamesh/error.hpp"

namespace bamesh::phantom {

namespace {

constexpr int kKiteSamples = 2048;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

bool in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    s += poly[j].x() * poly[i].y() - poly[i].x() * poly[j].y();
  }
  return 0.5 * std::abs(s);
}

std::vector<Vec2> outline(const Shape& shape) {
  return std::visit(Overloaded{
                        [](const Disc& d) {
                          std::vector<Vec2> pts;
                          for (int k = 0; k < 256; ++k) {
                            const double t = 2.0 * std::numbers::pi * k / 256;
                            pts.push_back(d.center + d.radius * Vec2(std::cos(t), std::sin(t)));
                          }
                          return pts;
                        },
                        [](const Kite& k) { return kite_curve(k, 256); },
                        [](const Polygon& p) { return p.vertices; },
                    },
                    shape);
}

}  // namespace

Polygon rectangle(Vec2 lo, Vec2 hi) {
  return Polygon{{lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())}};
}

std::vector<Vec2> kite_curve(const Kite& kite, int samples) {
  const double c = std::cos(kite.rotation), s = std::sin(kite.rotation);
  std::vector<Vec2> pts;
  pts.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / samples;
    const double x = std::cos(t) + 0.65 * std::cos(2.0 * t) - 0.65;
    const double y = 1.5 * std::sin(t);
    pts.push_back(kite.center + kite.scale * Vec2(c * x - s * y, s * x + c * y));
  }
  return pts;
}

bool contains(const Shape& shape, const Vec2& p) {
  return std::visit(Overloaded{
                        [&](const Disc& d) { return (p - d.center).norm() <= d.radius; },
                        [&](const Kite& k) {
                          static thread_local std::vector<Vec2> cache;
                          static thread_local Kite cached{Vec2(NAN, NAN), 0.0, 0.0};
                          if (!(cached.center == k.center) || cached.scale != k.scale ||
                              cached.rotation != k.rotation) {
                            cache = kite_curve(k, kKiteSamples);
                            cached = k;
                          }
                          return in_polygon(cache, p);
                        },
                        [&](const Polygon& poly) { return in_polygon(poly.vertices, p); },
                    },
                    shape);
}

double shape_area(const Shape& shape) {
  return std::visit(Overloaded{
                        [](const Disc& d) { return std::numbers::pi * d.radius * d.radius; },
                        [](const Kite& k) { return 1.5 * std::numbers::pi * k.scale * k.scale; },
                        [](const Polygon& p) { return polygon_area(p.vertices); },
                    },
                    shape);
}

double evaluate(const Phantom& phantom, const Vec2& p) {
  double v = phantom.background;
  for (const auto& inc : phantom.inclusions)
    if (contains(inc.shape, p)) v = inc.value;
  return v;
}

void validate(const Phantom& phantom, mesh::DomainShape domain) {
  for (std::size_t i = 0; i < phantom.inclusions.size(); ++i) {
    if (const auto* p = std::get_if<Polygon>(&phantom.inclusions[i].shape); p && p->vertices.size() < 3) {
      throw InvalidArgument("phantom: polygon inclusion needs at least 3 vertices");
    }
    for (const auto& q : outline(phantom.inclusions[i].shape)) {
      const bool inside = domain == mesh::DomainShape::UnitDisc
                              ? q.norm() <= 1.0
                              : q.x() >= 0.0 && q.x() <= 1.0 && q.y() >= 0.0 && q.y() <= 1.0;
      if (!inside) {
        throw InvalidArgument("phantom: inclusion " + std::to_string(i) + " leaves the domain");
      }
    }
  }
}

linalg::Vector make_phantom(const Phantom& phantom, const mesh::TriMesh& mesh) {
  linalg::Vector u(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) u(v) = evaluate(phantom, mesh.vertex(v));
  return u;
}

Phantom default_tomography_phantom() {
  Phantom p;
  p.inclusions.push_back({Disc{Vec2(-0.35, 0.30), 0.28}, 1.2});
  p.inclusions.push_back({Kite{Vec2(0.35, -0.25), 0.22, 0.0}, 1.0});
  return p;
}

Phantom default_darcy_phantom() {
  Phantom p;
  p.inclusions.push_back({rectangle(Vec2(0.2, 0.55), Vec2(0.45, 0.8)), 20.0});
  p.inclusions.push_back({rectangle(Vec2(0.55, 0.2), Vec2(0.8, 0.45)), -20.0});
  return p;
}

}  // namespace bamesh::phantom
