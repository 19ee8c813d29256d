#pragma once

#include <variant>
#include <vector>

#include "bamesh/linalg.hpp"
#include "bamesh/mesh.hpp"

namespace bamesh::phantom {

using mesh::Vec2;

struct Disc {
  Vec2 center{0.0, 0.0};
  double radius = 0.1;
};

/// Curve c + s R(phi) (cos t + 0.65 cos 2t - 0.65, 1.5 sin t).
struct Kite {
  Vec2 center{0.0, 0.0};
  double scale = 0.1;
  double rotation = 0.0;
};

/// Simple polygon, counter-clockwise or clockwise.
struct Polygon {
  std::vector<Vec2> vertices;
};

using Shape = std::variant<Disc, Kite, Polygon>;

struct Inclusion {
  Shape shape;
  double value = 1.0;
};

/// Piecewise-constant target. Later inclusions overwrite earlier ones where
/// they overlap.
struct Phantom {
  std::vector<Inclusion> inclusions;
  double background = 0.0;
};

Polygon rectangle(Vec2 lo, Vec2 hi);
std::vector<Vec2> kite_curve(const Kite& kite, int samples);

bool contains(const Shape& shape, const Vec2& p);
double shape_area(const Shape& shape);
double evaluate(const Phantom& phantom, const Vec2& p);

/// Throws InvalidArgument if some inclusion leaves the domain.
void validate(const Phantom& phantom, mesh::DomainShape domain);

/// Nodal values by point membership of each vertex.
linalg::Vector make_phantom(const Phantom& phantom, const mesh::TriMesh& mesh);

/// A disc of value 1.2 and a kite of value 1.0 inside the unit disc.
Phantom default_tomography_phantom();
/// Two axis-aligned rectangles of values +20 and -20 inside the unit square.
Phantom default_darcy_phantom();

}  // namespace bamesh::phantom
