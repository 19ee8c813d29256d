#include <doctest.h>

#include "bamesh/clement.hpp"
#include "bamesh/error.hpp"
#include "bamesh/whitney.hpp"
#include "helpers.hpp"

using namespace bamesh;
using linalg::Vector;
using mesh::DomainShape;
using mesh::Vec2;

namespace {

// Symmetric 7-point Gauss rule on triangles, exact to degree 5.
struct QuadPoint {
  double l0, l1, l2, w;
};
const std::array<QuadPoint, 7>& gauss7() {
  static const std::array<QuadPoint, 7> rule = [] {
    const double a1 = 0.059715871789770, b1 = 0.470142064105115;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456;
    const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
    return std::array<QuadPoint, 7>{{{1.0 / 3, 1.0 / 3, 1.0 / 3, w0},
                                     {a1, b1, b1, w1},
                                     {b1, a1, b1, w1},
                                     {b1, b1, a1, w1},
                                     {a2, b2, b2, w2},
                                     {b2, a2, b2, w2},
                                     {b2, b2, a2, w2}}};
  }();
  return rule;
}

Vector linear_full(const mesh::TriMesh& m, double gx, double gy) {
  Vector u(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) u(v) = gx * m.vertex(v).x() + gy * m.vertex(v).y() + 0.3;
  return whitney::assemble_incidence(m).full * u;
}

}  // namespace

TEST_SUITE("clement") {

TEST_CASE("zero field") {
  const auto m = testing::square_with_center();
  const auto ps = clement::patch_project(m, Vector::Zero(m.num_edges()), 4, 0);
  CHECK(ps.alpha.norm() == 0.0);
  for (const auto& g : clement::clement_gradient(m, Vector::Zero(m.num_interior_edges()))) CHECK(g.norm() == 0.0);
}

TEST_CASE("constant gradients are reproduced exactly at every vertex") {
  for (auto shape : {DomainShape::UnitSquare, DomainShape::UnitDisc}) {
    const auto m = mesh::generate_initial_mesh({shape, 0.15});
    const Vector z_full = linear_full(m, 1.0, 0.0);
    const auto g = clement::clement_gradient_full(m, z_full);
    double err = 0.0;
    for (const auto& v : g) err = std::max(err, (v - Vec2(1, 0)).norm());
    CHECK(err <= 1e-12);
    const auto ps = clement::patch_project(m, z_full, m.interior_vertices().front(), 0);
    CHECK((ps.alpha.array() - 1.0).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("patch matrices match a seven point quadrature") {
  const auto m = testing::square_with_center();
  const auto ps = clement::patch_project(m, Vector::Zero(m.num_edges()), 4, 1);
  const auto n = static_cast<Eigen::Index>(ps.nodes.size());
  linalg::DenseMatrix g = linalg::DenseMatrix::Zero(n, n);
  linalg::DenseMatrix b = linalg::DenseMatrix::Zero(n, static_cast<Eigen::Index>(ps.edges.size()));
  for (int t : m.vertex_triangles(4)) {
    const auto& tri = m.triangle(t);
    for (const auto& q : gauss7()) {
      const std::array<double, 3> lam{q.l0, q.l1, q.l2};
      const Vec2 x = q.l0 * m.vertex(tri[0]) + q.l1 * m.vertex(tri[1]) + q.l2 * m.vertex(tri[2]);
      const double w = q.w * m.area(t);
      for (int a = 0; a < 3; ++a) {
        const auto ia = std::find(ps.nodes.begin(), ps.nodes.end(), tri[a]) - ps.nodes.begin();
        for (int c = 0; c < 3; ++c) {
          const auto ic = std::find(ps.nodes.begin(), ps.nodes.end(), tri[c]) - ps.nodes.begin();
          g(ia, ic) += w * lam[a] * lam[c];
        }
        for (std::size_t j = 0; j < ps.edges.size(); ++j) {
          const Vector ej = Vector::Unit(m.num_edges(), ps.edges[j]);
          b(ia, static_cast<Eigen::Index>(j)) += w * lam[a] * whitney::whitney_evaluate_full(m, ej, t, x)(1);
        }
      }
    }
  }
  CHECK((g - ps.g).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((b - ps.b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("recovery is linear in z") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.2});
  const Vector z1 = testing::random_vector(m.num_interior_edges(), 1);
  const Vector z2 = testing::random_vector(m.num_interior_edges(), 2);
  const auto g1 = clement::clement_gradient(m, z1);
  const auto g2 = clement::clement_gradient(m, z2);
  const auto g12 = clement::clement_gradient(m, 2.0 * z1 - z2);
  for (std::size_t v = 0; v < g1.size(); ++v) {
    CHECK((g12[v] - (2.0 * g1[v] - g2[v])).norm() <= 1e-12 * (1.0 + g12[v].norm()));
  }
}

TEST_CASE("recovered value equals the central patch coefficient") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.25});
  const Vector z = testing::random_vector(m.num_interior_edges(), 4);
  const Vector z_full = whitney::expand_edges(m, z);
  const auto g = clement::clement_gradient(m, z);
  for (int v = 0; v < m.num_vertices(); ++v) {
    for (int c = 0; c < 2; ++c) {
      const auto ps = clement::patch_project(m, z_full, v, c);
      CHECK(ps.nodes.front() == v);
      CHECK(std::abs(ps.alpha(0) - g[v](c)) <= 1e-12 * (1.0 + std::abs(g[v](c))));
    }
  }
}

TEST_CASE("recovered field is bounded by the Whitney field") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.1});
  const Vector z = testing::random_vector(m.num_interior_edges(), 8);
  const Vector z_full = whitney::expand_edges(m, z);
  double wmax = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t)
    for (const auto& w : whitney::whitney_vertex_values(m, z_full, t)) wmax = std::max(wmax, w.norm());
  double gmax = 0.0;
  for (const auto& g : clement::clement_gradient(m, z)) gmax = std::max(gmax, g.norm());
  CHECK(gmax <= 10.0 * wmax);
}

TEST_CASE("argument checks") {
  const auto m = testing::square_with_center();
  CHECK_THROWS_AS(clement::patch_project(m, Vector::Zero(3), 4, 0), InvalidArgument);
  CHECK_THROWS_AS(clement::patch_project(m, Vector::Zero(m.num_edges()), 9, 0), InvalidArgument);
  CHECK_THROWS_AS(clement::patch_project(m, Vector::Zero(m.num_edges()), 4, 2), InvalidArgument);
}

}  // TEST_SUITE
