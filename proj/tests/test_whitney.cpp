#include <doctest.h>

#include <Eigen/Dense>

#include "bamesh/error.hpp"
#include "bamesh/whitney.hpp"
#include "helpers.hpp"

using namespace bamesh;
using linalg::Vector;
using mesh::DomainShape;
using mesh::Vec2;

TEST_SUITE("whitney") {

TEST_CASE("incidence rows hold +1 at the tail and -1 at the head") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.2});
  const auto inc = whitney::assemble_incidence(m);
  REQUIRE(inc.full.rows() == m.num_edges());
  REQUIRE(inc.full.cols() == m.num_vertices());
  for (int e = 0; e < m.num_edges(); ++e) {
    CHECK(inc.full.row(e).nonZeros() == 2);
    CHECK(inc.full.coeff(e, m.edge(e)[0]) == 1.0);
    CHECK(inc.full.coeff(e, m.edge(e)[1]) == -1.0);
  }
  const Vector ones = Vector::Ones(m.num_vertices());
  CHECK((inc.full * ones).norm() == 0.0);
  CHECK(inc.interior.rows() == m.num_interior_edges());
  CHECK(inc.interior.cols() == m.num_interior_vertices());
}

TEST_CASE("centre vertex star") {
  const auto m = testing::square_with_center();
  const auto inc = whitney::assemble_incidence(m);
  REQUIRE(inc.interior.rows() == 4);
  REQUIRE(inc.interior.cols() == 1);
  const Vector z = whitney::gradient_coefficients(inc.interior, Vector::Ones(1));
  for (int l = 0; l < 4; ++l) CHECK(std::abs(z(l)) == 1.0);
  const linalg::ThinQR qr{linalg::SparseColMatrix(inc.interior)};
  CHECK(qr.min_abs_r_diagonal() > 1e-10);
}

TEST_CASE("gradient coefficients") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.25});
  const auto inc = whitney::assemble_incidence(m);
  CHECK(whitney::gradient_coefficients(inc.interior, Vector::Zero(inc.interior.cols())).norm() == 0.0);
  CHECK_THROWS_AS(whitney::gradient_coefficients(inc.interior, Vector::Zero(3)), InvalidArgument);

  Vector u_all = Vector::Zero(m.num_vertices());
  const int e = m.interior_edges().front();
  u_all(m.edge(e)[0]) = 2.0;
  u_all(m.edge(e)[1]) = 0.5;
  const Vector z = inc.full * u_all;
  CHECK(z(e) == doctest::Approx(1.5));
}

TEST_CASE("nodal recovery round trip on the 800 triangle mesh") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.05});
  const auto inc = whitney::assemble_incidence(m);
  const linalg::ThinQR qr{linalg::SparseColMatrix(inc.interior)};
  CHECK(qr.min_abs_r_diagonal() > 1e-10);
  const Vector u = testing::random_vector(inc.interior.cols(), 3);
  const Vector z = whitney::gradient_coefficients(inc.interior, u);
  const auto rec = whitney::nodal_from_coefficients(qr, z);
  CHECK((rec.u - u).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(rec.residual <= 1e-12 * z.norm());
  CHECK((inc.interior * rec.u - z).norm() <= 1e-10 * z.norm());

  const auto zero = whitney::nodal_from_coefficients(qr, Vector::Zero(z.size()));
  CHECK(zero.u.norm() == 0.0);
  CHECK(zero.residual == 0.0);
}

TEST_CASE("incompatible coefficients give the least-squares nodal field") {
  // Ten vertices: the unit square with six interior points.
  std::vector<Vec2> v{Vec2(0, 0),     Vec2(1, 0),     Vec2(1, 1),   Vec2(0, 1),
                      Vec2(0.3, 0.3), Vec2(0.7, 0.3), Vec2(0.5, 0.5), Vec2(0.3, 0.7),
                      Vec2(0.7, 0.7), Vec2(0.5, 0.15)};
  std::vector<mesh::Triangle> t{{0, 9, 4}, {9, 1, 5}, {0, 4, 3}, {4, 9, 5}, {4, 5, 6},
                                {1, 2, 5}, {5, 2, 8}, {5, 8, 6}, {6, 8, 7}, {8, 2, 7},
                                {7, 2, 3}, {4, 6, 7}, {4, 7, 3}, {0, 1, 9}};
  const mesh::TriMesh m(v, t);
  const auto inc = whitney::assemble_incidence(m);
  const linalg::ThinQR qr{linalg::SparseColMatrix(inc.interior)};

  // Unit circulation around one triangle whose edges are all interior-touching.
  Vector z = Vector::Zero(inc.interior.rows());
  const auto& te = m.triangle_edges(4);
  for (int k = 0; k < 3; ++k) z(m.interior_edge_index(te[k])) = 1.0;
  const auto rec = whitney::nodal_from_coefficients(qr, z);
  CHECK(rec.residual > 0.1);

  const Eigen::MatrixXd l = Eigen::MatrixXd(inc.interior);
  const Vector oracle = (l.transpose() * l).ldlt().solve(l.transpose() * z);
  CHECK((rec.u - oracle).norm() <= 1e-12 * std::max(1.0, oracle.norm()));
}

TEST_CASE("linear function has constant Whitney field") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.1});
  Vector u_all(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) u_all(v) = m.vertex(v).x();
  const auto inc = whitney::assemble_incidence(m);
  const Vector z_full = inc.full * u_all;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const Vec2 g = whitney::whitney_evaluate_full(m, z_full, t, m.centroid(t));
    CHECK((g - Vec2(1, 0)).norm() <= 1e-10);
  }
  CHECK(whitney::whitney_evaluate(m, Vector::Zero(m.num_interior_edges()), 0, m.centroid(0)).norm() == 0.0);
}

TEST_CASE("discrete gradient matches the P1 gradient on every triangle") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.15});
  const auto inc = whitney::assemble_incidence(m);
  const Vector u = testing::random_vector(m.num_interior_vertices(), 11);
  const Vector u_all = whitney::expand_vertices(m, u);
  const Vector z = inc.interior * u;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto grads = whitney::barycentric_gradients(m, t);
    Vec2 p1 = Vec2::Zero();
    for (int k = 0; k < 3; ++k) p1 += u_all(m.triangle(t)[k]) * grads[k];
    const auto& tri = m.triangle(t);
    const Vec2 a = m.vertex(tri[0]), b = m.vertex(tri[1]), c = m.vertex(tri[2]);
    for (const Vec2& p : {m.centroid(t), Vec2(0.6 * a + 0.3 * b + 0.1 * c)}) {
      CHECK((whitney::whitney_evaluate(m, z, t, p) - p1).norm() <= 1e-10 * std::max(1.0, p1.norm()));
    }
  }
}

TEST_CASE("circulation around interior triangles vanishes") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.2});
  const auto inc = whitney::assemble_incidence(m);
  const Vector z_full = inc.full * whitney::expand_vertices(m, testing::random_vector(m.num_interior_vertices(), 5));
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangle(t);
    double circ = 0.0;
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      const int e = m.triangle_edges(t)[(k + 2) % 3];
      circ += (m.edge(e)[0] == a && m.edge(e)[1] == b) ? z_full(e) : -z_full(e);
    }
    CHECK(std::abs(circ) <= 1e-12);
  }
}

TEST_CASE("tangential continuity across a shared edge") {
  const auto m = testing::square_with_center();
  const auto inc = whitney::assemble_incidence(m);
  const Vector z = testing::random_vector(m.num_interior_edges(), 9);
  for (int e : m.interior_edges()) {
    const auto tr = m.edge_triangles(e);
    if (tr[1] < 0) continue;
    const Vec2 p = m.vertex(m.edge(e)[0]), q = m.vertex(m.edge(e)[1]);
    const Vec2 tangent = (q - p).normalized();
    for (double s : {0.25, 0.5, 0.8}) {
      const Vec2 x = p + s * (q - p);
      const double a = whitney::whitney_evaluate(m, z, tr[0], x).dot(tangent);
      const double b = whitney::whitney_evaluate(m, z, tr[1], x).dot(tangent);
      CHECK(std::abs(a - b) <= 1e-12);
    }
  }
}

TEST_CASE("evaluation outside the triangle is rejected") {
  const auto m = testing::single_triangle();
  CHECK_THROWS_AS(whitney::whitney_evaluate(m, Vector::Zero(0), 0, Vec2(2, 2)), InvalidArgument);
}

}  // TEST_SUITE
