#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "bamesh/error.hpp"
#include "bamesh/mesh.hpp"
#include "bamesh/mesh_io.hpp"
#include "helpers.hpp"

using namespace bamesh;
using mesh::DomainShape;
using mesh::EdgeClass;
using mesh::TriMesh;
using mesh::Vec2;

namespace {

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

void check_invariants(const TriMesh& m) {
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.area(t) > 0.0);
  const auto rep = mesh::euler_characteristic_check(m);
  CHECK(rep.euler_characteristic == 1);
  CHECK(m.num_boundary_vertices() == m.num_vertices() - m.num_interior_vertices());
  int boundary_edges = 0;
  for (int e = 0; e < m.num_edges(); ++e) {
    const auto& tr = m.edge_triangles(e);
    CHECK(tr[0] >= 0);
    if (tr[1] < 0) ++boundary_edges;
    CHECK(m.edge(e)[0] < m.edge(e)[1]);
  }
  CHECK(boundary_edges > 0);
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("coarse square grid counts") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.5});
  CHECK(m.num_vertices() == 9);
  CHECK(m.num_triangles() == 8);
  CHECK(m.num_edges() == 16);
  CHECK(m.num_vertices() - m.num_edges() + m.num_triangles() == 1);
  check_invariants(m);
}

TEST_CASE("square mesh at h = 0.05") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.05});
  CHECK(m.num_triangles() == doctest::Approx(800).epsilon(0.1));
  for (double l : m.edge_lengths()) {
    CHECK(l >= 0.025);
    CHECK(l <= 0.1);
  }
  CHECK(median(m.edge_lengths()) == doctest::Approx(0.05).epsilon(0.25));
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  check_invariants(m);
}

TEST_CASE("disc mesh at h = 0.05") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.05});
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.is_boundary_vertex(v)) CHECK(std::abs(m.vertex(v).norm() - 1.0) <= 1e-12);
  }
  CHECK(m.min_quality() > 0.3);
  CHECK(median(m.edge_lengths()) == doctest::Approx(0.05).epsilon(0.25));
  check_invariants(m);
}

TEST_CASE("generation is deterministic") {
  const auto a = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.1});
  const auto b = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.1});
  CHECK(a.vertices() == b.vertices());
  CHECK(a.triangles() == b.triangles());
  CHECK(a.edges() == b.edges());
}

TEST_CASE("invalid mesh sizes are rejected") {
  CHECK_THROWS_AS(mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(mesh::generate_initial_mesh({DomainShape::UnitSquare, -1.0}), InvalidArgument);
  CHECK_THROWS_AS(mesh::generate_initial_mesh({DomainShape::UnitDisc, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(mesh::generate_initial_mesh({DomainShape::UnitSquare, 1.5}), InvalidArgument);
}

TEST_CASE("single triangle topology") {
  const auto m = testing::single_triangle();
  CHECK(m.num_edges() == 3);
  CHECK(m.num_interior_edges() == 0);
  for (int e = 0; e < 3; ++e) CHECK(m.edge_class(e) == EdgeClass::BoundaryBoundary);
  const auto rep = mesh::euler_characteristic_check(m);
  CHECK(rep.euler_characteristic == 1);
}

TEST_CASE("square with one diagonal has no interior edges") {
  const auto m = testing::square_with_diagonal();
  CHECK(m.num_edges() == 5);
  CHECK(m.num_interior_edges() == 0);
  const auto rep = mesh::euler_characteristic_check(m);
  CHECK(rep.predicted_interior_edges == 1);
  CHECK_FALSE(rep.interior_edge_identity_holds);
}

TEST_CASE("square with centre vertex") {
  const auto m = testing::square_with_center();
  CHECK(m.num_edges() == 8);
  CHECK(m.num_interior_edges() == 4);
  CHECK(m.num_interior_vertices() == 1);
  const auto rep = mesh::euler_characteristic_check(m);
  CHECK(rep.num_interior_edges == 4);
  CHECK(rep.predicted_interior_edges == 4);
  CHECK(rep.interior_edge_identity_holds);
  for (int e : m.interior_edges()) {
    const auto& ed = m.edge(e);
    CHECK((ed[0] == 4 || ed[1] == 4));
  }
}

TEST_CASE("edge topology is reproducible") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.1});
  const auto topo = mesh::build_edge_topology(m.vertices(), m.triangles());
  CHECK(topo.edges == m.edges());
}

TEST_CASE("non-conforming input is rejected") {
  std::vector<Vec2> v{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 1), Vec2(-1, -1)};
  // Edge {0,1} shared by three triangles.
  std::vector<mesh::Triangle> t{{0, 1, 2}, {0, 1, 3}, {1, 0, 4}};
  CHECK_THROWS_AS(mesh::build_edge_topology(v, t), TopologyError);
}

TEST_CASE("clockwise triangles are rejected") {
  CHECK_THROWS(TriMesh({Vec2(0, 0), Vec2(0, 1), Vec2(1, 0)}, {{0, 1, 2}}));
}

TEST_CASE("text round trip of a single triangle") {
  const auto m = testing::single_triangle();
  std::stringstream ss;
  mesh::write_mesh(m, ss);
  const auto r = mesh::read_mesh(ss);
  CHECK(r.num_vertices() == 3);
  CHECK(r.num_triangles() == 1);
  CHECK(r.num_edges() == 3);
  for (int v = 0; v < 3; ++v) CHECK(r.is_boundary_vertex(v) == m.is_boundary_vertex(v));
  for (int e = 0; e < 3; ++e) CHECK(r.edge_class(e) == m.edge_class(e));
}

TEST_CASE("round trip of the 800 triangle square mesh is exact") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.05});
  std::stringstream ss;
  mesh::write_mesh(m, ss);
  const auto r = mesh::read_mesh(ss);
  REQUIRE(r.num_vertices() == m.num_vertices());
  CHECK(r.triangles() == m.triangles());
  double err = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v) err = std::max(err, (r.vertex(v) - m.vertex(v)).norm());
  CHECK(err <= 1e-15);
}

TEST_CASE("missing vertex reference names the triangle") {
  std::stringstream ss("trimesh 2d v1\nvertices 3\n0 0 1\n1 0 1\n0 1 1\ntriangles 1\n0 1 7\n");
  try {
    (void)mesh::read_mesh(ss);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
    CHECK(std::string(e.what()).find("triangle 0") != std::string::npos);
  }
}

TEST_CASE("malformed header") {
  std::stringstream ss("mesh\n");
  CHECK_THROWS_AS(mesh::read_mesh(ss), ParseError);
}

TEST_CASE("point location and P1 evaluation") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.1});
  mesh::PointLocator loc(m);
  std::vector<double> u(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) u[v] = 2.0 * m.vertex(v).x() - m.vertex(v).y() + 0.5;
  for (Vec2 p : {Vec2(0.13, 0.77), Vec2(0.5, 0.5), Vec2(0.999, 0.001), Vec2(0.0, 0.3)}) {
    CHECK(mesh::evaluate_p1(loc, u, p) == doctest::Approx(2.0 * p.x() - p.y() + 0.5).epsilon(1e-12));
  }
  CHECK_FALSE(loc.locate(Vec2(1.5, 0.5)).has_value());
}

}  // TEST_SUITE
