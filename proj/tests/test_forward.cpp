#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "bamesh/config.hpp"
#include "bamesh/darcy.hpp"
#include "bamesh/error.hpp"
#include "bamesh/forward.hpp"
#include "bamesh/phantom.hpp"
#include "bamesh/pipeline.hpp"
#include "bamesh/tomography.hpp"
#include "helpers.hpp"

using namespace bamesh;
using linalg::DenseMatrix;
using linalg::Vector;
using mesh::DomainShape;
using mesh::TriMesh;
using mesh::Vec2;

namespace {

/// Length of the intersection of the ray's line with a convex mesh, from the
/// boundary edges alone.
double polygon_chord(const TriMesh& m, const tomo::Ray& ray) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int e = 0; e < m.num_edges(); ++e) {
    if (!m.is_boundary_edge(e)) continue;
    const Vec2 p = m.vertex(m.edge(e)[0]), q = m.vertex(m.edge(e)[1]);
    const Vec2 d = q - p;
    const double den = ray.direction.x() * (-d.y()) - ray.direction.y() * (-d.x());
    if (std::abs(den) < 1e-14) continue;
    const Vec2 rhs = p - ray.origin;
    const double s = (rhs.x() * (-d.y()) - rhs.y() * (-d.x())) / den;
    const double t = (ray.direction.x() * rhs.y() - ray.direction.y() * rhs.x()) / den;
    if (t < -1e-12 || t > 1 + 1e-12) continue;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi > lo ? hi - lo : 0.0;
}

double total_length(const std::vector<tomo::RaySegment>& segs) {
  double l = 0.0;
  for (const auto& s : segs) l += s.s_out - s.s_in;
  return l;
}

tomo::Ray make_ray(Vec2 origin, Vec2 through) {
  return {origin, (through - origin).normalized()};
}

double quadratic_solution(double x) { return 0.5 * x * (1.0 - x); }

double cosine_solution(double x) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return std::cos(std::numbers::pi * x) / pi2 + 2.0 * x / pi2 - 1.0 / pi2;
}

/// L2 error of the P2 state for the source cos(pi x1), by the 7-point rule
/// on every element.
double cosine_error(double h, bool interpolated_source) {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, h});
  const auto op = darcy::assemble_darcy_operators(m, 4);
  const auto source = [](const Vec2& p) { return std::cos(std::numbers::pi * p.x()); };
  Vector f;
  if (interpolated_source) {
    Vector u(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) u(v) = source(m.vertex(v));
    f = darcy::solve_state(op, u);
  } else {
    f = darcy::solve_state(op, source);
  }
  const double a1 = 0.059715871789770, b1 = 0.470142064105115;
  const double a2 = 0.797426985353087, b2 = 0.101286507323456;
  const std::array<std::array<double, 4>, 7> rule{{{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
                                                   {a1, b1, b1, 0.132394152788506},
                                                   {b1, a1, b1, 0.132394152788506},
                                                   {b1, b1, a1, 0.132394152788506},
                                                   {a2, b2, b2, 0.125939180544827},
                                                   {b2, a2, b2, 0.125939180544827},
                                                   {b2, b2, a2, 0.125939180544827}}};
  double err2 = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& nodes = op.space.element_nodes[t];
    const auto& tri = m.triangle(t);
    for (const auto& q : rule) {
      const auto phi = darcy::p2_shape({q[0], q[1], q[2]});
      double fh = 0.0;
      for (int i = 0; i < 6; ++i) fh += phi[i] * f(nodes[i]);
      const Vec2 x = q[0] * m.vertex(tri[0]) + q[1] * m.vertex(tri[1]) + q[2] * m.vertex(tri[2]);
      const double d = fh - cosine_solution(x.x());
      err2 += q[3] * m.area(t) * d * d;
    }
  }
  return std::sqrt(err2);
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("bamesh_test_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("forward") {

TEST_CASE("horizontal ray through a single triangle") {
  const auto m = testing::single_triangle();
  const auto segs = tomo::trace_ray(m, {Vec2(-1, 0.25), Vec2(1, 0)});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].triangle == 0);
  CHECK(segs[0].s_out - segs[0].s_in == doctest::Approx(0.75));
  CHECK(segs[0].entry.x() == doctest::Approx(0.0));
  CHECK(segs[0].exit.x() == doctest::Approx(0.75));
}

TEST_CASE("ray missing the mesh") {
  const auto m = testing::single_triangle();
  CHECK(tomo::trace_ray(m, {Vec2(-1, 2), Vec2(1, 0)}).empty());
}

TEST_CASE("diameter ray through the disc mesh") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.2});
  const tomo::Ray ray = make_ray(Vec2(-3, 0.013), Vec2(3, -0.011));
  const auto segs = tomo::trace_ray(m, ray);
  CHECK(std::abs(total_length(segs) - polygon_chord(m, ray)) <= 1e-10);
  for (std::size_t k = 1; k < segs.size(); ++k) {
    CHECK(std::abs(segs[k].s_in - segs[k - 1].s_out) <= 1e-10);
    CHECK((segs[k].entry - segs[k - 1].exit).norm() <= 1e-10);
  }
}

TEST_CASE("rays through vertices and along edges keep the chord") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.25});
  const tomo::RayTracer tracer(m);
  for (int v = 0; v < m.num_vertices(); v += 3) {
    const Vec2 origin(-3.0, -1.7);
    const tomo::Ray ray = make_ray(origin, m.vertex(v));
    const double exact = polygon_chord(m, ray);
    CHECK(std::abs(total_length(tracer.trace(ray)) - exact) <= 1e-10);
    // Two nearby rays bracket the grazing case.
    const Vec2 n(-ray.direction.y(), ray.direction.x());
    const double lm = total_length(tracer.trace({ray.origin - 1e-7 * n, ray.direction}));
    const double lp = total_length(tracer.trace({ray.origin + 1e-7 * n, ray.direction}));
    CHECK(exact >= std::min(lm, lp) - 1e-9);
    CHECK(exact <= std::max(lm, lp) + 1e-9);
  }
  for (int e = 0; e < m.num_edges(); e += 5) {
    const Vec2 p = m.vertex(m.edge(e)[0]), q = m.vertex(m.edge(e)[1]);
    const tomo::Ray ray = make_ray(p - 5.0 * (q - p), q);
    CHECK(std::abs(total_length(tracer.trace(ray)) - polygon_chord(m, ray)) <= 1e-10);
  }
}

TEST_CASE("row sums equal chord lengths") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.1});
  const tomo::FanBeamGeometry g{6, 40, 3.0};
  const auto op = tomo::tomo_system_matrix(m, g);
  const auto rays = tomo::fan_beam_rays(g);
  REQUIRE(op.a_all.rows() == g.num_measurements());
  CHECK(op.a.cols() == m.num_interior_vertices());
  const Vector sums = op.a_all * Vector::Ones(m.num_vertices());
  double err = 0.0;
  for (std::size_t k = 0; k < rays.size(); ++k)
    err = std::max(err, std::abs(sums(static_cast<Eigen::Index>(k)) - polygon_chord(m, rays[k])));
  CHECK(err <= 1e-10);
}

TEST_CASE("hat function integral along an edge") {
  const auto m = testing::single_triangle();
  const tomo::Ray ray = make_ray(Vec2(-1, 0), Vec2(0, 0));
  const auto segs = tomo::trace_ray(m, ray);
  REQUIRE(segs.size() == 1);
  const double len = segs[0].s_out - segs[0].s_in;
  CHECK(len == doctest::Approx(1.0));
  // psi_a is linear from 1 to 0 along ab, so its integral is |ab|/2.
  CHECK(0.5 * len == doctest::Approx(0.5));
}

TEST_CASE("matrix entries agree with dense sampling") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.15});
  const tomo::FanBeamGeometry g{3, 12, 3.0};
  const auto op = tomo::tomo_system_matrix(m, g);
  const auto rays = tomo::fan_beam_rays(g);
  const Vector u = testing::random_vector(m.num_vertices(), 17);
  const Vector pred = op.a_all * u;
  const mesh::PointLocator loc(m);
  const std::span<const double> uspan(u.data(), static_cast<std::size_t>(u.size()));
  for (std::size_t k = 0; k < rays.size(); ++k) {
    const auto segs = tomo::trace_ray(m, rays[k]);
    if (segs.empty()) continue;
    const double s0 = segs.front().s_in, s1 = segs.back().s_out;
    const int n = 10000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = s0 + (i + 0.5) * (s1 - s0) / n;
      sum += mesh::evaluate_p1(loc, uspan, rays[k].origin + s * rays[k].direction);
    }
    sum *= (s1 - s0) / n;
    const double ref = pred(static_cast<Eigen::Index>(k));
    CHECK(std::abs(sum - ref) <= 1e-4 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("stiffness is symmetric positive definite") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.25});
  const auto op = darcy::assemble_darcy_operators(m);
  const DenseMatrix g(op.stiffness);
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(g);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  for (int j : op.free_nodes) {
    const double x = op.space.coords[j].x();
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("mass row sums equal the basis integrals") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.2});
  const auto op = darcy::assemble_darcy_operators(m);
  // Integral of a P2 basis function over a triangle: 0 for vertex nodes,
  // |K|/3 for midpoint nodes.
  Vector integral = Vector::Zero(op.space.num_nodes);
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int k = 3; k < 6; ++k) integral(op.space.element_nodes[t][k]) += m.area(t) / 3.0;
  const Vector sums = op.mass * Vector::Ones(m.num_vertices());
  double err = 0.0;
  for (std::size_t k = 0; k < op.free_nodes.size(); ++k)
    err = std::max(err, std::abs(sums(static_cast<Eigen::Index>(k)) - integral(op.free_nodes[k])));
  CHECK(err <= 1e-12);
}

TEST_CASE("constant source reproduces the quadratic solution") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.125});
  const auto op = darcy::assemble_darcy_operators(m);
  const Vector f = darcy::solve_state(op, Vector::Ones(m.num_vertices()));
  double err = 0.0;
  for (int k = 0; k < op.space.num_nodes; ++k)
    err = std::max(err, std::abs(f(k) - quadratic_solution(op.space.coords[k].x())));
  CHECK(err <= 1e-10);

  const DenseMatrix a = darcy::darcy_forward_matrix(op, true);
  const Vector obs = a * Vector::Ones(m.num_vertices());
  const auto grid = darcy::observation_grid(20);
  REQUIRE(obs.size() == 400);
  for (std::size_t j = 0; j < grid.size(); ++j)
    CHECK(obs(static_cast<Eigen::Index>(j)) == doctest::Approx(quadratic_solution(grid[j].x())).epsilon(1e-10));
  // Midpoint of the interval via the analytic profile.
  CHECK(quadratic_solution(0.5) == 0.125);
}

TEST_CASE("observation grid") {
  const auto g = darcy::observation_grid(20);
  REQUIRE(g.size() == 400);
  CHECK(g[0].x() == doctest::Approx(0.025));
  CHECK(g[0].y() == doctest::Approx(0.025));
  CHECK(g[1].x() == doctest::Approx(0.075));
  CHECK(g[399].x() == doctest::Approx(0.975));
}

TEST_CASE("cosine source converges at third order") {
  const double e1 = cosine_error(0.1, false), e2 = cosine_error(0.05, false), e3 = cosine_error(0.025, false);
  CHECK(e1 / e2 >= 6.0);
  CHECK(e2 / e3 >= 6.0);
}

TEST_CASE("interpolating the source into P1 limits the rate to second order") {
  const double e1 = cosine_error(0.1, true), e2 = cosine_error(0.05, true);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 < 6.0);
}

TEST_CASE("forward matrix properties") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitSquare, 0.1});
  const auto op = darcy::assemble_darcy_operators(m);
  const DenseMatrix a = darcy::darcy_forward_matrix(op);
  CHECK(a.rows() == 400);
  CHECK(a.cols() == m.num_interior_vertices());
  CHECK(a.allFinite());
  CHECK((a * Vector::Zero(a.cols())).norm() == 0.0);
  const Vector u = testing::random_vector(a.cols(), 3), w = testing::random_vector(a.rows(), 4);
  CHECK(std::abs((a * u).dot(w) - u.dot(a.transpose() * w)) <= 1e-10 * (1.0 + std::abs((a * u).dot(w))));
  CHECK_THROWS_AS(darcy::assemble_darcy_operators(mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.3})),
                  InvalidArgument);
}

TEST_CASE("phantom evaluation") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.1});
  CHECK(phantom::make_phantom(phantom::Phantom{}, m).norm() == 0.0);

  phantom::Phantom p;
  p.inclusions.push_back({phantom::Disc{Vec2(0.1, -0.2), 0.4}, 1.2});
  const Vector u = phantom::make_phantom(p, m);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const bool inside = (m.vertex(v) - Vec2(0.1, -0.2)).norm() < 0.4;
    CHECK(u(v) == (inside ? 1.2 : 0.0));
  }
}

TEST_CASE("phantom area converges with the mesh") {
  for (double h : {0.1, 0.05, 0.02}) {
    const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, h});
    const auto ph = phantom::default_tomography_phantom();
    const Vector u = phantom::make_phantom(ph, m);
    double integral = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t) {
      const auto& tri = m.triangle(t);
      integral += m.area(t) * (u(tri[0]) + u(tri[1]) + u(tri[2])) / 3.0;
    }
    double exact = 0.0;
    for (const auto& inc : ph.inclusions) exact += inc.value * phantom::shape_area(inc.shape);
    CHECK(testing::rel(integral, exact) <= 3.0 * h);
  }
}

TEST_CASE("shape areas and containment") {
  CHECK(phantom::shape_area(phantom::Disc{Vec2(0, 0), 0.5}) == doctest::Approx(std::numbers::pi * 0.25));
  const auto r = phantom::rectangle(Vec2(0.1, 0.2), Vec2(0.4, 0.6));
  CHECK(phantom::shape_area(r) == doctest::Approx(0.12));
  CHECK(phantom::contains(r, Vec2(0.2, 0.3)));
  CHECK_FALSE(phantom::contains(r, Vec2(0.5, 0.3)));
  phantom::Phantom outside;
  outside.inclusions.push_back({phantom::Disc{Vec2(0.9, 0), 0.3}, 1.0});
  CHECK_THROWS_AS(phantom::validate(outside, DomainShape::UnitDisc), InvalidArgument);
  CHECK_NOTHROW(phantom::validate(phantom::default_tomography_phantom(), DomainShape::UnitDisc));
  CHECK_NOTHROW(phantom::validate(phantom::default_darcy_phantom(), DomainShape::UnitSquare));
}

TEST_CASE("noise level of the default tomography experiment") {
  auto cfg = config::default_config(forward::Problem::Tomography);
  const auto data = pipeline::prepare_dataset(cfg);
  CHECK(testing::rel(data.sigma, 0.0472) <= 0.15);
  cfg.sigma_percent = 1.0;
  CHECK(testing::rel(pipeline::resolve_sigma(cfg, data.clean), 0.0118) <= 0.15);
}

TEST_CASE("noise is deterministic in the seed") {
  const Vector clean = testing::random_vector(50, 1);
  CHECK(forward::add_noise(clean, 0.0, 3) == clean);
  const Vector a = forward::add_noise(clean, 0.1, 7), b = forward::add_noise(clean, 0.1, 7);
  const Vector c = forward::add_noise(clean, 0.1, 8);
  CHECK(a == b);
  CHECK((a - c).norm() > 0.0);
  const Vector big = forward::add_noise(Vector::Zero(20000), 0.5, 11);
  CHECK(std::sqrt(big.squaredNorm() / 20000.0) == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("inverse crime is refused unless allowed") {
  const auto m = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.2});
  forward::ForwardSpec spec;
  spec.geometry = {4, 10, 3.0};
  const Vector truth = phantom::make_phantom(phantom::default_tomography_phantom(), m);
  forward::SynthesisOptions opt;
  CHECK_THROWS_AS(forward::synthesize_data(spec, m, truth, opt, &m), InvalidArgument);
  opt.allow_inverse_crime = true;
  const auto d = forward::synthesize_data(spec, m, truth, opt, &m);
  CHECK(d.inverse_crime);
  CHECK(d.noisy == d.clean);

  const auto coarse = mesh::generate_initial_mesh({DomainShape::UnitDisc, 0.3});
  opt.allow_inverse_crime = false;
  const auto ok = forward::synthesize_data(spec, m, truth, opt, &coarse);
  CHECK_FALSE(ok.inverse_crime);
  CHECK(forward::same_mesh(m, m));
  CHECK_FALSE(forward::same_mesh(m, coarse));
}

TEST_CASE("binary matrix and CSV round trips") {
  const DenseMatrix a = testing::random_vector(12, 5).reshaped(3, 4);
  std::stringstream ss;
  forward::write_matrix_binary(ss, a);
  CHECK(ss.str().size() == 8 + 16 + 12 * 8);
  CHECK(ss.str().substr(0, 8) == "BAMESHM1");
  CHECK(forward::read_matrix_binary(ss) == a);

  std::stringstream bad("NOTMAGIC");
  CHECK_THROWS(forward::read_matrix_binary(bad));

  const auto dir = scratch_dir("forward");
  const Vector v = testing::random_vector(9, 6);
  forward::write_vector_csv(dir / "v.csv", v);
  CHECK((forward::read_vector_csv(dir / "v.csv") - v).norm() == 0.0);
  forward::write_matrix_binary(dir / "a.bin", a);
  CHECK(forward::read_matrix_binary(dir / "a.bin") == a);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
