#include "bamesh/darcy.hpp"

#include <Eigen/SparseCholesky>

#include "bamesh/error.hpp"
#include "bamesh/whitney.hpp"

namespace bamesh::darcy {

namespace {

// Symmetric 6-point rule, exact for polynomials of degree 4.
struct QuadPoint {
  std::array<double, 3> lam;
  double weight;  // fraction of the triangle area
};

const std::array<QuadPoint, 6>& quadrature() {
  static const std::array<QuadPoint, 6> rule = [] {
    const double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2, w2 = 0.109951743655322;
    return std::array<QuadPoint, 6>{{{{a1, a1, b1}, w1}, {{a1, b1, a1}, w1}, {{b1, a1, a1}, w1},
                                     {{a2, a2, b2}, w2}, {{a2, b2, a2}, w2}, {{b2, a2, a2}, w2}}};
  }();
  return rule;
}

std::array<Vec2, 6> p2_gradients(const std::array<double, 3>& lam, const std::array<Vec2, 3>& g) {
  std::array<Vec2, 6> out;
  for (int a = 0; a < 3; ++a) out[a] = (4.0 * lam[a] - 1.0) * g[a];
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3, b = (k + 2) % 3;
    out[3 + k] = 4.0 * (lam[a] * g[b] + lam[b] * g[a]);
  }
  return out;
}

}  // namespace

std::array<double, 6> p2_shape(const std::array<double, 3>& lam) {
  std::array<double, 6> out;
  for (int a = 0; a < 3; ++a) out[a] = lam[a] * (2.0 * lam[a] - 1.0);
  for (int k = 0; k < 3; ++k) out[3 + k] = 4.0 * lam[(k + 1) % 3] * lam[(k + 2) % 3];
  return out;
}

P2Space build_p2_space(const TriMesh& mesh) {
  P2Space s;
  const int nv = mesh.num_vertices();
  s.num_nodes = nv + mesh.num_edges();
  s.coords = mesh.vertices();
  for (int e = 0; e < mesh.num_edges(); ++e) {
    s.coords.push_back(0.5 * (mesh.vertex(mesh.edge(e)[0]) + mesh.vertex(mesh.edge(e)[1])));
  }
  s.element_nodes.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const auto& te = mesh.triangle_edges(t);
    s.element_nodes[t] = {tri[0], tri[1], tri[2], nv + te[0], nv + te[1], nv + te[2]};
  }
  return s;
}

std::vector<Vec2> observation_grid(int n) {
  if (n < 1) throw InvalidArgument("observation_grid: n must be >= 1");
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int k = 1; k <= n; ++k)
    for (int i = 1; i <= n; ++i) pts.emplace_back((i - 0.5) / n, (k - 0.5) / n);
  return pts;
}

DarcyOperator assemble_darcy_operators(const TriMesh& mesh, int grid) {
  Vec2 lo = mesh.vertex(0), hi = lo;
  for (const auto& p : mesh.vertices()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if (lo.norm() > 1e-12 || (hi - Vec2(1.0, 1.0)).norm() > 1e-12 ||
      std::abs(mesh.total_area() - 1.0) > 1e-10) {
    throw InvalidArgument("assemble_darcy_operators: the mesh must cover the unit square");
  }
  DarcyOperator op;
  op.space = build_p2_space(mesh);
  op.interior_vertices = mesh.interior_vertices();
  op.free_index.assign(op.space.num_nodes, -1);
  for (int n = 0; n < op.space.num_nodes; ++n) {
    const double x = op.space.coords[n].x();
    if (x > 1e-12 && x < 1.0 - 1e-12) {
      op.free_index[n] = static_cast<int>(op.free_nodes.size());
      op.free_nodes.push_back(n);
    }
  }
  const auto nfree = static_cast<Eigen::Index>(op.free_nodes.size());

  std::vector<linalg::Triplet> gk, mk;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& nodes = op.space.element_nodes[t];
    const auto& tri = mesh.triangle(t);
    const double area = mesh.area(t);
    const auto grad = whitney::barycentric_gradients(mesh, t);
    for (const auto& q : quadrature()) {
      const auto phi = p2_shape(q.lam);
      const auto dphi = p2_gradients(q.lam, grad);
      const double w = q.weight * area;
      for (int i = 0; i < 6; ++i) {
        const int fi = op.free_index[nodes[i]];
        if (fi < 0) continue;
        for (int j = 0; j < 6; ++j) {
          const int fj = op.free_index[nodes[j]];
          if (fj >= 0) gk.emplace_back(fi, fj, w * dphi[i].dot(dphi[j]));
        }
        for (int l = 0; l < 3; ++l) mk.emplace_back(fi, tri[l], w * phi[i] * q.lam[l]);
      }
    }
  }
  op.stiffness = linalg::from_triplets(nfree, nfree, gk);
  op.mass = linalg::from_triplets(nfree, mesh.num_vertices(), mk);

  op.observation_points = observation_grid(grid);
  mesh::PointLocator locator(mesh);
  std::vector<linalg::Triplet> pk;
  for (std::size_t r = 0; r < op.observation_points.size(); ++r) {
    const auto loc = locator.locate_or_nearest(op.observation_points[r]);
    const auto phi = p2_shape(loc.barycentric);
    const auto& nodes = op.space.element_nodes[loc.triangle];
    for (int i = 0; i < 6; ++i) {
      const int fi = op.free_index[nodes[i]];
      if (fi >= 0) pk.emplace_back(static_cast<int>(r), fi, phi[i]);
    }
  }
  op.observation =
      linalg::from_triplets(static_cast<Eigen::Index>(op.observation_points.size()), nfree, pk);
  return op;
}

namespace {

using Factor = Eigen::SimplicialLDLT<linalg::SparseColMatrix>;

std::unique_ptr<Factor> factorize(const DarcyOperator& op) {
  auto f = std::make_unique<Factor>(linalg::SparseColMatrix(op.stiffness));
  if (f->info() != Eigen::Success) throw NumericalError("darcy: stiffness factorization failed");
  return f;
}

}  // namespace

DenseMatrix darcy_forward_matrix(const DarcyOperator& op, bool all_vertices) {
  const auto factor = factorize(op);
  // A = P G^{-1} M = (G^{-1} P^T)^T M since G is symmetric.
  const DenseMatrix pt = DenseMatrix(op.observation.transpose());
  const DenseMatrix y = factor->solve(pt);
  if (factor->info() != Eigen::Success) throw NumericalError("darcy: solve failed");
  DenseMatrix a_all = (op.mass.transpose() * y).transpose();
  if (all_vertices) return a_all;
  DenseMatrix a(a_all.rows(), static_cast<Eigen::Index>(op.interior_vertices.size()));
  for (std::size_t k = 0; k < op.interior_vertices.size(); ++k) {
    a.col(static_cast<Eigen::Index>(k)) = a_all.col(op.interior_vertices[k]);
  }
  return a;
}

Vector solve_state(const DarcyOperator& op, const Vector& u_all) {
  if (u_all.size() != op.mass.cols()) throw InvalidArgument("solve_state: u has wrong length");
  const auto factor = factorize(op);
  const Vector f_free = factor->solve(op.mass * u_all);
  Vector f = Vector::Zero(op.space.num_nodes);
  for (std::size_t k = 0; k < op.free_nodes.size(); ++k) f(op.free_nodes[k]) = f_free(static_cast<Eigen::Index>(k));
  return f;
}

Vector solve_state(const DarcyOperator& op, const std::function<double(const Vec2&)>& source) {
  Vector load = Vector::Zero(static_cast<Eigen::Index>(op.free_nodes.size()));
  for (const auto& nodes : op.space.element_nodes) {
    const Vec2& a = op.space.coords[nodes[0]];
    const Vec2& b = op.space.coords[nodes[1]];
    const Vec2& c = op.space.coords[nodes[2]];
    const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    for (const auto& q : quadrature()) {
      const double s = source(q.lam[0] * a + q.lam[1] * b + q.lam[2] * c) * q.weight * area;
      const auto phi = p2_shape(q.lam);
      for (int i = 0; i < 6; ++i) {
        const int fi = op.free_index[nodes[i]];
        if (fi >= 0) load(fi) += s * phi[i];
      }
    }
  }
  const auto factor = factorize(op);
  const Vector f_free = factor->solve(load);
  Vector f = Vector::Zero(op.space.num_nodes);
  for (std::size_t k = 0; k < op.free_nodes.size(); ++k) f(op.free_nodes[k]) = f_free(static_cast<Eigen::Index>(k));
  return f;
}

}  // namespace bamesh::darcy
