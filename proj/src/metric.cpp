#include "bamesh/metric.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "bamesh/error.hpp"

namespace bamesh::metric {

std::array<Vec2, 3> reference_triangle() {
  const double rho = 1.0 / std::sqrt(3.0);
  std::array<Vec2, 3> r;
  for (int k = 0; k < 3; ++k) {
    const double phi = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * k / 3.0;
    r[k] = rho * Vec2(std::cos(phi), std::sin(phi));
  }
  return r;
}

SteinerData steiner_polar(const Vec2& a, const Vec2& b, const Vec2& c) {
  if (!(mesh::signed_area(a, b, c) > 0.0)) {
    throw GeometryError("steiner_polar: triangle is degenerate or clockwise");
  }
  static const auto ref = reference_triangle();
  Mat2 phys, refm;
  phys << b - a, c - a;
  refm << ref[1] - ref[0], ref[2] - ref[0];
  SteinerData s;
  s.f = phys * refm.inverse();
  s.centroid = (a + b + c) / 3.0;
  Eigen::JacobiSVD<Mat2> svd(s.f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat2& u = svd.matrixU();
  s.p = u * svd.singularValues().asDiagonal() * u.transpose();
  s.w = u * svd.matrixV().transpose();
  return s;
}

Mat2 element_metric(const SteinerData& s) {
  const Mat2 pinv = s.p.inverse();
  return pinv * pinv;
}

MetricField build_metric(const std::vector<Vec2>& gradient, const MetricParams& params) {
  if (!(params.h_min > 0.0 && params.h_min < params.h_max)) {
    throw InvalidArgument("build_metric: need 0 < h_min < h_max");
  }
  if (!(params.alpha >= 1.0)) throw InvalidArgument("build_metric: alpha must be >= 1");
  MetricField f;
  f.params = params;
  f.tensors.resize(gradient.size());
  f.anisotropic.assign(gradient.size(), 0);
  for (const auto& g : gradient) f.max_gradient = std::max(f.max_gradient, g.norm());
  if (!(f.max_gradient > 0.0)) {
    f.fallback = true;
    f.delta = 1.0 / (params.h_max * params.h_max);
    for (auto& t : f.tensors) t = f.delta * Mat2::Identity();
    return f;
  }
  f.c = 1.0 / (params.h_min * params.h_min * f.max_gradient * f.max_gradient);
  f.delta = std::sqrt(params.alpha / f.c) / params.h_max;
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    const double mag = gradient[i].norm();
    if (mag > f.delta) {
      const Vec2 e = gradient[i] / mag;
      const Vec2 e_perp(-e.y(), e.x());
      f.tensors[i] = f.c * mag * mag *
                     (e * e.transpose() + (1.0 / params.alpha) * e_perp * e_perp.transpose());
      f.anisotropic[i] = 1;
    } else {
      f.tensors[i] = f.delta * Mat2::Identity();
    }
  }
  return f;
}

Mat2 spd_log(const Mat2& g) {
  Eigen::SelfAdjointEigenSolver<Mat2> es;
  es.computeDirect(g);
  const Eigen::Vector2d ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0)) throw NumericalError("spd_log: matrix is not positive definite");
  return es.eigenvectors() * ev.array().log().matrix().asDiagonal() * es.eigenvectors().transpose();
}

Mat2 sym_exp(const Mat2& s) {
  Eigen::SelfAdjointEigenSolver<Mat2> es;
  es.computeDirect(s);
  return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

Mat2 clamp_eigenvalues(const Mat2& g, double lo, double hi) {
  Eigen::SelfAdjointEigenSolver<Mat2> es;
  es.computeDirect(g);
  const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(lo).cwiseMin(hi);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Mat2 intersect(const Mat2& a, const Mat2& b) {
  // Simultaneous reduction: b v = lambda a v with v^T a v = 1.
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> es(b, a);
  const Mat2 p = es.eigenvectors();
  const Eigen::Vector2d mu = es.eigenvalues().cwiseMax(1.0);
  const Mat2 pinv = p.inverse();
  const Mat2 out = pinv.transpose() * mu.asDiagonal() * pinv;
  return 0.5 * (out + out.transpose());
}

int gradate(const TriMesh& mesh, std::vector<Mat2>& tensors, double ratio, int max_passes) {
  if (tensors.size() != static_cast<std::size_t>(mesh.num_vertices())) {
    throw InvalidArgument("gradate: one tensor per vertex required");
  }
  if (!(ratio > 1.0)) throw InvalidArgument("gradate: ratio must exceed 1");
  const double log_ratio = std::log(ratio);
  for (int pass = 1; pass <= max_passes; ++pass) {
    bool changed = false;
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const auto& ed = mesh.edge(e);
      const Vec2 d = mesh.vertex(ed[1]) - mesh.vertex(ed[0]);
      for (int side = 0; side < 2; ++side) {
        const int from = ed[side], to = ed[1 - side];
        const double l = std::sqrt(d.dot(tensors[from] * d));
        const double eta = 1.0 + l * log_ratio;
        const Mat2 grown = tensors[from] / (eta * eta);
        const Mat2 next = intersect(tensors[to], grown);
        if ((next - tensors[to]).cwiseAbs().maxCoeff() > 1e-3 * tensors[to].cwiseAbs().maxCoeff()) {
          tensors[to] = next;
          changed = true;
        }
      }
    }
    if (!changed) return pass;
  }
  return max_passes;
}

struct MetricInterpolator::State {
  TriMesh mesh;
  std::unique_ptr<mesh::PointLocator> locator;
  std::vector<Mat2> logs;
};

MetricInterpolator::MetricInterpolator(const TriMesh& mesh, const std::vector<Mat2>& tensors) {
  if (tensors.size() != static_cast<std::size_t>(mesh.num_vertices())) {
    throw InvalidArgument("MetricInterpolator: one tensor per vertex required");
  }
  auto st = std::make_shared<State>();
  st->mesh = mesh;
  st->locator = std::make_unique<mesh::PointLocator>(st->mesh);
  st->logs.reserve(tensors.size());
  for (const auto& g : tensors) st->logs.push_back(spd_log(g));
  state_ = std::move(st);
}

Mat2 MetricInterpolator::in_triangle(int t, const std::array<double, 3>& bary) const {
  const auto& tri = state_->mesh.triangle(t);
  Mat2 s = Mat2::Zero();
  for (int k = 0; k < 3; ++k) s += bary[k] * state_->logs[tri[k]];
  return sym_exp(s);
}

Mat2 MetricInterpolator::operator()(const Vec2& p) const {
  const auto loc = state_->locator->locate_or_nearest(p);
  return in_triangle(loc.triangle, loc.barycentric);
}

double metric_segment_length(const MetricFunction& g, const Vec2& p, const Vec2& q) {
  static constexpr std::array<double, 5> nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights{0.2369268850561891, 0.4786286704993665,
                                                 0.5688888888888889, 0.4786286704993665,
                                                 0.2369268850561891};
  const Vec2 d = q - p;
  double len = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double t = 0.5 * (nodes[i] + 1.0);
    const Vec2 x = p + t * d;
    len += 0.5 * weights[i] * std::sqrt(std::max(0.0, d.dot(g(x) * d)));
  }
  return len;
}

double metric_conformity(const TriMesh& mesh, const MetricFunction& g) {
  double worst = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const auto s = steiner_polar(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
    const Mat2 diff = g(mesh.centroid(t)) - element_metric(s);
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<double> metric_edge_lengths(const TriMesh& mesh, const MetricFunction& g) {
  std::vector<double> out(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edge(e);
    out[e] = metric_segment_length(g, mesh.vertex(ed[0]), mesh.vertex(ed[1]));
  }
  return out;
}

}  // namespace bamesh::metric
