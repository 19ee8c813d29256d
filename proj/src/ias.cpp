#include "bamesh/ias.hpp"

#include <cmath>
#include <string>

#include "bamesh/error.hpp"

namespace bamesh::ias {

void HyperPrior::validate() const {
  if (!(r > 0.0)) throw InvalidArgument("hyperprior: exponent r must be positive");
  if (!(kappa() > 0.0)) throw InvalidArgument("hyperprior: r * beta must exceed 3/2");
  if (vartheta.size() == 0) throw InvalidArgument("hyperprior: empty scale vector");
  if (!(vartheta.minCoeff() > 0.0)) throw InvalidArgument("hyperprior: scales must be positive");
}

HyperPrior gamma_prior(double eta, Vector vartheta, double vartheta_star) {
  if (!(eta > 0.0)) throw InvalidArgument("gamma prior: eta must be positive");
  HyperPrior p{1.0, 1.5 + eta, std::move(vartheta), vartheta_star};
  p.validate();
  return p;
}

double component_energy(double z, double theta, double vartheta, double r, double beta) {
  const double ratio = theta / vartheta;
  return 0.5 * z * z / theta + std::pow(ratio, r) - (r * beta - 1.5) * std::log(ratio);
}

double gibbs_energy(const Vector& z, const Vector& theta, const linalg::Apply& a1,
                    const Vector& b, const HyperPrior& prior) {
  if (z.size() != theta.size() || z.size() != prior.vartheta.size()) {
    throw InvalidArgument("gibbs_energy: z, theta and vartheta must have equal length");
  }
  if (!(theta.minCoeff() > 0.0)) throw InvalidArgument("gibbs_energy: theta must be positive");
  double e = 0.5 * (b - a1(z)).squaredNorm();
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    e += component_energy(z(j), theta(j), prior.vartheta(j), prior.r, prior.beta);
  }
  return e;
}

double theta_update(double z, double vartheta, double r, double beta) {
  const double kappa = r * beta - 1.5;
  if (r == 1.0) {
    const double a = kappa * vartheta;
    return 0.5 * (a + std::sqrt(a * a + 2.0 * vartheta * z * z));
  }
  const double theta0 = vartheta * std::pow(kappa / r, 1.0 / r);
  if (z == 0.0) return theta0;

  // theta * dE/dtheta, increasing in theta and convex in log(theta).
  const double half_z2 = 0.5 * z * z;
  auto f = [&](double theta) { return r * std::pow(theta / vartheta, r) - half_z2 / theta - kappa; };
  double lo = theta0;
  double hi = theta0 + std::abs(z) * std::max(1.0, vartheta) * 1e6;
  if (!(f(hi) > 0.0)) {
    throw NumericalError("theta_update: root bracket failed for z = " + std::to_string(z));
  }
  double t = std::log(hi);
  for (int it = 0; it < 200; ++it) {
    const double theta = std::exp(t);
    const double ft = f(theta);
    if (std::abs(ft) <= 1e-12 * (theta + 1.0)) return theta;
    if (ft > 0.0) hi = std::min(hi, theta); else lo = std::max(lo, theta);
    const double slope = r * r * std::pow(theta / vartheta, r) + half_z2 / theta;
    double t_next = t - ft / slope;
    if (!(t_next > std::log(lo) && t_next < std::log(hi))) {
      t_next = 0.5 * (std::log(lo) + std::log(hi));
    }
    if (std::abs(t_next - t) <= 1e-15 * std::max(1.0, std::abs(t))) return std::exp(t_next);
    t = t_next;
  }
  return std::exp(t);
}

Vector theta_update(const Vector& z, const HyperPrior& prior) {
  prior.validate();
  if (z.size() != prior.vartheta.size()) {
    throw InvalidArgument("theta_update: z and vartheta must have equal length");
  }
  Vector theta(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (!std::isfinite(z(j))) throw NumericalError("theta_update: non-finite z");
    theta(j) = theta_update(z(j), prior.vartheta(j), prior.r, prior.beta);
  }
  return theta;
}

double relative_theta_change(const Vector& theta_old, const Vector& theta_new) {
  if (theta_old.size() != theta_new.size()) {
    throw InvalidArgument("relative_theta_change: length mismatch");
  }
  const double denom = theta_old.norm();
  if (denom == 0.0) throw InvalidArgument("relative_theta_change: theta_old is zero");
  return (theta_new - theta_old).norm() / denom;
}

PhaseTwoParameters match_phase_two(double eta, double vartheta1_star) {
  if (!(eta > 0.0)) throw InvalidArgument("match_phase_two: eta must be positive");
  if (!(vartheta1_star > 0.0)) throw InvalidArgument("match_phase_two: scale must be positive");
  const double mu = 1.0 + 1.5 / eta;
  const double beta2 = (6.0 * mu + 1.0 + std::sqrt(48.0 * mu + 1.0)) / (2.0 * (mu - 1.0));
  const double gap = beta2 - 3.0;
  return {beta2, vartheta1_star * eta / (gap * gap)};
}

Vector sensitivity_scaling(const LinearOperator& a, const linalg::ThinQR& qr_l,
                           double vartheta_star, SensitivityRule rule) {
  if (a.cols() != qr_l.cols()) throw InvalidArgument("sensitivity_scaling: dimension mismatch");
  if (!(vartheta_star > 0.0)) throw InvalidArgument("sensitivity_scaling: scale must be positive");
  // Rows of A1^T = Q1 R^{-T} A^T, accumulated over blocks of data rows.
  Vector norms = Vector::Zero(qr_l.rows());
  constexpr Eigen::Index block = 128;
  for (Eigen::Index i0 = 0; i0 < a.rows(); i0 += block) {
    const Eigen::Index bs = std::min(block, a.rows() - i0);
    linalg::DenseMatrix at;
    if (const auto* d = a.dense()) {
      at = d->middleRows(i0, bs).transpose();
    } else {
      at = linalg::DenseMatrix(a.sparse()->middleRows(i0, bs).transpose());
    }
    const linalg::DenseMatrix y = qr_l.apply_q_block(qr_l.solve_rt_block(at));
    norms += y.rowwise().squaredNorm();
  }
  for (Eigen::Index j = 0; j < norms.size(); ++j) {
    if (!(norms(j) > 0.0)) {
      throw NumericalError("sensitivity_scaling: the data do not see edge " + std::to_string(j));
    }
  }
  if (rule == SensitivityRule::Inverse) return vartheta_star * norms.cwiseInverse();
  return vartheta_star * norms;
}

ZUpdateResult z_update(const Vector& theta, const LinearOperator& a, const SparseMatrix& l,
                       const Vector& b, const ZUpdateOptions& options) {
  if (theta.size() != l.rows() || a.cols() != l.cols() || b.size() != a.rows()) {
    throw InvalidArgument("z_update: dimension mismatch");
  }
  if (!(theta.minCoeff() > 0.0)) throw InvalidArgument("z_update: theta must be positive");
  const Vector sqrt_theta = theta.cwiseSqrt();
  const linalg::SparseColMatrix l_theta = sqrt_theta.cwiseInverse().asDiagonal() * l;
  const linalg::ThinQR qr(l_theta);

  auto to_nodal = [&](const Vector& w) { return qr.solve_r(qr.apply_qt(w)); };
  auto apply = [&](const Vector& w) { return a.apply(to_nodal(w)); };
  auto apply_t = [&](const Vector& y) { return qr.apply_q(qr.solve_rt(a.apply_transpose(y))); };

  ZUpdateResult out;
  if (!options.exact) {
    linalg::CglsOptions copt;
    copt.discrepancy = static_cast<double>(b.size());
    copt.max_iterations = options.max_iterations;
    out.cgls = linalg::cgls_solve(apply, apply_t, b, copt);
  } else {
    const Eigen::Index m = b.size();
    const Eigen::Index n = l.rows();
    auto apply_aug = [&](const Vector& w) {
      Vector y(m + n);
      y.head(m) = apply(w);
      y.tail(n) = w;
      return y;
    };
    auto apply_aug_t = [&](const Vector& y) -> Vector {
      return apply_t(y.head(m)) + y.tail(n);
    };
    Vector b_aug = Vector::Zero(m + n);
    b_aug.head(m) = b;
    linalg::CglsOptions copt;
    copt.discrepancy = 0.0;
    copt.stop_on_objective_increase = false;
    copt.max_iterations = std::max<int>(options.max_iterations, static_cast<int>(4 * n + 100));
    copt.gradient_tolerance = options.exact_tolerance;
    out.cgls = linalg::cgls_solve(apply_aug, apply_aug_t, b_aug, copt);
  }
  out.w = out.cgls.w;
  out.u = to_nodal(out.w);
  out.z = sqrt_theta.cwiseProduct(out.w);
  return out;
}

IasResult ias_solve(const LinearOperator& a, const SparseMatrix& l, const Vector& b,
                    const Vector& vartheta, const IasOptions& options, const Vector* theta0) {
  if (a.cols() != l.cols() || vartheta.size() != l.rows() || b.size() != a.rows()) {
    throw InvalidArgument("ias_solve: dimension mismatch");
  }
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw InvalidArgument("ias_solve: threshold must lie in (0, 1)");
  }
  if (options.max_iterations < 1) throw InvalidArgument("ias_solve: max_iterations must be >= 1");

  IasResult res;
  res.phase_one = gamma_prior(options.eta, vartheta, options.vartheta_star);
  res.theta = theta0 ? *theta0 : vartheta;
  if (res.theta.size() != vartheta.size() || !(res.theta.minCoeff() > 0.0)) {
    throw InvalidArgument("ias_solve: initial theta must be positive with one entry per edge");
  }
  const linalg::ThinQR qr_l{linalg::SparseColMatrix(l)};

  auto penalty = [](const Vector& z, const Vector& theta, const HyperPrior& p) {
    double e = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      e += component_energy(z(j), theta(j), p.vartheta(j), p.r, p.beta);
    }
    return e;
  };

  auto run_phase = [&](const HyperPrior& prior, int phase) {
    for (int it = 1; it <= options.max_iterations; ++it) {
      ZUpdateResult zr = z_update(res.theta, a, l, b, options.z);
      IterationRecord rec;
      rec.phase = phase;
      rec.iteration = it;
      rec.cgls_iterations = zr.cgls.iterations;
      rec.cgls_stop = zr.cgls.reason;
      const double zn = zr.z.norm();
      rec.compatibility = zn > 0.0 ? qr_l.range_residual(zr.z) / zn : 0.0;
      const double fidelity = 0.5 * (b - a.apply(zr.u)).squaredNorm();
      rec.energy_before_theta = fidelity + penalty(zr.z, res.theta, prior);
      Vector theta_new = theta_update(zr.z, prior);
      rec.energy = fidelity + penalty(zr.z, theta_new, prior);
      if (!std::isfinite(rec.energy)) throw NumericalError("ias_solve: non-finite Gibbs energy");
      rec.relative_change = relative_theta_change(res.theta, theta_new);
      res.theta = std::move(theta_new);
      res.z = std::move(zr.z);
      res.u = std::move(zr.u);
      res.history.push_back(rec);
      if (rec.relative_change < options.threshold) break;
    }
  };

  run_phase(res.phase_one, 1);
  if (options.hybrid) {
    const auto p2 = match_phase_two(options.eta, options.vartheta_star);
    HyperPrior prior{0.5, p2.beta, vartheta * (p2.vartheta_star / options.vartheta_star),
                     p2.vartheta_star};
    prior.validate();
    res.phase_two = prior;
    run_phase(prior, 2);
  }
  return res;
}

}  // namespace bamesh::ias
