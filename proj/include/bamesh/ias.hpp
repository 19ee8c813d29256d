#pragma once

#include <optional>
#include <vector>

#include "bamesh/linalg.hpp"

namespace bamesh::ias {

using linalg::LinearOperator;
using linalg::SparseMatrix;
using linalg::Vector;

/// Generalized gamma hyperprior with exponent r, shape beta and per-component
/// scales vartheta. For r = 1 the shape is beta = 3/2 + eta.
struct HyperPrior {
  double r = 1.0;
  double beta = 1.5 + 1e-3;
  Vector vartheta;
  /// Scalar base scale the vector was derived from.
  double vartheta_star = 0.05;

  /// r * beta - 3/2, the coefficient of the logarithmic term.
  double kappa() const { return r * beta - 1.5; }
  /// Throws InvalidArgument unless r > 0, r*beta > 3/2 and vartheta > 0.
  void validate() const;
};

/// r = 1 prior with beta = 3/2 + eta.
HyperPrior gamma_prior(double eta, Vector vartheta, double vartheta_star);

/// 1/2 ||b - A1 z||^2 + 1/2 sum z^2/theta + sum (theta/vartheta)^r
///   - (r beta - 3/2) sum log(theta/vartheta).
/// Throws InvalidArgument if some theta_j <= 0.
double gibbs_energy(const Vector& z, const Vector& theta, const linalg::Apply& a1,
                    const Vector& b, const HyperPrior& prior);
/// The theta-dependent part of the energy for a single component.
double component_energy(double z, double theta, double vartheta, double r, double beta);

/// Minimizer over theta > 0 of z^2/(2 theta) + (theta/vartheta)^r
/// - (r beta - 3/2) log(theta/vartheta). Closed form for r = 1, safeguarded
/// Newton iteration otherwise.
double theta_update(double z, double vartheta, double r, double beta);
Vector theta_update(const Vector& z, const HyperPrior& prior);

/// ||theta_new - theta_old|| / ||theta_old||.
double relative_theta_change(const Vector& theta_old, const Vector& theta_new);

struct PhaseTwoParameters {
  double beta;
  double vartheta_star;
};

/// Shape and scale of the r = 1/2 prior that shares the z = 0 mode and the
/// mean of theta with the r = 1 prior of parameters (eta, vartheta1_star).
PhaseTwoParameters match_phase_two(double eta, double vartheta1_star);

enum class SensitivityRule {
  /// vartheta_j = vartheta_star * ||A1 e_j||^2
  Proportional,
  /// vartheta_j = vartheta_star / ||A1 e_j||^2, so every column of the
  /// prior-scaled operator has the same norm.
  Inverse,
};

/// Per-edge scales from the column norms of A1 = A R^{-1} Q1^T, where Q1 R is
/// the thin QR of L. Throws NumericalError if some column of A1 vanishes.
Vector sensitivity_scaling(const LinearOperator& a, const linalg::ThinQR& qr_l,
                           double vartheta_star,
                           SensitivityRule rule = SensitivityRule::Proportional);

struct ZUpdateOptions {
  int max_iterations = 200;
  /// Solve the Tikhonov problem min ||b - A_theta w||^2 + ||w||^2 to
  /// convergence instead of stopping CGLS early.
  bool exact = false;
  double exact_tolerance = 1e-13;
};

struct ZUpdateResult {
  Vector z;
  Vector u;
  Vector w;
  linalg::CglsResult cgls;
};

/// Minimizes over z the Gibbs energy at fixed theta by CGLS on the whitened
/// variable w = D_theta^{-1/2} z, with A_theta = A R_theta^{-1} Q_theta^T.
ZUpdateResult z_update(const Vector& theta, const LinearOperator& a, const SparseMatrix& l,
                       const Vector& b, const ZUpdateOptions& options = {});

struct IasOptions {
  double eta = 1e-3;
  double vartheta_star = 0.05;
  /// Run the r = 1/2 phase after the gamma phase.
  bool hybrid = true;
  double threshold = 0.05;
  int max_iterations = 15;
  ZUpdateOptions z;
};

struct IterationRecord {
  int phase = 1;
  int iteration = 0;
  int cgls_iterations = 0;
  linalg::StopReason cgls_stop = linalg::StopReason::MaxIterations;
  /// Gibbs energy before and after the theta update.
  double energy_before_theta = 0.0;
  double energy = 0.0;
  double relative_change = 0.0;
  /// ||Q2^T z|| / ||z|| after the z update (0 when z = 0).
  double compatibility = 0.0;
};

struct IasResult {
  Vector z;
  Vector u;
  Vector theta;
  std::vector<IterationRecord> history;
  HyperPrior phase_one;
  std::optional<HyperPrior> phase_two;
};

/// Iterative alternating scheme on the whitened system b = A u + noise,
/// z = L u, starting from theta = vartheta (or `theta0` if given).
IasResult ias_solve(const LinearOperator& a, const SparseMatrix& l, const Vector& b,
                    const Vector& vartheta, const IasOptions& options,
                    const Vector* theta0 = nullptr);

}  // namespace bamesh::ias
