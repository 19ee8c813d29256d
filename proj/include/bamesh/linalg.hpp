#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace bamesh::linalg {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
/// Compressed sparse row storage: sorted unique column indices per row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
/// Column-compressed variant used by the QR factorization.
using SparseColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Assembles duplicates by summation and drops explicit zeros.
SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols,
                           const std::vector<Triplet>& triplets);

/// y = A x, throwing InvalidArgument on a dimension mismatch.
Vector spmv(const SparseMatrix& a, const Vector& x);
/// y = A^T x.
Vector spmv_transpose(const SparseMatrix& a, const Vector& x);

/// Observation operator stored either sparse (tomography) or dense (Darcy).
class LinearOperator {
 public:
  LinearOperator() = default;
  explicit LinearOperator(SparseMatrix a) : op_(std::move(a)) {}
  explicit LinearOperator(DenseMatrix a) : op_(std::move(a)) {}

  Eigen::Index rows() const;
  Eigen::Index cols() const;
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(op_); }

  Vector apply(const Vector& x) const;
  Vector apply_transpose(const Vector& y) const;

  /// Copy with every entry multiplied by s (used for noise whitening).
  LinearOperator scaled(double s) const;
  /// Copy restricted to the given columns, in that order.
  LinearOperator select_columns(const std::vector<int>& columns) const;

  DenseMatrix to_dense() const;
  const SparseMatrix* sparse() const { return std::get_if<SparseMatrix>(&op_); }
  const DenseMatrix* dense() const { return std::get_if<DenseMatrix>(&op_); }

 private:
  std::variant<SparseMatrix, DenseMatrix> op_;
};

/// Thin QR factorization L P = Q [R; 0] of a tall sparse matrix with full
/// column rank, computed with multifrontal Householder QR. Q is kept in
/// Householder form; only its first `cols()` columns (Q1) are exposed.
///
/// With R_full = R P^T, the factorization reads L = Q1 R_full, which is the
/// form used by the solver: R_full is invertible but, because of the
/// fill-reducing column permutation P, not itself triangular.
class ThinQR {
 public:
  /// Throws NumericalError if |R_ii| <= rank_tol * max|L_ij| for some i.
  explicit ThinQR(const SparseColMatrix& l, double rank_tol = 1e-10);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  /// Q1^T x (length cols()).
  Vector apply_qt(const Vector& x) const;
  /// Q1 y (length rows()).
  Vector apply_q(const Vector& y) const;
  /// R_full^{-1} y = P R^{-1} y.
  Vector solve_r(const Vector& y) const;
  /// R_full^{-T} y = R^{-T} P^T y.
  Vector solve_rt(const Vector& y) const;
  /// Column-blocked variants of apply_q and solve_rt.
  DenseMatrix apply_q_block(const DenseMatrix& y) const;
  DenseMatrix solve_rt_block(const DenseMatrix& y) const;

  /// Least-squares solution R_full^{-1} Q1^T z and the residual norm
  /// ||z - Q1 Q1^T z|| (the norm of the component outside range(L)).
  Vector solve(const Vector& z) const { return solve_r(apply_qt(z)); }
  double range_residual(const Vector& z) const;

  /// Column permutation P: column k of L P is column permutation()[k] of L.
  const std::vector<int>& permutation() const { return perm_; }
  /// Upper triangular factor R (cols x cols) in permuted column order.
  const SparseColMatrix& r() const;
  double min_abs_r_diagonal() const { return min_diag_; }

  /// Dense Q1 (rows x cols); for tests on small problems.
  DenseMatrix thin_q_dense() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<int> perm_;
  double min_diag_ = 0.0;
};

enum class StopReason : std::uint8_t {
  Discrepancy,        ///< ||b - A w_k||^2 < m
  ObjectiveIncrease,  ///< ||r_{k+1}||^2 + ||w_{k+1}||^2 exceeded the value at k
  MaxIterations,
  Stationary,         ///< A^T r vanished: the least-squares problem is solved
};

std::string_view to_string(StopReason reason);

struct CglsResult {
  Vector w;
  /// CGLS steps carried out (matrix-vector product pairs).
  int iterations = 0;
  /// Index k of the returned iterate w_k.
  int solution_index = 0;
  StopReason reason = StopReason::MaxIterations;
  /// ||b - A w_k|| for k = 0..iterations.
  std::vector<double> residual_norms;
  /// ||b - A w_k||^2 + ||w_k||^2 for k = 0..iterations.
  std::vector<double> objective;
};

using Apply = std::function<Vector(const Vector&)>;

struct CglsOptions {
  /// Discrepancy threshold m: stop as soon as ||b - A w_k||^2 < m.
  double discrepancy = 0.0;
  int max_iterations = 200;
  /// Stop when ||b - A w_{k+1}||^2 + ||w_{k+1}||^2 grows.
  bool stop_on_objective_increase = true;
  /// Relative tolerance on ||A^T r|| / ||A^T b|| (0 disables).
  double gradient_tolerance = 1e-12;
};

/// Conjugate gradient for least squares on b = A w from w_0 = 0.
/// A step that would raise the residual, which only happens through
/// rounding once the least-squares solution is reached, ends the
/// iteration as stationary without being recorded.
/// Throws NumericalError if the recursion produces NaN or Inf.
CglsResult cgls_solve(const Apply& apply_a, const Apply& apply_at, const Vector& b,
                      const CglsOptions& options);

}  // namespace bamesh::linalg
