#include "bamesh/linalg.hpp"

#include <Eigen/SPQRSupport>
#include <cmath>
#include <string>

#include "bamesh/error.hpp"

namespace bamesh::linalg {

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols,
                           const std::vector<Triplet>& triplets) {
  SparseMatrix a(rows, cols);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.prune(0.0);
  a.makeCompressed();
  return a;
}

Vector spmv(const SparseMatrix& a, const Vector& x) {
  if (a.cols() != x.size()) {
    throw InvalidArgument("spmv: matrix has " + std::to_string(a.cols()) +
                          " columns but vector has length " + std::to_string(x.size()));
  }
  return a * x;
}

Vector spmv_transpose(const SparseMatrix& a, const Vector& x) {
  if (a.rows() != x.size()) {
    throw InvalidArgument("spmv_transpose: matrix has " + std::to_string(a.rows()) +
                          " rows but vector has length " + std::to_string(x.size()));
  }
  return a.transpose() * x;
}

// ---------------------------------------------------------------------------
// LinearOperator

Eigen::Index LinearOperator::rows() const {
  return std::visit([](const auto& a) { return a.rows(); }, op_);
}

Eigen::Index LinearOperator::cols() const {
  return std::visit([](const auto& a) { return a.cols(); }, op_);
}

Vector LinearOperator::apply(const Vector& x) const {
  if (x.size() != cols()) throw InvalidArgument("LinearOperator::apply: dimension mismatch");
  return std::visit([&](const auto& a) -> Vector { return a * x; }, op_);
}

Vector LinearOperator::apply_transpose(const Vector& y) const {
  if (y.size() != rows()) {
    throw InvalidArgument("LinearOperator::apply_transpose: dimension mismatch");
  }
  return std::visit([&](const auto& a) -> Vector { return a.transpose() * y; }, op_);
}

LinearOperator LinearOperator::scaled(double s) const {
  return std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        return LinearOperator(T(a * s));
      },
      op_);
}

LinearOperator LinearOperator::select_columns(const std::vector<int>& columns) const {
  if (const auto* d = dense()) {
    DenseMatrix out(d->rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) out.col(k) = d->col(columns[k]);
    return LinearOperator(std::move(out));
  }
  const auto& s = *sparse();
  std::vector<int> new_col(s.cols(), -1);
  for (std::size_t k = 0; k < columns.size(); ++k) new_col[columns[k]] = static_cast<int>(k);
  std::vector<Triplet> trip;
  trip.reserve(s.nonZeros());
  for (int r = 0; r < s.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(s, r); it; ++it) {
      const int c = new_col[it.col()];
      if (c >= 0) trip.emplace_back(r, c, it.value());
    }
  }
  return LinearOperator(from_triplets(s.rows(), static_cast<Eigen::Index>(columns.size()), trip));
}

DenseMatrix LinearOperator::to_dense() const {
  if (const auto* d = dense()) return *d;
  return DenseMatrix(*sparse());
}

// ---------------------------------------------------------------------------
// ThinQR

namespace {
using LongColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, SuiteSparse_long>;
}

struct ThinQR::Impl {
  mutable Eigen::SPQR<LongColMatrix> qr;
  SparseColMatrix r;
};

ThinQR::ThinQR(const SparseColMatrix& l, double rank_tol) : rows_(l.rows()), cols_(l.cols()) {
  if (rows_ < cols_) throw InvalidArgument("ThinQR: matrix must have rows >= cols");
  if (cols_ == 0) throw InvalidArgument("ThinQR: matrix has no columns");
  auto impl = std::make_shared<Impl>();
  LongColMatrix lc = l.cast<double>();
  lc.makeCompressed();
  // No column dropping: rank deficiency is diagnosed below from diag(R).
  impl->qr.setPivotThreshold(0.0);
  impl->qr.compute(lc);
  if (impl->qr.info() != Eigen::Success) {
    throw NumericalError("ThinQR: sparse QR factorization failed");
  }
  if (impl->qr.rank() < cols_) {
    throw NumericalError("ThinQR: matrix is rank deficient (rank " +
                         std::to_string(impl->qr.rank()) + " < " + std::to_string(cols_) + ")");
  }
  const LongColMatrix r_full = impl->qr.matrixR();
  impl->r = SparseColMatrix(r_full.topLeftCorner(cols_, cols_).cast<double>());
  impl->r.makeCompressed();

  double max_entry = 0.0;
  for (int k = 0; k < l.outerSize(); ++k)
    for (SparseColMatrix::InnerIterator it(l, k); it; ++it)
      max_entry = std::max(max_entry, std::abs(it.value()));
  min_diag_ = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < cols_; ++i) min_diag_ = std::min(min_diag_, std::abs(impl->r.coeff(i, i)));
  if (!(min_diag_ > rank_tol * max_entry)) {
    throw NumericalError("ThinQR: matrix is numerically rank deficient (min |R_ii| = " +
                         std::to_string(min_diag_) + ")");
  }

  const auto perm = impl->qr.colsPermutation();
  perm_.resize(cols_);
  for (Eigen::Index k = 0; k < cols_; ++k) perm_[k] = static_cast<int>(perm.indices()[k]);
  impl_ = std::move(impl);
}

Vector ThinQR::apply_qt(const Vector& x) const {
  if (x.size() != rows_) throw InvalidArgument("ThinQR::apply_qt: dimension mismatch");
  Vector full = impl_->qr.matrixQ().transpose() * x;
  return full.head(cols_);
}

Vector ThinQR::apply_q(const Vector& y) const {
  if (y.size() != cols_) throw InvalidArgument("ThinQR::apply_q: dimension mismatch");
  Vector padded = Vector::Zero(rows_);
  padded.head(cols_) = y;
  Vector out = impl_->qr.matrixQ() * padded;
  return out;
}

Vector ThinQR::solve_r(const Vector& y) const {
  if (y.size() != cols_) throw InvalidArgument("ThinQR::solve_r: dimension mismatch");
  const Vector x = impl_->r.triangularView<Eigen::Upper>().solve(y);
  Vector out(cols_);
  for (Eigen::Index k = 0; k < cols_; ++k) out(perm_[k]) = x(k);
  return out;
}

Vector ThinQR::solve_rt(const Vector& y) const {
  if (y.size() != cols_) throw InvalidArgument("ThinQR::solve_rt: dimension mismatch");
  Vector py(cols_);
  for (Eigen::Index k = 0; k < cols_; ++k) py(k) = y(perm_[k]);
  return impl_->r.transpose().triangularView<Eigen::Lower>().solve(py);
}

DenseMatrix ThinQR::apply_q_block(const DenseMatrix& y) const {
  if (y.rows() != cols_) throw InvalidArgument("ThinQR::apply_q: dimension mismatch");
  DenseMatrix padded = DenseMatrix::Zero(rows_, y.cols());
  padded.topRows(cols_) = y;
  DenseMatrix out = impl_->qr.matrixQ() * padded;
  return out;
}

DenseMatrix ThinQR::solve_rt_block(const DenseMatrix& y) const {
  if (y.rows() != cols_) throw InvalidArgument("ThinQR::solve_rt: dimension mismatch");
  DenseMatrix py(cols_, y.cols());
  for (Eigen::Index k = 0; k < cols_; ++k) py.row(k) = y.row(perm_[k]);
  return impl_->r.transpose().triangularView<Eigen::Lower>().solve(py);
}

double ThinQR::range_residual(const Vector& z) const {
  if (z.size() != rows_) throw InvalidArgument("ThinQR::range_residual: dimension mismatch");
  const Vector full = impl_->qr.matrixQ().transpose() * z;
  return full.tail(rows_ - cols_).norm();
}

const SparseColMatrix& ThinQR::r() const { return impl_->r; }

DenseMatrix ThinQR::thin_q_dense() const {
  DenseMatrix q(rows_, cols_);
  for (Eigen::Index j = 0; j < cols_; ++j) q.col(j) = apply_q(Vector::Unit(cols_, j));
  return q;
}

// ---------------------------------------------------------------------------
// CGLS

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Discrepancy: return "discrepancy";
    case StopReason::ObjectiveIncrease: return "objective-increase";
    case StopReason::MaxIterations: return "max-iter";
    case StopReason::Stationary: return "stationary";
  }
  return "unknown";
}

CglsResult cgls_solve(const Apply& apply_a, const Apply& apply_at, const Vector& b,
                      const CglsOptions& options) {
  if (options.max_iterations < 1) throw InvalidArgument("cgls_solve: max_iter must be >= 1");
  CglsResult res;
  Vector r = b;
  Vector s = apply_at(r);
  res.w = Vector::Zero(s.size());
  double rr = r.squaredNorm();
  res.residual_norms.push_back(std::sqrt(rr));
  res.objective.push_back(rr);

  if (rr < options.discrepancy) {
    res.reason = StopReason::Discrepancy;
    return res;
  }
  double gamma = s.squaredNorm();
  const double gamma0 = gamma;
  if (gamma == 0.0) {
    res.reason = StopReason::Stationary;
    return res;
  }
  Vector p = s;

  for (int k = 0; k < options.max_iterations; ++k) {
    const Vector q = apply_a(p);
    const double qq = q.squaredNorm();
    const double alpha = gamma / qq;
    Vector w_next = res.w + alpha * p;
    r -= alpha * q;
    const double rr_next = r.squaredNorm();
    const double ww_next = w_next.squaredNorm();
    if (!std::isfinite(alpha) || !std::isfinite(rr_next) || !std::isfinite(ww_next)) {
      throw NumericalError("cgls_solve: non-finite value at iteration " + std::to_string(k + 1));
    }
    if (rr_next > rr) {
      res.reason = StopReason::Stationary;
      return res;
    }
    rr = rr_next;
    res.iterations = k + 1;
    res.residual_norms.push_back(std::sqrt(rr_next));
    res.objective.push_back(rr_next + ww_next);

    if (rr_next < options.discrepancy) {
      res.w = std::move(w_next);
      res.solution_index = k + 1;
      res.reason = StopReason::Discrepancy;
      return res;
    }
    if (options.stop_on_objective_increase && rr_next + ww_next > res.objective[k]) {
      res.solution_index = k;
      res.reason = StopReason::ObjectiveIncrease;
      return res;
    }
    res.w = std::move(w_next);
    res.solution_index = k + 1;

    s = apply_at(r);
    const double gamma_next = s.squaredNorm();
    if (gamma_next == 0.0 ||
        (options.gradient_tolerance > 0.0 &&
         gamma_next <= options.gradient_tolerance * options.gradient_tolerance * gamma0)) {
      res.reason = StopReason::Stationary;
      return res;
    }
    p = s + (gamma_next / gamma) * p;
    gamma = gamma_next;
  }
  res.reason = StopReason::MaxIterations;
  return res;
}

}  // namespace bamesh::linalg
