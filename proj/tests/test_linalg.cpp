#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "bamesh/error.hpp"
#include "bamesh/linalg.hpp"
#include "bamesh/whitney.hpp"
#include "helpers.hpp"

using namespace bamesh;
using linalg::DenseMatrix;
using linalg::SparseMatrix;
using linalg::Vector;

namespace {

SparseMatrix random_sparse(int rows, int cols, double density, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n;
  std::vector<linalg::Triplet> trip;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (u(gen) < density) trip.emplace_back(i, j, n(gen));
  return linalg::from_triplets(rows, cols, trip);
}

linalg::CglsResult run_dense(const DenseMatrix& a, const Vector& b, linalg::CglsOptions opt) {
  return linalg::cgls_solve([&](const Vector& x) -> Vector { return a * x; },
                            [&](const Vector& y) -> Vector { return a.transpose() * y; }, b, opt);
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("spmv basics") {
  SparseMatrix id(3, 3);
  id.setIdentity();
  const Vector x(Eigen::Vector3d(1, -2, 3));
  CHECK(linalg::spmv(id, x) == x);

  const SparseMatrix a = linalg::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 2}, {1, 0, 3}, {1, 1, 4}});
  const Vector y = linalg::spmv(a, Vector::Ones(2));
  CHECK(y(0) == 3.0);
  CHECK(y(1) == 7.0);
  CHECK_THROWS_AS(linalg::spmv(a, Vector::Ones(3)), InvalidArgument);
  CHECK_THROWS_AS(linalg::spmv_transpose(a, Vector::Ones(3)), InvalidArgument);
}

TEST_CASE("assembly sums duplicates and drops zeros") {
  const SparseMatrix a = linalg::from_triplets(2, 2, {{0, 0, 1}, {0, 0, 2}, {1, 1, 1}, {1, 1, -1}});
  CHECK(a.coeff(0, 0) == 3.0);
  CHECK(a.nonZeros() == 1);
}

TEST_CASE("normal products match a dense reference") {
  const SparseMatrix a = random_sparse(50, 30, 0.2, 1);
  const DenseMatrix d(a);
  const Vector x = testing::random_vector(30, 2);
  const Vector got = linalg::spmv_transpose(a, linalg::spmv(a, x));
  const Vector ref = d.transpose() * (d * x);
  CHECK((got - ref).lpNorm<Eigen::Infinity>() <= 1e-12 * ref.lpNorm<Eigen::Infinity>());
}

TEST_CASE("linear operator variants agree") {
  const SparseMatrix a = random_sparse(12, 7, 0.4, 4);
  const linalg::LinearOperator s(a), d{DenseMatrix(a)};
  const Vector x = testing::random_vector(7, 5), y = testing::random_vector(12, 6);
  CHECK((s.apply(x) - d.apply(x)).norm() <= 1e-13);
  CHECK((s.apply_transpose(y) - d.apply_transpose(y)).norm() <= 1e-13);
  const auto sel = s.select_columns({3, 0});
  CHECK(sel.cols() == 2);
  CHECK((sel.to_dense().col(0) - DenseMatrix(a).col(3)).norm() == 0.0);
  CHECK((s.scaled(2.0).apply(x) - 2.0 * s.apply(x)).norm() <= 1e-13);
}

TEST_CASE("QR of a constant column") {
  const SparseMatrix l = linalg::from_triplets(4, 1, {{0, 0, 1}, {1, 0, 1}, {2, 0, 1}, {3, 0, 1}});
  const linalg::ThinQR qr{linalg::SparseColMatrix(l)};
  CHECK(std::abs(qr.r().coeff(0, 0)) == doctest::Approx(2.0));
  const DenseMatrix q = qr.thin_q_dense();
  CHECK(std::abs(q.sum()) == doctest::Approx(2.0));
  CHECK((q.cwiseAbs().array() - 0.5).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("QR of orthonormal columns") {
  const SparseMatrix l = linalg::from_triplets(3, 2, {{0, 0, 1}, {2, 1, 1}});
  const linalg::ThinQR qr{linalg::SparseColMatrix(l)};
  const DenseMatrix r = DenseMatrix(qr.r());
  CHECK((r.cwiseAbs() - DenseMatrix::Identity(2, 2)).norm() <= 1e-14);
}

TEST_CASE("QR of a weighted incidence matrix") {
  const auto m = mesh::generate_initial_mesh({mesh::DomainShape::UnitSquare, 0.05});
  const auto inc = whitney::assemble_incidence(m);
  Vector d = testing::random_vector(inc.interior.rows(), 8).array().abs() + 0.1;
  const linalg::SparseColMatrix lt = d.cwiseInverse().cwiseSqrt().asDiagonal() * inc.interior;
  const linalg::ThinQR qr(lt);

  // Reconstruct L_theta column by column: L_theta e_j = Q1 R_full e_j.
  const DenseMatrix dense_l(lt);
  double rec = 0.0, orth = 0.0;
  for (Eigen::Index j = 0; j < lt.cols(); j += 7) {
    const Vector ej = Vector::Unit(lt.cols(), j);
    // R_full e_j = R P^T e_j: solve_r inverts it, so apply R directly.
    Vector pej(lt.cols());
    for (Eigen::Index k = 0; k < lt.cols(); ++k) pej(k) = ej(qr.permutation()[k]);
    const Vector col = qr.apply_q(DenseMatrix(qr.r()).triangularView<Eigen::Upper>() * pej);
    rec = std::max(rec, (col - dense_l.col(j)).lpNorm<Eigen::Infinity>());
    const Vector qe = qr.apply_q(ej);
    orth = std::max(orth, std::abs(qe.norm() - 1.0));
    orth = std::max(orth, (qr.apply_qt(qe) - ej).lpNorm<Eigen::Infinity>());
  }
  CHECK(rec <= 1e-10 * dense_l.cwiseAbs().maxCoeff());
  CHECK(orth <= 1e-10);

  const Vector u = testing::random_vector(lt.cols(), 9);
  const Vector z = lt * u;
  CHECK((qr.solve(z) - u).norm() <= 1e-10 * u.norm());
}

TEST_CASE("QR orthogonality on a small dense check") {
  const auto m = mesh::generate_initial_mesh({mesh::DomainShape::UnitDisc, 0.3});
  const auto inc = whitney::assemble_incidence(m);
  const linalg::ThinQR qr{linalg::SparseColMatrix(inc.interior)};
  const DenseMatrix q = qr.thin_q_dense();
  CHECK((q.transpose() * q - DenseMatrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("QR rejects rank deficiency") {
  const SparseMatrix l = linalg::from_triplets(3, 2, {{0, 0, 1}, {1, 0, 1}, {0, 1, 2}, {1, 1, 2}});
  CHECK_THROWS_AS(linalg::ThinQR{linalg::SparseColMatrix(l)}, NumericalError);
}

TEST_CASE("CGLS on the identity stops by discrepancy") {
  const DenseMatrix a = DenseMatrix::Identity(2, 2);
  const Vector b(Eigen::Vector2d(1, 2));
  linalg::CglsOptions opt;
  opt.discrepancy = 2.0;
  const auto res = run_dense(a, b, opt);
  CHECK(res.iterations == 1);
  CHECK(res.reason == linalg::StopReason::Discrepancy);
  CHECK((res.w - b).norm() <= 1e-14);
}

TEST_CASE("CGLS with zero data returns zero immediately") {
  linalg::CglsOptions opt;
  opt.discrepancy = 2.0;
  const auto res = run_dense(DenseMatrix::Identity(2, 2), Vector::Zero(2), opt);
  CHECK(res.iterations == 0);
  CHECK(res.w.norm() == 0.0);
  CHECK(res.reason == linalg::StopReason::Discrepancy);
}

TEST_CASE("CGLS early stopping returns the first objective minimum") {
  const DenseMatrix a = testing::random_vector(24, 21).reshaped(6, 4);
  const Vector b = testing::random_vector(6, 22);
  linalg::CglsOptions opt;
  opt.discrepancy = 1e-12;
  const auto res = run_dense(a, b, opt);
  auto objective = [&](const Vector& w) { return (b - a * w).squaredNorm() + w.squaredNorm(); };
  const auto k = static_cast<std::size_t>(res.solution_index);
  CHECK(objective(res.w) == doctest::Approx(res.objective[k]).epsilon(1e-10));
  for (std::size_t j = 1; j <= k; ++j) CHECK(res.objective[j] <= res.objective[j - 1]);
  if (res.reason == linalg::StopReason::ObjectiveIncrease) CHECK(res.objective[k + 1] > res.objective[k]);
  // Never worse than the starting point, and bounded below by the Tikhonov optimum.
  const Vector w_opt = (a.transpose() * a + DenseMatrix::Identity(4, 4)).ldlt().solve(a.transpose() * b);
  CHECK(objective(res.w) <= b.squaredNorm());
  CHECK(objective(res.w) >= objective(w_opt) * (1.0 - 1e-12));
}

TEST_CASE("CGLS residuals never increase and the previous iterate is returned") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const DenseMatrix a = testing::random_vector(30 * 12, 100 + seed).reshaped(30, 12);
    const Vector b = 3.0 * testing::random_vector(30, 200 + seed);
    linalg::CglsOptions opt;
    opt.discrepancy = 0.5;
    const auto res = run_dense(a, b, opt);
    for (std::size_t k = 1; k < res.residual_norms.size(); ++k) {
      CHECK(res.residual_norms[k] <= res.residual_norms[k - 1] * (1.0 + 1e-12));
    }
    const double rr = (b - a * res.w).squaredNorm();
    if (res.reason == linalg::StopReason::Discrepancy) CHECK(rr < opt.discrepancy);
    if (res.reason == linalg::StopReason::ObjectiveIncrease) {
      CHECK(res.solution_index == res.iterations - 1);
      CHECK(res.objective[res.iterations] > res.objective[res.iterations - 1]);
    }
    CHECK(rr == doctest::Approx(res.residual_norms[res.solution_index] * res.residual_norms[res.solution_index]).epsilon(1e-9));
  }
}

TEST_CASE("CGLS iterates stay in the range of the transpose") {
  const DenseMatrix q = testing::random_vector(10 * 4, 31).reshaped(10, 4).householderQr().householderQ() *
                        DenseMatrix::Identity(10, 4);
  const DenseMatrix a = testing::random_vector(8 * 4, 32).reshaped(8, 4) * q.transpose();
  const Vector b = testing::random_vector(8, 33);
  linalg::CglsOptions opt;
  opt.stop_on_objective_increase = false;
  opt.max_iterations = 3;
  const auto res = run_dense(a, b, opt);
  CHECK((res.w - q * (q.transpose() * res.w)).norm() <= 1e-8 * res.w.norm());
}

TEST_CASE("CGLS reports non-finite values") {
  const DenseMatrix a = DenseMatrix::Identity(2, 2);
  Vector b(2);
  b << std::numeric_limits<double>::quiet_NaN(), 1.0;
  linalg::CglsOptions opt;
  opt.discrepancy = -1.0;
  CHECK_THROWS_AS(run_dense(a, b, opt), NumericalError);
}

TEST_CASE("CGLS rejects a zero iteration budget") {
  linalg::CglsOptions opt;
  opt.max_iterations = 0;
  CHECK_THROWS_AS(run_dense(DenseMatrix::Identity(2, 2), Vector::Ones(2), opt), InvalidArgument);
}

}  // TEST_SUITE
