#include "greenforms/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/CholmodSupport>
#include <Eigen/Dense>
#include <Eigen/UmfPackSupport>

#include "greenforms/errors.hpp"
#include "greenforms/rng.hpp"

namespace greenforms {

struct SpdSolver::Impl {
  Eigen::CholmodDecomposition<SpMat, Eigen::Lower> llt;
};

SpdSolver::SpdSolver(const SpMat& a) : impl_(std::make_unique<Impl>()), n_(static_cast<int>(a.rows())) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "Cholesky needs a square matrix");
  if (n_ == 0) return;
  impl_->llt.setMode(Eigen::CholmodSupernodalLLt);
  impl_->llt.compute(a);
  if (impl_->llt.info() != Eigen::Success) throw Error(ErrorCode::SingularOperator, "Cholesky factorization failed");
}

SpdSolver::~SpdSolver() = default;

Vec SpdSolver::solve(const Vec& b) const {
  if (n_ == 0) return Vec();
  Vec x = impl_->llt.solve(b);
  return x;
}

Mat SpdSolver::solve(const Mat& b) const {
  if (n_ == 0) return Mat(0, b.cols());
  Mat x = impl_->llt.solve(b);
  return x;
}

struct LuSolver::Impl {
  SpMat a;  // UMFPACK reads the matrix again during solves
  Eigen::UmfPackLU<SpMat> lu;
};

LuSolver::LuSolver(const SpMat& a) : impl_(std::make_unique<Impl>()), n_(static_cast<int>(a.rows())) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "LU needs a square matrix");
  if (n_ == 0) return;
  impl_->a = a;
  impl_->a.makeCompressed();
  impl_->lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
  impl_->lu.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
  impl_->lu.compute(impl_->a);
  if (impl_->lu.info() != Eigen::Success) throw Error(ErrorCode::SingularOperator, "LU factorization failed");
}

LuSolver::~LuSolver() = default;

Vec LuSolver::solve(const Vec& b) const {
  if (n_ == 0) return Vec();
  Vec x = impl_->lu.solve(b);
  if (!x.allFinite()) throw Error(ErrorCode::SingularOperator, "LU solve produced non-finite values");
  return x;
}

namespace {

// M-orthonormalize the columns of x in place (two passes of Cholesky QR)
void mass_orthonormalize(Mat& x, const SpMat& mass) {
  for (int pass = 0; pass < 2; ++pass) {
    Mat g = x.transpose() * (mass * x);
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Mat> es(g);
      const Vec d = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      x = x * es.eigenvectors() * d.asDiagonal();
      continue;
    }
    Mat linv = llt.matrixL().solve(Mat::Identity(g.rows(), g.cols()));
    x = x * linv.transpose();
  }
}

}  // namespace

EigenPairs lowest_eigenpairs(const std::function<Vec(const Vec&)>& apply_s,
                             const std::function<Vec(const Vec&)>& inverse, const SpMat& mass, int count,
                             std::uint64_t seed, int max_iterations, double tolerance) {
  const int n = static_cast<int>(mass.rows());
  EigenPairs out;
  if (n == 0 || count <= 0) {
    out.values.resize(0);
    out.vectors.resize(n, 0);
    return out;
  }
  const int block = std::min(n, count + std::max(4, count / 2));
  count = std::min(count, n);
  Rng rng(seed);
  Mat x(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = rng.normal();
  mass_orthonormalize(x, mass);

  Vec prev = Vec::Constant(count, std::numeric_limits<double>::infinity());
  Vec values;
  for (int it = 0; it < max_iterations; ++it) {
    Mat mx = mass * x;
    for (int j = 0; j < block; ++j) x.col(j) = inverse(mx.col(j));
    mass_orthonormalize(x, mass);
    Mat sx(n, block);
    for (int j = 0; j < block; ++j) sx.col(j) = apply_s(x.col(j));
    Mat a = x.transpose() * sx;
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    x = x * es.eigenvectors();
    values = es.eigenvalues();
    const double scale = std::max(1.0, values.head(count).cwiseAbs().maxCoeff());
    const double change = (values.head(count) - prev).cwiseAbs().maxCoeff() / scale;
    prev = values.head(count);
    if (it > 1 && change < tolerance) break;
  }
  out.values = values.head(count);
  out.vectors = x.leftCols(count);
  return out;
}

SpMat pruned(const SpMat& a, double tol) {
  SpMat b = a;
  b.prune([tol](Eigen::Index, Eigen::Index, double v) { return std::abs(v) > tol; });
  return b;
}

}  // namespace greenforms
