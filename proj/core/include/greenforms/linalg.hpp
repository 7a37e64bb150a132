#pragma once

#include <functional>
#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace greenforms {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Sparse Cholesky (CHOLMOD) of a symmetric positive definite matrix.
class SpdSolver {
 public:
  explicit SpdSolver(const SpMat& a);
  ~SpdSolver();
  SpdSolver(const SpdSolver&) = delete;
  SpdSolver& operator=(const SpdSolver&) = delete;

  Vec solve(const Vec& b) const;
  Mat solve(const Mat& b) const;
  int size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

// Sparse LU (UMFPACK) for square, possibly indefinite matrices.
class LuSolver {
 public:
  explicit LuSolver(const SpMat& a);
  ~LuSolver();
  LuSolver(const LuSolver&) = delete;
  LuSolver& operator=(const LuSolver&) = delete;

  Vec solve(const Vec& b) const;
  int size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

struct EigenPairs {
  Vec values;
  Mat vectors;  // M-orthonormal columns
};

// Lowest `count` eigenpairs of S x = lambda M x by block inverse subspace
// iteration. `inverse` applies (S + s M)^{-1} for some small shift s.
EigenPairs lowest_eigenpairs(const std::function<Vec(const Vec&)>& apply_s,
                             const std::function<Vec(const Vec&)>& inverse, const SpMat& mass, int count,
                             std::uint64_t seed, int max_iterations = 200, double tolerance = 1e-10);

// keep only entries with |a_ij| > tol
SpMat pruned(const SpMat& a, double tol = 0.0);

}  // namespace greenforms
