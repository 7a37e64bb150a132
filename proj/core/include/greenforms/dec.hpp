#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "greenforms/bundle.hpp"
#include "greenforms/linalg.hpp"
#include "greenforms/mesh.hpp"

namespace greenforms {

enum class BoundaryCondition { dirichlet, neumann };

// One rank-r vector per p-simplex, stored simplex-major.
struct Cochain {
  int degree = 0;
  int rank = 1;
  Vec values;

  static Cochain zeros(const SimplicialMesh& mesh, int degree, int rank = 1);
  int simplex_count() const { return static_cast<int>(values.size()) / rank; }
  auto at(int simplex) { return values.segment(static_cast<Eigen::Index>(simplex) * rank, rank); }
  auto at(int simplex) const { return values.segment(static_cast<Eigen::Index>(simplex) * rank, rank); }
};

struct Signature {
  int degree = 0;
  int rank = 1;
  BoundaryCondition bc = BoundaryCondition::neumann;
  int size = 0;
};

struct OperatorMatrix {
  Signature rows;
  Signature cols;
  SpMat matrix;
};

// Free degrees of freedom of degree k under a boundary condition: every
// simplex for neumann, interior simplices only for dirichlet.
class DofMap {
 public:
  DofMap() = default;
  DofMap(const SimplicialMesh& mesh, int degree, int rank, BoundaryCondition bc);

  int degree() const { return degree_; }
  int rank() const { return rank_; }
  BoundaryCondition bc() const { return bc_; }
  int size() const { return static_cast<int>(free_.size()); }
  int full_size() const { return full_size_; }
  const std::vector<int>& free_dofs() const { return free_; }
  // -1 for constrained dofs
  int local(int full_dof) const { return to_local_[static_cast<std::size_t>(full_dof)]; }

  Vec restrict(const Vec& full) const;
  Vec extend(const Vec& local) const;
  Mat extend(const Mat& local) const;
  SpMat selector() const;  // size() x full_size()
  Signature signature() const { return {degree_, rank_, bc_, size()}; }

 private:
  int degree_ = 0;
  int rank_ = 1;
  BoundaryCondition bc_ = BoundaryCondition::neumann;
  int full_size_ = 0;
  std::vector<int> free_;
  std::vector<int> to_local_;
};

// Twisted coboundary d_p: degree p -> degree p+1 on all simplices.
OperatorMatrix exterior_derivative(const SimplicialMesh& mesh, int p, const FlatBundle& bundle);

// Whitney-form L2 Gram matrix. Off-diagonal blocks between simplices with
// different base vertices carry the transport that identifies their fibres.
OperatorMatrix mass_matrix(const SimplicialMesh& mesh, int p, const FlatBundle& bundle);
OperatorMatrix mass_matrix(const SimplicialMesh& mesh, int p, int rank);

OperatorMatrix restrict_operator(const OperatorMatrix& op, const DofMap& rows, const DofMap& cols);

// d* = M_p^{-1} d^T M_{p+1}; M_p^{-1} is dense, so the operator is kept factored.
class Codifferential {
 public:
  Codifferential(const OperatorMatrix& d, const OperatorMatrix& m_p, const OperatorMatrix& m_p1);

  Vec apply(const Vec& b) const;
  Mat to_dense() const;
  int rows() const { return static_cast<int>(dt_m_.rows()); }
  int cols() const { return static_cast<int>(dt_m_.cols()); }

 private:
  SpMat dt_m_;
  std::shared_ptr<SpdSolver> mass_;
};

Codifferential codifferential(const OperatorMatrix& d, const OperatorMatrix& m_p, const OperatorMatrix& m_p1);

// Solves (S + shift M) u = b on the free dofs of a Hodge Laplacian.
class ShiftedSolver {
 public:
  virtual ~ShiftedSolver() = default;
  virtual Vec solve(const Vec& b) const = 0;
};

// Hodge Laplacian on degree p with a boundary condition applied to the whole
// complex (degrees p-1, p, p+1). Vectors are in free-dof coordinates unless a
// method says otherwise. Holds references to the mesh and bundle.
//   S = M d_{p-1} M_{p-1}^{-1} d_{p-1}^T M + d_p^T M_{p+1} d_p,  Delta = M^{-1} S
class HodgeLaplacian {
 public:
  HodgeLaplacian(const SimplicialMesh& mesh, int p, const FlatBundle& bundle, BoundaryCondition bc);

  const SimplicialMesh& mesh() const { return *mesh_; }
  const FlatBundle& bundle() const { return *bundle_; }
  int degree() const { return p_; }
  int rank() const { return bundle_->rank(); }
  BoundaryCondition bc() const { return bc_; }

  const DofMap& dofs() const { return dofs_; }
  const DofMap& lower_dofs() const { return lower_; }
  const DofMap& upper_dofs() const { return upper_; }
  bool has_lower() const { return p_ > 0; }
  bool has_upper() const { return p_ < mesh_->dim(); }

  const SpMat& mass() const { return m_; }
  const SpMat& mass_full() const { return m_full_; }
  const SpMat& mass_lower() const { return m_lo_; }
  const SpMat& mass_upper() const { return m_hi_; }
  const SpMat& d_lower() const { return d_lo_; }
  const SpMat& d_upper() const { return d_hi_; }

  Vec apply_stiffness(const Vec& u) const;
  Vec apply(const Vec& u) const;  // M^{-1} S u
  Vec codifferential(const Vec& u) const;
  Vec derivative(const Vec& u) const;
  Vec solve_mass(const Vec& b) const;
  Mat dense_stiffness() const;
  // mean of diag(S)/diag(M): a spectral scale for tolerances
  double spectral_scale() const;

  std::shared_ptr<const ShiftedSolver> factor(double shift) const;

 private:
  const SimplicialMesh* mesh_;
  const FlatBundle* bundle_;
  int p_;
  BoundaryCondition bc_;
  DofMap lower_, dofs_, upper_;
  SpMat m_full_, m_, m_lo_, m_hi_, d_lo_, d_hi_, b_, c_;
  std::shared_ptr<SpdSolver> m_solver_, m_lo_solver_;
};

// Barycentric-coordinate gradients and Whitney basis evaluation on one top simplex.
class LocalWhitney {
 public:
  LocalWhitney(const SimplicialMesh& mesh, int top, int p);

  int face_count() const { return static_cast<int>(faces_.size()); }
  const std::vector<int>& face(int f) const { return faces_[static_cast<std::size_t>(f)]; }
  // global simplex index of local face f
  int global_face(int f) const { return global_[static_cast<std::size_t>(f)]; }
  // columns: basis forms at barycentric point lambda, rows: dx_I components
  Mat values(const Vec& lambda) const;
  Mat local_mass() const;
  double volume() const { return volume_; }
  // row j: gradient of the barycentric coordinate of local vertex j
  const Mat& gradients() const { return grads_; }

 private:
  int n_, p_;
  double volume_;
  Mat grads_;  // (n+1) x n
  std::vector<std::vector<int>> faces_;
  std::vector<int> global_;
  std::vector<Mat> wedge_;  // per face: components x (p+1) columns, one per removed vertex
};

// Evaluates the Whitney interpolant of full cochains at top-simplex
// barycentres and at boundary-facet barycentres.
class WhitneyEvaluator {
 public:
  WhitneyEvaluator(const SimplicialMesh& mesh, int p, const FlatBundle& bundle);

  int degree() const { return p_; }
  int components() const { return comps_; }
  // components x rank at the barycentre of a top simplex, in the frame of its first vertex
  Mat value(const Vec& full, int top) const;
  Vec interior_norms(const Vec& full) const;
  Vec boundary_norms(const Vec& full) const;
  const Vec& interior_weights() const { return vol_; }
  const Vec& boundary_weights() const { return bvol_; }
  const std::vector<int>& boundary_facets() const { return bfacets_; }

 private:
  struct Site {
    int top;
    std::vector<int> faces;
    std::vector<int> transport_edge;  // -1 for the identity
    Mat weights;  // components x faces
  };
  Mat evaluate(const Site& site, const Vec& full) const;

  const SimplicialMesh* mesh_;
  const FlatBundle* bundle_;
  int p_, comps_;
  std::vector<Site> interior_, boundary_;
  std::vector<int> bfacets_;
  Vec vol_, bvol_;
};

enum class NormDomain { interior, boundary };

double lq_norm(const Cochain& c, const SimplicialMesh& mesh, double q, NormDomain domain,
               const FlatBundle* bundle = nullptr);
// (sum w_i |v_i|^q)^{1/q}, or max |v_i| for q = inf
double weighted_lq(const Vec& pointwise, const Vec& weights, double q);

int binomial(int n, int k);
std::vector<std::vector<int>> combinations(int n, int k);

}  // namespace greenforms
