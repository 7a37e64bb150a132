#pragma once

#include <cstdint>
#include <memory>

#include "greenforms/dec.hpp"
#include "greenforms/errors.hpp"
#include "greenforms/linalg.hpp"

namespace greenforms {

// Kernel of a boundary-restricted Hodge Laplacian. Columns of `basis` are
// mass-orthonormal, in free-dof coordinates of the Laplacian's DofMap;
// `full` holds the same vectors extended by zero to all p-simplices.
struct HarmonicSpace {
  int degree = 0;
  BoundaryCondition bc = BoundaryCondition::neumann;
  Mat basis;
  Mat full;
  Vec eigenvalues;  // Rayleigh quotients of the basis, for diagnostics
  double gap = 0.0; // first eigenvalue above the kernel

  int dimension() const { return static_cast<int>(basis.cols()); }
};

HarmonicSpace harmonic_space(const HodgeLaplacian& laplacian, std::uint64_t seed = 0x6a09e667f3bcc908ULL);

// Potential solver: Delta phi = f (Galerkin, boundary condition of the
// Laplacian) with phi orthogonal to the harmonic space.
class PotentialSolver {
 public:
  explicit PotentialSolver(const HodgeLaplacian& laplacian);

  const HodgeLaplacian& laplacian() const { return *lap_; }
  const HarmonicSpace& harmonic() const { return harmonic_; }

  // f is a full cochain; the result is a full cochain vanishing on constrained dofs
  Vec potential(const Vec& f, bool project = false) const;
  // solves S x = load on free dofs (load must be orthogonal to the kernel)
  Vec solve_load(const Vec& load) const;

  // mass-orthogonal projection of a full cochain onto the harmonic space
  Vec harmonic_part(const Vec& f) const;
  // relative size of the harmonic component of a full cochain
  double harmonic_fraction(const Vec& f) const;

 private:
  const HodgeLaplacian* lap_;
  HarmonicSpace harmonic_;
  std::shared_ptr<const ShiftedSolver> solver_;
  double shift_ = 0.0;
};

struct SolveReport {
  double residual = 0.0;         // |du - f| / |f| in the mass norm
  double q = 2.0, k = 2.0;
  double norm_ratio = 0.0;       // |u|_q / |f|_k
  double obstruction_norm = 0.0; // |P_N g|, harmonic part blocking exactness
  double orthogonality = 0.0;    // |P_{H_N^{p-1}} u| / |u|
};

// ObstructionNonExact with the report of the failed solve attached
class ObstructionError : public Error {
 public:
  ObstructionError(SolveReport report, const std::string& what)
      : Error(ErrorCode::ObstructionNonExact, what), report_(report) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

struct SolveResult {
  Cochain u;
  SolveReport report;
};

// Everything needed to solve du = f on degree p >= 1: the Dirichlet and
// Neumann Laplacians of degree p and the Neumann one of degree p-1.
class DSolver {
 public:
  DSolver(const SimplicialMesh& mesh, int p, const FlatBundle& bundle);

  int degree() const { return p_; }
  const PotentialSolver& dirichlet() const { return *dir_; }
  const PotentialSolver& neumann() const { return *neu_; }
  const HarmonicSpace& lower_harmonic() const { return lower_harmonic_; }
  const SpMat& mass() const { return neu_lap_->mass_full(); }
  const SpMat& mass_lower() const { return lower_mass_; }
  const SpMat& derivative() const { return d_; }  // full d_{p-1}

  // u = d*(psi_g + phi_{f2}), projected off ker d_{p-1}. Throws NotClosed when
  // df != 0 and ObstructionNonExact when the result misses f.
  SolveResult solve(const Cochain& f, double q = 2.0, double k = 2.0) const;

 private:
  const SimplicialMesh* mesh_;
  const FlatBundle* bundle_;
  int p_;
  std::unique_ptr<HodgeLaplacian> dir_lap_, neu_lap_, lower_lap_, lower2_lap_;
  std::unique_ptr<PotentialSolver> dir_, neu_, lower2_;
  HarmonicSpace lower_harmonic_;
  SpMat d_, d_prev_, d_next_, lower_mass_;
  std::unique_ptr<WhitneyEvaluator> eval_, eval_lower_;
};

struct HodgeDecomposition {
  Vec exact;      // d a
  Vec coexact;    // d* b
  Vec harmonic;   // h
  Vec a, b;       // potentials: a of degree p-1, b of degree p+1 (full cochains)
  double reconstruction = 0.0;  // |f - (da + d*b + h)| / |f|
  double max_cross = 0.0;       // largest normalized mutual inner product
};

// Discrete Delta_p-harmonic extension of boundary values: u equals the data on
// boundary p-simplices and satisfies <du, dv> + <sigma, d v> = 0 for interior
// test forms v, with sigma = d*u taken weakly (natural condition) on all of
// degree p-1. Trivial bundle.
class HarmonicExtension {
 public:
  HarmonicExtension(const SimplicialMesh& mesh, int p);
  ~HarmonicExtension();

  const HodgeLaplacian& laplacian() const { return *lap_; }
  int interior_dofs() const { return static_cast<int>(inner_.size()); }
  // data: full p-cochain, only boundary entries are read. sigma (p >= 1) receives d*u.
  Vec extend(const Vec& data, Vec* sigma = nullptr) const;

 private:
  const SimplicialMesh* mesh_;
  int p_;
  FlatBundle trivial_;
  std::unique_ptr<HodgeLaplacian> lap_;
  std::vector<int> inner_, outer_;
  SpMat pi_, pb_, c_ib_, b_b_;
  int n_lo_ = 0;
  std::unique_ptr<SpdSolver> chol_;
  std::unique_ptr<LuSolver> lu_;
};

// f = d a + d* b + h via the Neumann potential psi: a = d* psi, b = d psi.
HodgeDecomposition hodge_decomposition(const PotentialSolver& neumann, const Vec& f);

}  // namespace greenforms
