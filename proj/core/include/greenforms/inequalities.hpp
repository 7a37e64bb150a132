#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "greenforms/bundle.hpp"
#include "greenforms/dec.hpp"

namespace greenforms {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ExponentTuple {
  double q = 2.0, k = 2.0, r = kInf, s = kInf;
  int n = 2;
};

// throws InvalidExponent unless every entry is >= 1 (or infinite) and n is 2 or 3
void validate(const ExponentTuple& t);

enum class Admissibility { cor_laplace, cor_gradient, thm_lqp };
Admissibility parse_admissibility(const std::string& name);
std::string admissibility_name(Admissibility which);

// Case tables of the Sobolev-type estimates, endpoints included or excluded
// exactly as stated. cor_laplace reads (q, k, r), cor_gradient (q, k, r, s),
// thm_lqp (q, k).
bool admissible(const ExponentTuple& t, Admissibility which);

enum class SobolevMode { laplace, gradient, max_laplace, max_gradient, harmonic_max };
SobolevMode parse_sobolev_mode(const std::string& name);
std::string sobolev_mode_name(SobolevMode mode);

struct ExperimentConfig {
  MeshSpec mesh;
  int degree = 0;
  int rank = 1;
  BundleSpec bundle;
  int ensemble = 50;
  std::uint64_t seed = 1;
  ExponentTuple exponents;
  std::string curvature_assumption = "flat";
  bool normalize_volume = false;  // mean norms: divide by |M|^{1/q}, |dM|^{1/q}
};

// Strong derivatives and norms of full p-cochains. d* and Delta are tested
// against forms vanishing on the boundary only, so boundary fluxes do not
// leak into them; their boundary entries are filled from interior neighbours.
class SobolevProblem {
 public:
  SobolevProblem(const SimplicialMesh& mesh, int p, const FlatBundle& bundle);
  ~SobolevProblem();

  const SimplicialMesh& mesh() const { return *mesh_; }
  const FlatBundle& bundle() const { return *bundle_; }
  int degree() const { return p_; }
  const HodgeLaplacian& neumann() const { return *lap_; }

  Vec derivative(const Vec& f) const;      // degree p+1
  Vec codifferential(const Vec& f) const;  // degree p-1
  Vec laplacian(const Vec& f) const;       // degree p

  // L^q norm over M of a full cochain of the given degree
  double norm(const Vec& f, int degree, double q, bool normalize = false) const;
  // L^q norm over the boundary of a full p-cochain
  double boundary_norm(const Vec& f, double q, bool normalize = false) const;

 private:
  struct Impl;
  const SimplicialMesh* mesh_;
  const FlatBundle* bundle_;
  int p_;
  std::unique_ptr<HodgeLaplacian> lap_;
  std::unique_ptr<Impl> impl_;
};

// Combinations of the lowest Dirichlet eigenvectors mixed with smooth random
// boundary lifts, each member of unit mass norm.
std::vector<Vec> sobolev_ensemble(const SobolevProblem& problem, int size, std::uint64_t seed, int eigenvectors = 20);

struct SobolevReport {
  SobolevMode mode = SobolevMode::laplace;
  ExponentTuple exponents;
  int degree = 0;
  int resolution = 0;
  double mesh_width = 0.0;
  int samples = 0;  // members with a nonzero left-hand side
  // laplace, gradient: min RHS/LHS. max_*: smallest constant making the
  // estimate hold on every member. harmonic_max: max sup_M|h| / sup_dM|h|.
  double delta_hat = 0.0;
  std::vector<double> ratios;
  bool passed = false;
};

SobolevReport sobolev_check(const SobolevProblem& problem, const std::vector<Vec>& ensemble, SobolevMode mode,
                            const ExponentTuple& exponents, bool normalize_volume = false);
SobolevReport sobolev_check(const ExperimentConfig& config, SobolevMode mode);

inline constexpr double kHarmonicMaxSlack = 1.05;

}  // namespace greenforms
