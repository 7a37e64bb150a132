#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "greenforms/linalg.hpp"

namespace greenforms {

using CVec = Eigen::VectorXcd;
using Weight = std::function<double(double x, double y)>;

// Square grid of spacing h over a box around the unit disk. Interior nodes
// are those with rho = x^2 + y^2 - 1 < 0.
struct PlanarDomain {
  double h = 0.0;
  int side = 0;         // nodes per axis
  double origin = 0.0;  // coordinate of node 0 on both axes
  std::vector<char> interior;
  Vec rho, phi;
  Vec laplace_phi;      // 5-point Laplacian, interior nodes only (0 elsewhere)
  double epsilon = 0.0; // min of laplace_phi over the interior

  int node(int i, int j) const { return j * side + i; }
  double x(int i) const { return origin + i * h; }
  std::complex<double> z(int node) const { return {x(node % side), x(node / side)}; }
};

// h = 1 / cells_per_unit. phi defaults to |z|^2. Throws DisconnectedInterior
// when the interior is not 4-connected.
PlanarDomain disk_domain(int cells_per_unit, const Weight& phi = {});

// Forward-difference dbar = (d_x + i d_y)/2 from u-nodes (interior nodes and
// their +x, +y neighbours) to f-nodes (interior nodes), as real 2x2 blocks.
struct DbarSystem {
  const PlanarDomain* domain = nullptr;
  std::vector<int> f_nodes, u_nodes;
  SpMat dbar;       // 2|f| x 2|u|, rows (re, im) per node
  SpMat del;        // same stencil for (d_x - i d_y)/2
  Vec weight_f;     // e^{-phi} h^2 per f-node
  Vec weight_u;     // e^{-phi} h^2 per u-node
  Vec a;            // laplace_phi / 4 per f-node

  CVec apply(const CVec& u) const;          // dbar u
  CVec adjoint(const CVec& v) const;        // weighted adjoint of dbar
  CVec del_adjoint(const CVec& v) const;    // unweighted adjoint of del
  double norm2_f(const CVec& f) const;      // weighted
  double norm2_u(const CVec& u) const;      // weighted
};

DbarSystem build_system(const PlanarDomain& domain);

// Restriction of a function to the f- or u-nodes.
CVec sample_f(const DbarSystem& system, const std::function<std::complex<double>(std::complex<double>)>& g);
CVec sample_u(const DbarSystem& system, const std::function<std::complex<double>(std::complex<double>)>& g);

// Weighted-minimal solution of dbar u = f through (D W^-1 D^T) lambda = f.
class MinimalSolver {
 public:
  explicit MinimalSolver(const DbarSystem& system);
  ~MinimalSolver();
  CVec solve(const CVec& f, double* residual = nullptr) const;

 private:
  const DbarSystem* system_;
  std::unique_ptr<SpdSolver> normal_;
};

// Random band-limited data sum_k c_k e^{i k.x}, |k_x|, |k_y| <= bandwidth.
std::vector<CVec> band_limited_ensemble(const DbarSystem& system, int size, std::uint64_t seed, int bandwidth = 1);

std::vector<double> default_delta_grid();  // 81 points, log-spaced over [1e-6, 1e2]

struct ImprovedSample {
  double f2 = 0.0, nf = 0.0, u2 = 0.0;
  double delta_star = 0.0;  // exact largest delta for this sample
  double delta_hat = 0.0;   // largest grid point <= delta_star, 0 below the grid
};

struct ImprovedReport {
  double h = 0.0;
  double epsilon = 0.0;
  std::vector<ImprovedSample> samples;
  double min_delta_hat = 0.0;
  double max_baseline_ratio = 0.0;  // max |u|^2 / N_f
  double max_residual = 0.0;
};

// Throws BaselineViolated when |u|^2 > N_f for some sample.
ImprovedReport improved_estimate_check(const DbarSystem& system, const std::vector<CVec>& ensemble,
                                       const std::vector<double>& delta_grid = default_delta_grid());

struct L2SobolevReport {
  double h = 0.0;
  int samples = 0;
  double delta_hat = 0.0;  // min (|del* f| + |f|_bd) / |f|
  std::vector<double> ratios;
};

// Unweighted: del* is evaluated only at u-nodes whose adjoint stencil lies in
// the interior; the boundary norm sums h |f|^2 over staircase boundary nodes.
L2SobolevReport l2_sobolev_check(const DbarSystem& system, const std::vector<CVec>& ensemble);

struct MonotonicityReport {
  std::vector<double> delta_hat, delta_hat_doubled;
  double grid_step = 0.0;  // ratio between neighbouring grid points
  int violations = 0;      // samples with doubled < original / grid_step
  bool holds() const { return violations == 0; }
};

// Compares per-sample delta-hat for the weights phi and 2 phi on the same
// grid and data.
MonotonicityReport monotonicity_check(int cells_per_unit, const Weight& phi, int ensemble, std::uint64_t seed);

}  // namespace greenforms
