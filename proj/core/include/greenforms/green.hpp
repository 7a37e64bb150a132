#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "greenforms/dec.hpp"

namespace greenforms {

// Columns of the discrete Dirichlet Green operator. Column (s, a) solves
// S g = e_(s,a): the unit load is the mass-normalized delta, so G = S^{-1}
// and g approximates the continuous kernel at the degrees of freedom.
struct GreenKernel {
  int degree = 0;
  int rank = 1;
  std::vector<int> sources;  // source p-simplices; each owns `rank` consecutive columns
  Mat columns;               // full cochain coordinates x (sources * rank)
  std::string normalization = "unit load: S g = e_s (delta_s = M^{-1} e_s)";
  double max_residual = 0.0; // max |S g - e_s| / |e_s|
};

GreenKernel green_columns(const HodgeLaplacian& dirichlet, const std::vector<int>& sources);

// Euclidean distance to the boundary complex: minimum over boundary
// hyperplanes for convex meshes, brute force over boundary facets otherwise.
// Infinite on closed meshes.
std::vector<double> boundary_distance(const SimplicialMesh& mesh, const std::vector<Point>& points);

// Interior p-simplices with boundary distance >= min_delta, picked at evenly
// spaced quantiles of that distance.
std::vector<int> stratified_sources(const SimplicialMesh& mesh, int p, int count, double min_delta);

enum class DecayMode { kernel, kernel_boundary_weighted, derivative };
DecayMode parse_decay_mode(const std::string& name);
std::string decay_mode_name(DecayMode mode);

struct DecayOptions {
  double cutoff_widths = 2.0;     // pairs closer than this many mesh widths are dropped
  double interior_factor = 1.5;   // kernel-mode fit keeps min(delta_x, delta_y) >= factor * d
  double bin_width = 0.1;         // in ln d
  double bin_quantile = 0.5;      // per-bin statistic of ln|G| fitted against ln d
  int min_bin_samples = 3;
  int min_bins = 4;
  int min_sources = 8;
};

struct DecayReport {
  DecayMode mode = DecayMode::kernel;
  int degree = 0;
  int dim = 0;
  double mesh_width = 0.0;
  int pairs_sampled = 0;
  double fitted_slope = 0.0;        // NaN when no fit applies
  double empirical_constant = 0.0;  // max of |quantity| * weight over pairs
  double constant_d = 0.0;          // derivative mode: |d_y G| part
  double constant_dstar = 0.0;      // derivative mode: |d*_y G| part
  std::vector<double> bin_log_distance, bin_log_value;
};

// Pointwise magnitudes are Whitney values at top-simplex barycentres divided by
// the p-volume of the source simplex.
DecayReport decay_report(const GreenKernel& kernel, const HodgeLaplacian& dirichlet, DecayMode mode,
                         const DecayOptions& options = {});

struct LineFit {
  double slope = 0.0, intercept = 0.0;
  int points = 0;
};
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct RepresentationReport {
  bool full_boundary = false;  // boundary term included (p = 0, f not vanishing on the boundary)
  int sources = 0;
  double residual = 0.0;       // max |f_rec - f| over sources / max |f|
  std::vector<double> reconstructed, exact;
  double volume_term = 0.0, boundary_term = 0.0;  // max magnitudes over sources
};

// f(x_s) = sum_j G(x_j, x_s) (M Delta f)_j at each kernel source. When f does
// not vanish on the boundary and p = 0, `laplacian_values` (the continuous
// Delta f at vertices, zero for harmonic f) drives the volume term and the
// boundary term integrates f against -dG/dn with the trapezoid rule.
RepresentationReport integral_representation_check(const HodgeLaplacian& dirichlet, const GreenKernel& kernel,
                                                   const Cochain& f,
                                                   const std::optional<Vec>& laplacian_values = std::nullopt);

struct GradientOptions {
  int ensemble = 20;
  std::uint64_t seed = 1;
  double max_frequency = 0.0;  // 0: pi / r
};

struct GradientReport {
  double radius = 0.0;
  double mesh_width = 0.0;
  int interior_dofs = 0;
  std::vector<double> ratios;  // r * max(sup_{r/2}|df|, sup_{r/2}|d*f|) / sup_r |f|
  double max_ratio = 0.0;
};

// Discrete Delta_p-harmonic forms on the ball B(x0, r) with random boundary data.
GradientReport gradient_estimate_check(const SimplicialMesh& mesh, int p, const Point& center, double radius,
                                       const GradientOptions& options = {});
struct BallMesh {
  SimplicialMesh mesh;
  std::vector<int> parent_vertex;
  Point center;
  double radius = 0.0;
};
// top simplices whose barycentre lies within `radius` of `center`
BallMesh ball_submesh(const SimplicialMesh& mesh, const Point& center, double radius);
// boundary data given as full p-cochains on ball.mesh, one per ensemble member
GradientReport gradient_estimate_check(const BallMesh& ball, int p, const std::vector<Vec>& boundary_data,
                                       double mesh_width);

}  // namespace greenforms
