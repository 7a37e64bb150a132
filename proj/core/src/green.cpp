#include "greenforms/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <tuple>

#include <Eigen/Dense>

#include "greenforms/errors.hpp"
#include "greenforms/forms.hpp"
#include "greenforms/hodge.hpp"
#include "greenforms/rng.hpp"

namespace greenforms {

GreenKernel green_columns(const HodgeLaplacian& lap, const std::vector<int>& sources) {
  if (lap.bc() != BoundaryCondition::dirichlet || lap.mesh().boundary_volume() == 0.0)
    throw Error(ErrorCode::SingularOperator, "Green columns need the Dirichlet Laplacian of a mesh with boundary");
  const int r = lap.rank();
  GreenKernel k;
  k.degree = lap.degree();
  k.rank = r;
  k.sources = sources;
  const DofMap& dofs = lap.dofs();
  k.columns.resize(dofs.full_size(), static_cast<Eigen::Index>(sources.size()) * r);
  const auto solver = lap.factor(0.0);
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (int a = 0; a < r; ++a) {
      const int local = dofs.local(sources[i] * r + a);
      if (local < 0) throw Error(ErrorCode::InvalidParams, "Green source on a constrained simplex");
      Vec e = Vec::Zero(dofs.size());
      e[local] = 1.0;
      const Vec g = solver->solve(e);
      const double res = (lap.apply_stiffness(g) - e).norm();
      if (!std::isfinite(res) || res > 1e-8)
        throw Error(ErrorCode::SingularOperator, "Green column residual " + std::to_string(res));
      k.max_residual = std::max(k.max_residual, res);
      k.columns.col(static_cast<Eigen::Index>(i) * r + a) = dofs.extend(g);
    }
  return k;
}

namespace {

struct Plane {
  Eigen::Vector3d normal;  // outward, unit
  double offset;           // normal . x <= offset inside
};

// outward unit normal of boundary facet f
Eigen::Vector3d facet_normal(const SimplicialMesh& mesh, int f) {
  const int n = mesh.dim();
  const int top = mesh.facet_tops(f)[0];
  const auto fs = mesh.faces(n, top);
  const int j = static_cast<int>(std::find(fs.begin(), fs.end(), f) - fs.begin());
  const auto pts = mesh.coordinates(n, top);
  std::vector<Eigen::Vector3d> basis;
  Eigen::Vector3d anchor = pts.col(j == 0 ? 1 : 0);
  for (int c = 0; c <= n; ++c) {
    if (c == j) continue;
    Eigen::Vector3d v = pts.col(c) - anchor;
    for (const auto& b : basis) v -= v.dot(b) * b;
    if (v.norm() > 1e-14) basis.push_back(v.normalized());
  }
  Eigen::Vector3d v = pts.col(j) - anchor;
  for (const auto& b : basis) v -= v.dot(b) * b;
  if (n == 2) v[2] = 0.0;
  return -v.normalized();
}

double segment_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - x).norm();
}

double triangle_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                         const Eigen::Vector3d& c) {
  const Eigen::Vector3d n = (b - a).cross(c - a);
  const double area2 = n.squaredNorm();
  const Eigen::Vector3d y = x - n * (x - a).dot(n) / area2;
  const double l0 = (b - y).cross(c - y).dot(n) / area2;
  const double l1 = (c - y).cross(a - y).dot(n) / area2;
  const double l2 = 1.0 - l0 - l1;
  if (l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0) return (x - y).norm();
  return std::min({segment_distance(x, a, b), segment_distance(x, b, c), segment_distance(x, c, a)});
}

double log_weight(double d) { return 1.0 + std::abs(std::log(d)); }

}  // namespace

std::vector<double> boundary_distance(const SimplicialMesh& mesh, const std::vector<Point>& points) {
  const int n = mesh.dim();
  std::vector<int> facets;
  for (int f = 0; f < mesh.count(n - 1); ++f)
    if (mesh.on_boundary(n - 1, f)) facets.push_back(f);
  std::vector<double> out(points.size(), std::numeric_limits<double>::infinity());
  if (facets.empty()) return out;

  std::map<std::tuple<long long, long long, long long, long long>, Plane> unique;
  for (int f : facets) {
    const Eigen::Vector3d nrm = facet_normal(mesh, f);
    const double off = nrm.dot(mesh.vertex(mesh.simplex(n - 1, f)[0]));
    auto key = std::make_tuple(std::llround(nrm[0] * 1e9), std::llround(nrm[1] * 1e9), std::llround(nrm[2] * 1e9),
                               std::llround(off * 1e9));
    unique.emplace(key, Plane{nrm, off});
  }
  double extent = 0.0;
  for (const auto& v : mesh.vertices()) extent = std::max(extent, v.norm());
  bool convex = true;
  for (const auto& [key, plane] : unique) {
    for (const auto& v : mesh.vertices())
      if (plane.normal.dot(v) - plane.offset > 1e-9 * (1.0 + extent)) {
        convex = false;
        break;
      }
    if (!convex) break;
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    if (convex) {
      for (const auto& [key, plane] : unique) best = std::min(best, plane.offset - plane.normal.dot(points[i]));
      best = std::max(best, 0.0);
    } else {
      for (int f : facets) {
        auto s = mesh.simplex(n - 1, f);
        const double d = n == 2 ? segment_distance(points[i], mesh.vertex(s[0]), mesh.vertex(s[1]))
                                : triangle_distance(points[i], mesh.vertex(s[0]), mesh.vertex(s[1]), mesh.vertex(s[2]));
        best = std::min(best, d);
      }
    }
    out[i] = best;
  }
  return out;
}

std::vector<int> stratified_sources(const SimplicialMesh& mesh, int p, int count, double min_delta) {
  std::vector<Point> centres;
  std::vector<int> candidates;
  for (int i = 0; i < mesh.count(p); ++i) {
    if (mesh.on_boundary(p, i)) continue;
    candidates.push_back(i);
    centres.push_back(mesh.barycenter(p, i));
  }
  const auto delta = boundary_distance(mesh, centres);
  std::vector<std::pair<double, int>> ranked;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (delta[i] >= min_delta) ranked.emplace_back(delta[i], candidates[i]);
  std::sort(ranked.begin(), ranked.end());
  std::vector<int> out;
  if (ranked.empty() || count <= 0) return out;
  for (int i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>((i + 0.5) / count * static_cast<double>(ranked.size()));
    const int s = ranked[std::min(idx, ranked.size() - 1)].second;
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

DecayMode parse_decay_mode(const std::string& name) {
  if (name == "kernel") return DecayMode::kernel;
  if (name == "kernel_boundary_weighted") return DecayMode::kernel_boundary_weighted;
  if (name == "derivative") return DecayMode::derivative;
  throw Error(ErrorCode::InvalidParams, "unknown decay mode '" + name + "'");
}

std::string decay_mode_name(DecayMode mode) {
  switch (mode) {
    case DecayMode::kernel: return "kernel";
    case DecayMode::kernel_boundary_weighted: return "kernel_boundary_weighted";
    case DecayMode::derivative: return "derivative";
  }
  return "?";
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit fit;
  fit.points = static_cast<int>(x.size());
  if (x.size() < 2) return fit;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

namespace {

// linear interpolation between order statistics of a sorted sample
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// per-bin (median ln d, quantile of ln value), then a least-squares line
void binned_fit(std::vector<std::pair<double, double>>& samples, const DecayOptions& opt, DecayReport& rep) {
  std::map<long long, std::vector<std::pair<double, double>>> bins;
  for (const auto& s : samples) bins[static_cast<long long>(std::floor(s.first / opt.bin_width))].push_back(s);
  for (auto& [key, v] : bins) {
    if (static_cast<int>(v.size()) < opt.min_bin_samples) continue;
    std::vector<double> vals, dists;
    for (const auto& s : v) {
      dists.push_back(s.first);
      vals.push_back(s.second);
    }
    std::sort(vals.begin(), vals.end());
    std::sort(dists.begin(), dists.end());
    rep.bin_log_distance.push_back(quantile(dists, 0.5));
    rep.bin_log_value.push_back(quantile(vals, opt.bin_quantile));
  }
  rep.fitted_slope = static_cast<int>(rep.bin_log_distance.size()) >= opt.min_bins
                         ? least_squares(rep.bin_log_distance, rep.bin_log_value).slope
                         : std::numeric_limits<double>::quiet_NaN();
}

// sqrt(sum_a |column_a|^2) / sqrt(rank) at every top barycentre
Vec block_norms(const WhitneyEvaluator& eval, const Mat& block) {
  Vec acc = Vec::Zero(0);
  for (Eigen::Index a = 0; a < block.cols(); ++a) {
    const Vec n = eval.interior_norms(block.col(a));
    if (acc.size() == 0) acc = Vec::Zero(n.size());
    acc += n.cwiseAbs2();
  }
  return (acc / static_cast<double>(block.cols())).cwiseSqrt();
}

}  // namespace

DecayReport decay_report(const GreenKernel& kernel, const HodgeLaplacian& lap, DecayMode mode,
                         const DecayOptions& opt) {
  const SimplicialMesh& mesh = lap.mesh();
  const int n = mesh.dim(), p = kernel.degree, r = kernel.rank;
  if (static_cast<int>(kernel.sources.size()) < opt.min_sources)
    throw Error(ErrorCode::InsufficientSamples, "decay report needs at least " + std::to_string(opt.min_sources) +
                                                    " sources");
  DecayReport rep;
  rep.mode = mode;
  rep.degree = p;
  rep.dim = n;
  rep.mesh_width = mesh.mesh_width();
  rep.fitted_slope = std::numeric_limits<double>::quiet_NaN();
  const double cutoff = opt.cutoff_widths * rep.mesh_width;

  std::vector<Point> tops, srcs;
  for (int t = 0; t < mesh.count(n); ++t) tops.push_back(mesh.barycenter(n, t));
  for (int s : kernel.sources) srcs.push_back(mesh.barycenter(p, s));
  const auto delta_t = boundary_distance(mesh, tops);
  const auto delta_s = boundary_distance(mesh, srcs);

  std::unique_ptr<WhitneyEvaluator> eval, eval_up, eval_down;
  SpMat d;
  if (mode == DecayMode::derivative) {
    if (p < n) {
      eval_up = std::make_unique<WhitneyEvaluator>(mesh, p + 1, lap.bundle());
      d = exterior_derivative(mesh, p, lap.bundle()).matrix;
    }
    if (p > 0) eval_down = std::make_unique<WhitneyEvaluator>(mesh, p - 1, lap.bundle());
  } else {
    eval = std::make_unique<WhitneyEvaluator>(mesh, p, lap.bundle());
  }

  // weight turning |quantity| into the bounded ratio of the estimate
  auto weight = [&](double dist, int t) {
    switch (mode) {
      case DecayMode::kernel: return n >= 3 ? std::pow(dist, n - 2) : 1.0 / log_weight(dist);
      case DecayMode::kernel_boundary_weighted:
        return (n >= 3 ? std::pow(dist, n - 1) : dist / log_weight(dist)) / delta_t[static_cast<std::size_t>(t)];
      case DecayMode::derivative: return n >= 3 ? std::pow(dist, n - 1) : dist / log_weight(dist);
    }
    return 0.0;
  };

  std::vector<std::pair<double, double>> fit_samples;
  for (std::size_t i = 0; i < kernel.sources.size(); ++i) {
    const Mat block = kernel.columns.middleCols(static_cast<Eigen::Index>(i) * r, r);
    const double ws = p == 0 ? 1.0 : mesh.volume(p, kernel.sources[i]);
    std::vector<Vec> fields;  // per quantity, pointwise magnitudes
    if (mode == DecayMode::derivative) {
      if (eval_up) {
        Mat db(d.rows(), r);
        for (int a = 0; a < r; ++a) db.col(a) = d * block.col(a);
        fields.push_back(block_norms(*eval_up, db) / ws);
      } else {
        fields.emplace_back(Vec::Zero(mesh.count(n)));
      }
      if (eval_down && lap.lower_dofs().size() > 0) {
        Mat sb(lap.lower_dofs().full_size(), r);
        for (int a = 0; a < r; ++a)
          sb.col(a) = lap.lower_dofs().extend(lap.codifferential(lap.dofs().restrict(block.col(a))));
        fields.push_back(block_norms(*eval_down, sb) / ws);
      }
    } else {
      fields.push_back(block_norms(*eval, block) / ws);
    }
    for (int t = 0; t < mesh.count(n); ++t) {
      const double dist = (tops[static_cast<std::size_t>(t)] - srcs[i]).norm();
      if (dist < cutoff) continue;
      ++rep.pairs_sampled;
      const double w = weight(dist, t);
      for (std::size_t q = 0; q < fields.size(); ++q) {
        const double v = fields[q][t];
        const double c = v * w;
        rep.empirical_constant = std::max(rep.empirical_constant, c);
        if (mode == DecayMode::derivative) {
          if (q == 0) rep.constant_d = std::max(rep.constant_d, c);
          else rep.constant_dstar = std::max(rep.constant_dstar, c);
        }
      }
      const bool deep = std::min(delta_t[static_cast<std::size_t>(t)], delta_s[i]) >= opt.interior_factor * dist;
      if (mode != DecayMode::kernel_boundary_weighted && deep && fields[0][t] > 0.0)
        fit_samples.emplace_back(std::log(dist), std::log(fields[0][t]));
    }
  }
  // n = 2 kernel mode is a log-ratio statistic only
  if (mode == DecayMode::derivative || (mode == DecayMode::kernel && n >= 3)) binned_fit(fit_samples, opt, rep);
  if (mode == DecayMode::kernel && n >= 3 && std::isnan(rep.fitted_slope))
    throw Error(ErrorCode::InsufficientSamples,
                "only " + std::to_string(rep.bin_log_distance.size()) + " populated distance bins for the slope fit");
  return rep;
}

RepresentationReport integral_representation_check(const HodgeLaplacian& lap, const GreenKernel& kernel,
                                                   const Cochain& f, const std::optional<Vec>& laplacian_values) {
  const SimplicialMesh& mesh = lap.mesh();
  const int p = kernel.degree, r = kernel.rank, n = mesh.dim();
  if (f.degree != p || f.rank != r || f.values.size() != kernel.columns.rows())
    throw Error(ErrorCode::ShapeMismatch, "representation: cochain does not match kernel");
  RepresentationReport rep;
  rep.sources = static_cast<int>(kernel.sources.size());
  const double fmax = f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0;

  double boundary_max = 0.0;
  for (int i = 0; i < mesh.count(p); ++i)
    if (mesh.on_boundary(p, i)) boundary_max = std::max(boundary_max, f.at(i).cwiseAbs().maxCoeff());
  const bool compact = boundary_max <= 1e-14 * fmax || fmax == 0.0;

  if (compact) {
    const Vec load = lap.apply_stiffness(lap.dofs().restrict(f.values));  // M Delta f
    const Vec full_load = lap.dofs().extend(load);
    for (std::size_t i = 0; i < kernel.sources.size(); ++i)
      for (int a = 0; a < r; ++a) {
        const Eigen::Index c = static_cast<Eigen::Index>(i) * r + a;
        const double rec = kernel.columns.col(c).dot(full_load);
        const double exact = f.values[kernel.sources[i] * r + a];
        rep.reconstructed.push_back(rec);
        rep.exact.push_back(exact);
        rep.volume_term = std::max(rep.volume_term, std::abs(rec));
        if (fmax > 0.0) rep.residual = std::max(rep.residual, std::abs(rec - exact) / fmax);
      }
    return rep;
  }
  if (p != 0 || r != 1)
    throw Error(ErrorCode::UnsupportedConfiguration, "boundary terms are only implemented for scalar 0-forms");

  rep.full_boundary = true;
  const Vec lapf = laplacian_values ? *laplacian_values : Vec::Zero(mesh.count(0));
  const Vec vol_load = lap.mass_full() * lapf;

  struct Facet {
    int top, opposite;
    double weight;  // facet volume * mean boundary value
  };
  std::vector<Facet> facets;
  std::vector<Mat> grads;
  for (int fct = 0; fct < mesh.count(n - 1); ++fct) {
    if (!mesh.on_boundary(n - 1, fct)) continue;
    const int t = mesh.facet_tops(fct)[0];
    const auto fs = mesh.faces(n, t);
    const int j = static_cast<int>(std::find(fs.begin(), fs.end(), fct) - fs.begin());
    double mean = 0.0;
    for (int v : mesh.simplex(n - 1, fct)) mean += f.values[v];
    mean /= n;
    facets.push_back({t, j, mesh.volume(n - 1, fct) * mean});
    grads.push_back(LocalWhitney(mesh, t, 0).gradients());
  }

  for (std::size_t i = 0; i < kernel.sources.size(); ++i) {
    const Vec g = kernel.columns.col(static_cast<Eigen::Index>(i));
    const double volume = g.dot(vol_load);
    double boundary = 0.0;
    for (std::size_t k = 0; k < facets.size(); ++k) {
      const auto verts = mesh.simplex(n, facets[k].top);
      Vec grad = Vec::Zero(n);
      for (int l = 0; l <= n; ++l) grad += g[verts[l]] * grads[k].row(l).transpose();
      const Vec lam = grads[k].row(facets[k].opposite).transpose();
      const double dgdn = -grad.dot(lam) / lam.norm();
      boundary -= facets[k].weight * dgdn;
    }
    const double rec = volume + boundary;
    const double exact = f.values[kernel.sources[i]];
    rep.reconstructed.push_back(rec);
    rep.exact.push_back(exact);
    rep.volume_term = std::max(rep.volume_term, std::abs(volume));
    rep.boundary_term = std::max(rep.boundary_term, std::abs(boundary));
    rep.residual = std::max(rep.residual, std::abs(rec - exact) / fmax);
  }
  return rep;
}

BallMesh ball_submesh(const SimplicialMesh& mesh, const Point& center, double radius) {
  const int n = mesh.dim();
  std::vector<char> keep(static_cast<std::size_t>(mesh.count(n)), 0);
  for (int t = 0; t < mesh.count(n); ++t) keep[static_cast<std::size_t>(t)] = (mesh.barycenter(n, t) - center).norm() < radius;
  SubMesh sub = submesh(mesh, keep);
  return {std::move(sub.mesh), std::move(sub.parent_vertex), center, radius};
}

GradientReport gradient_estimate_check(const SimplicialMesh& mesh, int p, const Point& center, double radius,
                                       const GradientOptions& options) {
  const double h = mesh.mesh_width();
  if (radius < 8.0 * h) throw Error(ErrorCode::BallTooSmall, "ball radius below 8 mesh widths");
  if (boundary_distance(mesh, {center})[0] < radius)
    throw Error(ErrorCode::BallTooSmall, "ball is not contained in the interior");
  BallMesh ball = ball_submesh(mesh, center, radius);
  Rng rng(options.seed);
  const double freq = options.max_frequency > 0.0 ? options.max_frequency : std::numbers::pi / radius;
  std::vector<Vec> data;
  for (int i = 0; i < options.ensemble; ++i) {
    Rng stream = rng.split(static_cast<std::uint64_t>(i));
    const FormField field = random_smooth_form(mesh.dim(), p, 1, stream, 6, freq);
    data.push_back(interpolate(ball.mesh, p, 1, field).values);
  }
  return gradient_estimate_check(ball, p, data, h);
}

GradientReport gradient_estimate_check(const BallMesh& ball, int p, const std::vector<Vec>& boundary_data,
                                       double mesh_width) {
  const SimplicialMesh& sub = ball.mesh;
  const int n = sub.dim();
  const HarmonicExtension ext(sub, p);
  const FlatBundle& trivial = ext.laplacian().bundle();

  GradientReport rep;
  rep.radius = ball.radius;
  rep.mesh_width = mesh_width;
  rep.interior_dofs = ext.interior_dofs();

  const WhitneyEvaluator eval(sub, p, trivial);
  std::unique_ptr<WhitneyEvaluator> eval_up, eval_down;
  if (p < n) eval_up = std::make_unique<WhitneyEvaluator>(sub, p + 1, trivial);
  if (p > 0) eval_down = std::make_unique<WhitneyEvaluator>(sub, p - 1, trivial);
  std::vector<char> half(static_cast<std::size_t>(sub.count(n)));
  for (int t = 0; t < sub.count(n); ++t)
    half[static_cast<std::size_t>(t)] = (sub.barycenter(n, t) - ball.center).norm() <= 0.5 * ball.radius;
  auto sup_half = [&](const Vec& norms) {
    double m = 0.0;
    for (int t = 0; t < sub.count(n); ++t)
      if (half[static_cast<std::size_t>(t)]) m = std::max(m, norms[t]);
    return m;
  };

  for (const Vec& data : boundary_data) {
    Vec sigma;
    const Vec u = ext.extend(data, &sigma);
    const Vec bn = eval.boundary_norms(u);
    const double sup = std::max(eval.interior_norms(u).maxCoeff(), bn.size() ? bn.maxCoeff() : 0.0);
    double grad = 0.0;
    if (eval_up) grad = std::max(grad, sup_half(eval_up->interior_norms(ext.laplacian().d_upper() * u)));
    if (eval_down) grad = std::max(grad, sup_half(eval_down->interior_norms(sigma)));
    const double ratio = sup > 0.0 ? ball.radius * grad / sup : 0.0;
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

}  // namespace greenforms
