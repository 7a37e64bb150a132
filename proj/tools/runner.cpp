#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "greenforms/bundle.hpp"
#include "greenforms/dbar.hpp"
#include "greenforms/errors.hpp"
#include "greenforms/forms.hpp"
#include "greenforms/green.hpp"
#include "greenforms/hodge.hpp"
#include "greenforms/inequalities.hpp"
#include "greenforms/mesh.hpp"
#include "greenforms/mesh_io.hpp"
#include "greenforms/report.hpp"

#ifndef GREENFORMS_VERSION
#define GREENFORMS_VERSION "unknown"
#endif

namespace greenforms::cli {

namespace {

using Row = std::vector<Cell>;

Cell num(double v) { return v; }
Cell whole(long long v) { return v; }

std::string fmt(double v) { return format_number(v); }

struct Level {
  SimplicialMesh mesh;
  int resolution = 0;  // 0 for meshes read from a file
};

std::vector<Level> mesh_levels(const RunOptions& o) {
  const Config& c = o.config;
  std::vector<Level> out;
  if (c.has("mesh.file")) {
    const std::filesystem::path file = c.str("mesh.file", "");
    if (!std::filesystem::exists(file)) throw Error(ErrorCode::MissingInput, "mesh file " + file.string() + " not found");
    if (o.refinements > 0) throw Error(ErrorCode::ConfigParse, "refinements need a generated mesh, not mesh.file");
    out.push_back({load_mesh(file), 0});
    return out;
  }
  MeshSpec spec;
  try {
    spec.shape = parse_shape(c.str("mesh.shape", "disk"));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigParse, std::string("mesh.shape: ") + e.what());
  }
  spec.params = c.reals("mesh.params", {});
  if (spec.params.empty()) {
    switch (spec.shape) {
      case Shape::disk: spec.params = {1.0}; break;
      case Shape::annulus: spec.params = {0.5, 1.0}; break;
      case Shape::box3d: spec.params = {1.0, 1.0, 1.0}; break;
      case Shape::torus2d: spec.params = {1.0}; break;
    }
  }
  spec.resolution = c.integer("mesh.resolution", 16);
  for (int i = 0; i <= o.refinements; ++i) {
    MeshSpec s = spec;
    s.resolution = spec.resolution << i;
    out.push_back({generate_mesh(s), s.resolution});
  }
  return out;
}

BundleSpec bundle_spec(const Config& c, const std::string& section) {
  const std::string kind = c.str(section + ".bundle", "trivial");
  if (kind == "trivial") return BundleSpec::trivial();
  if (kind == "rotation") return BundleSpec::rotation(c.real(section + ".bundle_angle", 0.5));
  if (kind == "random_flat") return BundleSpec::random_flat(c.u64(section + ".bundle_seed", 7));
  throw Error(ErrorCode::ConfigParse, section + ".bundle: unknown kind '" + kind + "'");
}

// ratio of the larger to the smaller magnitude; inf when one side is zero
double spread(double a, double b) {
  a = std::abs(a);
  b = std::abs(b);
  if (a == 0.0 || b == 0.0) return a == b ? 1.0 : kInf;
  return std::max(a, b) / std::min(a, b);
}

void emit(const RunOptions& o, RunResult& r, const std::string& name, const Table& t) {
  emit_report(o.out_dir / name, ReportFormat::csv, t);
  r.outputs.push_back(name);
}

// --- mesh-gen -------------------------------------------------------------

void mesh_gen(const RunOptions& o, RunResult& r) {
  Table t({"claim", "shape", "resolution", "dim", "vertices", "edges", "faces", "tets", "euler", "mesh_width",
           "max_aspect", "file"});
  const auto levels = mesh_levels(o);
  const std::string shape = o.config.has("mesh.file") ? std::string("file") : o.config.str("mesh.shape", "disk");
  for (const auto& lv : levels) {
    const auto& m = lv.mesh;
    const std::string name = "mesh_" + shape + "_" + std::to_string(lv.resolution) + ".txt";
    save_mesh(o.out_dir / name, m);
    r.outputs.push_back(name);
    t.add({std::string("mesh"), shape, whole(lv.resolution), whole(m.dim()), whole(m.count(0)), whole(m.count(1)),
           whole(m.dim() >= 2 ? m.count(2) : 0), whole(m.dim() >= 3 ? m.count(3) : 0),
           whole(euler_characteristic(m)), num(m.mesh_width()), num(m.max_aspect_ratio()), name});
  }
  emit(o, r, "mesh.csv", t);
}

// --- green-decay ----------------------------------------------------------

std::string decay_claim(DecayMode m) {
  switch (m) {
    case DecayMode::kernel: return "kernel_decay";
    case DecayMode::kernel_boundary_weighted: return "boundary_weighted_decay";
    case DecayMode::derivative: return "derivative_decay";
  }
  return "decay";
}

void green_decay(const RunOptions& o, RunResult& r) {
  const Config& c = o.config;
  const std::string sec = "green-decay";
  const int p = c.integer(sec + ".degree", 0);
  DecayMode mode;
  try {
    mode = parse_decay_mode(c.str(sec + ".mode", "kernel"));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigParse, std::string(sec + ".mode: ") + e.what());
  }
  const int count = c.integer(sec + ".sources", 16);
  const double min_delta = c.real(sec + ".min_delta_widths", 2.0);
  DecayOptions opt;
  opt.cutoff_widths = c.real(sec + ".cutoff_widths", opt.cutoff_widths);
  opt.interior_factor = c.real(sec + ".interior_factor", opt.interior_factor);
  opt.bin_width = c.real(sec + ".bin_width", opt.bin_width);
  const double lo = c.real(sec + ".slope_min", -1.3), hi = c.real(sec + ".slope_max", -0.75);
  const double factor = c.real(sec + ".constant_factor", 2.0);
  const bool plot = c.flag(sec + ".plot", true);

  Table t({"claim", "mode", "degree", "resolution", "mesh_width", "sources", "pairs", "fitted_slope",
           "empirical_constant", "constant_d", "constant_dstar", "max_residual"});
  std::vector<DecayReport> reps;
  for (const auto& lv : mesh_levels(o)) {
    const FlatBundle b = FlatBundle::identity(1, lv.mesh.count(1));
    const HodgeLaplacian lap(lv.mesh, p, b, BoundaryCondition::dirichlet);
    const auto src = stratified_sources(lv.mesh, p, count, min_delta * lv.mesh.mesh_width());
    const GreenKernel k = green_columns(lap, src);
    DecayReport rep = decay_report(k, lap, mode, opt);
    t.add({decay_claim(mode), decay_mode_name(mode), whole(p), whole(lv.resolution), num(rep.mesh_width),
           whole(static_cast<long long>(src.size())), whole(rep.pairs_sampled), num(rep.fitted_slope),
           num(rep.empirical_constant), num(rep.constant_d), num(rep.constant_dstar), num(k.max_residual)});
    if (plot && mode == DecayMode::kernel && !rep.bin_log_distance.empty()) {
      LogLogPlot pl;
      pl.title = decay_claim(mode) + " p=" + std::to_string(p) + " res " + std::to_string(lv.resolution);
      pl.x = rep.bin_log_distance;
      pl.y = rep.bin_log_value;
      pl.slope = rep.fitted_slope;
      pl.intercept = least_squares(pl.x, pl.y).intercept;
      const std::string name = "decay_p" + std::to_string(p) + "_" + std::to_string(lv.resolution) + ".svg";
      Table bins({"ln_d", "ln_value"});
      for (std::size_t i = 0; i < pl.x.size(); ++i) bins.add({num(pl.x[i]), num(pl.y[i])});
      emit_report(o.out_dir / name, ReportFormat::svg_loglog, bins, &pl);
      r.outputs.push_back(name);
    }
    if (mode == DecayMode::kernel && !(rep.fitted_slope >= lo && rep.fitted_slope <= hi))
      r.failures.push_back("kernel slope " + fmt(rep.fitted_slope) + " at resolution " +
                           std::to_string(lv.resolution) + " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
    reps.push_back(std::move(rep));
  }
  emit(o, r, "green_decay.csv", t);

  for (std::size_t i = 1; i < reps.size(); ++i) {
    const auto& a = reps[i - 1];
    const auto& b = reps[i];
    if (mode == DecayMode::kernel) {
      if (std::abs(b.fitted_slope + 1.0) > std::abs(a.fitted_slope + 1.0))
        r.failures.push_back("kernel slope moved away from -1 under refinement: " + fmt(a.fitted_slope) + " -> " +
                             fmt(b.fitted_slope));
    } else {
      const double s = mode == DecayMode::derivative
                           ? std::max(spread(a.constant_d, b.constant_d), spread(a.constant_dstar, b.constant_dstar))
                           : spread(a.empirical_constant, b.empirical_constant);
      if (s > factor)
        r.failures.push_back(decay_mode_name(mode) + " constant changed by factor " + fmt(s) + " > " + fmt(factor));
    }
  }
}

// --- representation -------------------------------------------------------

void representation(const RunOptions& o, RunResult& r) {
  const Config& c = o.config;
  const std::string sec = "representation";
  const int p = c.integer(sec + ".degree", 0);
  const std::string kase = c.str(sec + ".case", "compact");
  if (kase != "compact" && kase != "full")
    throw Error(ErrorCode::ConfigParse, sec + ".case: expected compact or full, got '" + kase + "'");
  const int count = c.integer(sec + ".sources", 16);
  const double tol = c.real(sec + ".tolerance", kase == "compact" ? 1e-8 : 0.05);

  Table t({"claim", "case", "degree", "resolution", "mesh_width", "sources", "residual", "volume_term",
           "boundary_term"});
  std::vector<double> residuals;
  for (const auto& lv : mesh_levels(o)) {
    const auto& m = lv.mesh;
    const FlatBundle b = FlatBundle::identity(1, m.count(1));
    const HodgeLaplacian lap(m, p, b, BoundaryCondition::dirichlet);
    const auto src = stratified_sources(m, p, count, 2.0 * m.mesh_width());
    const GreenKernel k = green_columns(lap, src);
    Cochain f = Cochain::zeros(m, p, 1);
    if (kase == "full") {
      if (p != 0) throw Error(ErrorCode::UnsupportedConfiguration, "full boundary reconstruction needs degree 0");
      // Re(z^2) is harmonic, so only the boundary term carries it
      for (int v = 0; v < m.count(0); ++v) f.values[v] = m.vertex(v)[0] * m.vertex(v)[0] - m.vertex(v)[1] * m.vertex(v)[1];
    } else {
      Rng rng(o.seed);
      f = interpolate(m, p, 1, random_smooth_form(m.dim(), p, 1, rng, 6, 3.0));
      for (int s = 0; s < m.count(p); ++s)
        if (m.on_boundary(p, s)) f.values[s] = 0.0;
    }
    const auto rep = integral_representation_check(lap, k, f);
    t.add({std::string("integral_representation"), kase, whole(p), whole(lv.resolution), num(m.mesh_width()),
           whole(rep.sources), num(rep.residual), num(rep.volume_term), num(rep.boundary_term)});
    if (!(rep.residual <= tol))
      r.failures.push_back(kase + " reconstruction residual " + fmt(rep.residual) + " at resolution " +
                           std::to_string(lv.resolution) + " above " + fmt(tol));
    residuals.push_back(rep.residual);
  }
  emit(o, r, "representation.csv", t);
  if (kase == "full")
    for (std::size_t i = 1; i < residuals.size(); ++i)
      if (residuals[i] >= residuals[i - 1])
        r.failures.push_back("full reconstruction error did not decrease: " + fmt(residuals[i - 1]) + " -> " +
                             fmt(residuals[i]));
}

// --- solve-d --------------------------------------------------------------

void solve_d(const RunOptions& o, RunResult& r) {
  const Config& c = o.config;
  const std::string sec = "solve-d";
  const int p = c.integer(sec + ".degree", 1);
  const int rank = c.integer(sec + ".rank", 1);
  const BundleSpec bs = bundle_spec(c, sec);
  const std::string input = c.str(sec + ".input", "random_exact");
  if (input != "random_exact" && input != "harmonic_generator")
    throw Error(ErrorCode::ConfigParse, sec + ".input: expected random_exact or harmonic_generator");
  const int ensemble = c.integer(sec + ".ensemble", 50);
  const double q = c.real(sec + ".q", 2.0), k = c.real(sec + ".k", 2.0);
  const double tol = c.real(sec + ".tolerance", 1e-8);
  const double freq = c.real(sec + ".frequency", 3.0);

  Table t({"claim", "input", "degree", "rank", "resolution", "sample", "residual", "norm_ratio", "obstruction_norm",
           "orthogonality", "status"});
  Table summary({"claim", "input", "degree", "rank", "resolution", "samples", "max_residual", "delta_hat"});
  for (const auto& lv : mesh_levels(o)) {
    const auto& m = lv.mesh;
    const FlatBundle b = build_flat_bundle(m, rank, bs);
    const DSolver ds(m, p, b);
    std::vector<Cochain> data;
    if (input == "harmonic_generator") {
      const auto& h = ds.neumann().harmonic();
      if (h.dimension() == 0)
        throw Error(ErrorCode::UnsupportedConfiguration, "mesh has no harmonic generator in degree " + std::to_string(p));
      data.push_back({p, rank, h.full.col(0)});
    } else {
      const SpMat d = exterior_derivative(m, p - 1, b).matrix;
      const Rng root(o.seed);
      for (int i = 0; i < ensemble; ++i) {
        Rng rng = root.split(static_cast<std::uint64_t>(i));
        const Cochain v = to_bundle_frame(m, b, interpolate(m, p - 1, rank, random_smooth_form(m.dim(), p - 1, rank, rng, 6, freq)));
        data.push_back({p, rank, d * v.values});
      }
    }
    double worst = 0.0, max_ratio = 0.0;
    int solved = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      SolveReport rep;
      std::string status = "ok";
      try {
        rep = ds.solve(data[i], q, k).report;
        ++solved;
        worst = std::max(worst, rep.residual);
        max_ratio = std::max(max_ratio, rep.norm_ratio);
        if (!(rep.residual <= tol)) {
          status = "residual";
          r.failures.push_back("sample " + std::to_string(i) + ": |du - f|/|f| = " + fmt(rep.residual) + " above " + fmt(tol));
        }
      } catch (const ObstructionError& e) {
        rep = e.report();
        status = std::string(error_name(e.code()));
        r.failures.push_back(std::string(error_name(e.code())) + " on sample " + std::to_string(i) + ": harmonic part " +
                             fmt(rep.obstruction_norm));
      } catch (const Error& e) {
        status = std::string(error_name(e.code()));
        r.failures.push_back(std::string(e.what()) + " on sample " + std::to_string(i));
      }
      t.add({std::string("d_solver"), input, whole(p), whole(rank), whole(lv.resolution),
             whole(static_cast<long long>(i)), num(rep.residual), num(rep.norm_ratio), num(rep.obstruction_norm),
             num(rep.orthogonality), status});
    }
    summary.add({std::string("d_solver"), input, whole(p), whole(rank), whole(lv.resolution), whole(solved),
                 num(worst), num(max_ratio > 0.0 ? 1.0 / max_ratio : 0.0)});
  }
  emit(o, r, "solve_d.csv", t);
  emit(o, r, "solve_d_summary.csv", summary);
}

// --- sobolev --------------------------------------------------------------

void sobolev(const RunOptions& o, RunResult& r) {
  const Config& c = o.config;
  const std::string sec = "sobolev";
  if (c.has("mesh.file")) throw Error(ErrorCode::ConfigParse, "sobolev runs on generated meshes only");
  ExperimentConfig ec;
  ec.mesh.shape = parse_shape(c.str("mesh.shape", "disk"));
  ec.mesh.params = c.reals("mesh.params", ec.mesh.shape == Shape::annulus ? std::vector<double>{0.5, 1.0}
                                          : ec.mesh.shape == Shape::box3d ? std::vector<double>{1, 1, 1}
                                                                         : std::vector<double>{1.0});
  const int base = c.integer("mesh.resolution", 16);
  ec.degree = c.integer(sec + ".degree", 0);
  ec.rank = c.integer(sec + ".rank", 1);
  ec.bundle = bundle_spec(c, sec);
  ec.ensemble = c.integer(sec + ".ensemble", 50);
  ec.seed = o.seed;
  ec.exponents.q = c.real(sec + ".q", 2.0);
  ec.exponents.k = c.real(sec + ".k", 2.0);
  ec.exponents.r = c.real(sec + ".r", kInf);
  ec.exponents.s = c.real(sec + ".s", kInf);
  ec.curvature_assumption = c.str(sec + ".curvature", "flat");
  ec.normalize_volume = c.flag(sec + ".normalize", false);
  const double factor = c.real(sec + ".stability_factor", 2.0);

  Table t({"claim", "mode", "degree", "q", "k", "r", "s", "resolution", "mesh_width", "ensemble", "samples",
           "delta_hat", "passed"});
  for (const auto& name : c.words(sec + ".modes", {"laplace"})) {
    SobolevMode mode;
    try {
      mode = parse_sobolev_mode(name);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigParse, std::string(sec + ".modes: ") + e.what());
    }
    double prev = 0.0;
    for (int i = 0; i <= o.refinements; ++i) {
      ec.mesh.resolution = base << i;
      const SobolevReport rep = sobolev_check(ec, mode);
      const auto& e = rep.exponents;
      t.add({"sobolev_" + name, name, whole(ec.degree), num(e.q), num(e.k), num(e.r), num(e.s), whole(rep.resolution),
             num(rep.mesh_width), whole(ec.ensemble), whole(rep.samples), num(rep.delta_hat),
             std::string(rep.passed ? "true" : "false")});
      if (!rep.passed)
        r.failures.push_back(name + " check failed at resolution " + std::to_string(rep.resolution) + " (delta_hat " +
                             fmt(rep.delta_hat) + ")");
      if (i > 0 && mode != SobolevMode::harmonic_max && spread(prev, rep.delta_hat) > factor)
        r.failures.push_back(name + " delta_hat changed by factor " + fmt(spread(prev, rep.delta_hat)) + " > " +
                             fmt(factor));
      prev = rep.delta_hat;
    }
  }
  emit(o, r, "sobolev.csv", t);
}

// --- dbar -----------------------------------------------------------------

void dbar(const RunOptions& o, RunResult& r) {
  const Config& c = o.config;
  const std::string sec = "dbar";
  const int cells = c.integer(sec + ".cells", 48);
  const int ensemble = c.integer(sec + ".ensemble", 30);
  const int bandwidth = c.integer(sec + ".bandwidth", 1);
  const double factor = c.real(sec + ".stability_factor", 2.0);
  const bool l2 = c.flag(sec + ".l2_sobolev", true);

  Table t({"claim", "h", "sample", "f2", "nf", "u2", "delta_star", "delta_hat"});
  Table summary({"claim", "h", "epsilon", "samples", "min_delta_hat", "max_baseline_ratio", "max_residual",
                 "l2_delta_hat"});
  double prev = 0.0;
  for (int i = 0; i <= o.refinements; ++i) {
    const PlanarDomain dom = disk_domain(cells << i);
    const DbarSystem sys = build_system(dom);
    const auto data = band_limited_ensemble(sys, ensemble, o.seed, bandwidth);
    const ImprovedReport rep = improved_estimate_check(sys, data);
    for (std::size_t j = 0; j < rep.samples.size(); ++j) {
      const auto& s = rep.samples[j];
      t.add({std::string("dbar_improved"), num(rep.h), whole(static_cast<long long>(j)), num(s.f2), num(s.nf), num(s.u2),
             num(s.delta_star), num(s.delta_hat)});
    }
    const double l2_delta = l2 ? l2_sobolev_check(sys, data).delta_hat : std::nan("");
    summary.add({std::string("dbar_improved"), num(rep.h), num(rep.epsilon), whole(static_cast<long long>(rep.samples.size())),
                 num(rep.min_delta_hat), num(rep.max_baseline_ratio), num(rep.max_residual), num(l2_delta)});
    if (!(rep.min_delta_hat > 0.0))
      r.failures.push_back("min delta_hat is " + fmt(rep.min_delta_hat) + " at h = " + fmt(rep.h));
    if (l2 && !(l2_delta > 0.0)) r.failures.push_back("l2 Sobolev delta_hat is " + fmt(l2_delta) + " at h = " + fmt(rep.h));
    if (i > 0 && spread(prev, rep.min_delta_hat) > factor)
      r.failures.push_back("min delta_hat changed by factor " + fmt(spread(prev, rep.min_delta_hat)) + " > " + fmt(factor));
    prev = rep.min_delta_hat;
  }
  emit(o, r, "dbar.csv", t);
  emit(o, r, "dbar_summary.csv", summary);
}

}  // namespace

RunResult run_experiment(const RunOptions& o) {
  RunResult r;
  std::filesystem::create_directories(o.out_dir);
  try {
    if (o.experiment == "mesh-gen") mesh_gen(o, r);
    else if (o.experiment == "green-decay") green_decay(o, r);
    else if (o.experiment == "representation") representation(o, r);
    else if (o.experiment == "solve-d") solve_d(o, r);
    else if (o.experiment == "sobolev") sobolev(o, r);
    else if (o.experiment == "dbar") dbar(o, r);
    else throw Error(ErrorCode::ConfigParse, "unknown experiment '" + o.experiment + "'");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigParse || e.code() == ErrorCode::MissingInput) throw;
    r.failures.push_back(e.what());
  }
  return r;
}

std::string manifest_json(const RunOptions& o, const RunResult& r) {
  nlohmann::ordered_json j;
  j["experiment"] = o.experiment;
  j["config_hash"] = hex64(fnv1a(o.config.text()));
  j["seed"] = o.seed;
  j["refinements"] = o.refinements;
  j["versions"] = {{"greenforms", GREENFORMS_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  j["outputs"] = r.outputs;
  j["failures"] = r.failures;
  return j.dump(2) + "\n";
}

}  // namespace greenforms::cli
