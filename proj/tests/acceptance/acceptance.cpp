// One PASS/FAIL line per acceptance criterion. Usage: acceptance [--criterion N]
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "greenforms/bundle.hpp"
#include "greenforms/dbar.hpp"
#include "greenforms/errors.hpp"
#include "greenforms/forms.hpp"
#include "greenforms/green.hpp"
#include "greenforms/hodge.hpp"
#include "greenforms/inequalities.hpp"
#include "greenforms/mesh.hpp"

using namespace greenforms;
namespace fs = std::filesystem;

namespace {

// tolerances
constexpr double kFlatDD = 1e-10;
constexpr double kAdjoint = 1e-10;
constexpr double kSlopeLo = -1.3, kSlopeHi = -0.75;
constexpr double kConstantFactor = 2.0;
constexpr double kCompactResidual = 1e-8;
constexpr double kBoundaryResidual = 0.05;
constexpr double kSolveResidual = 1e-8;
constexpr double kGaugeFactor = 1.5;
constexpr double kStability = 2.0;
constexpr double kDbarAdjoint = 1e-10;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

double spread(double a, double b) { return std::max(a, b) / std::min(a, b); }

SimplicialMesh shape(Shape s, int res) {
  switch (s) {
    case Shape::annulus: return generate_mesh(s, {0.5, 1.0}, res);
    case Shape::box3d: return generate_mesh(s, {1, 1, 1}, res);
    default: return generate_mesh(s, {1.0}, res);
  }
}

Vec random_vec(Eigen::Index n, Rng& rng) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

void criterion1(Outcome& o) {
  double trivial = 0.0, flat = 0.0, adjoint = 0.0;
  for (auto s : {Shape::disk, Shape::annulus, Shape::torus2d, Shape::box3d}) {
    const auto m = shape(s, 4);
    const auto id = FlatBundle::identity(1, m.count(1));
    const auto gauge = build_flat_bundle(m, 2, BundleSpec::random_flat(3));
    for (int p = 0; p + 2 <= m.dim(); ++p) {
      const SpMat a = exterior_derivative(m, p + 1, id).matrix * exterior_derivative(m, p, id).matrix;
      if (a.nonZeros() > 0) trivial = std::max(trivial, Mat(a).cwiseAbs().maxCoeff());
      const SpMat b = exterior_derivative(m, p + 1, gauge).matrix * exterior_derivative(m, p, gauge).matrix;
      if (b.nonZeros() > 0) flat = std::max(flat, Mat(b).cwiseAbs().maxCoeff());
    }
  }
  {
    const auto m = shape(Shape::annulus, 8);
    const auto rot = build_flat_bundle(m, 2, BundleSpec::rotation(0.7));
    const SpMat b = exterior_derivative(m, 1, rot).matrix * exterior_derivative(m, 0, rot).matrix;
    if (b.nonZeros() > 0) flat = std::max(flat, Mat(b).cwiseAbs().maxCoeff());
  }
  Rng rng(42);
  const auto m = shape(Shape::disk, 8);
  const auto b = build_flat_bundle(m, 2, BundleSpec::random_flat(5));
  for (int t = 0; t < 100; ++t) {
    const int p = t % 2;
    const auto d = exterior_derivative(m, p, b);
    const auto mp = mass_matrix(m, p, b), mq = mass_matrix(m, p + 1, b);
    const auto ds = codifferential(d, mp, mq);
    const Vec x = random_vec(mp.matrix.rows(), rng), y = random_vec(mq.matrix.rows(), rng);
    const double lhs = (d.matrix * x).dot(mq.matrix * y), rhs = x.dot(mp.matrix * ds.apply(y));
    const double scale = std::sqrt(x.dot(mp.matrix * x) * y.dot(mq.matrix * y));
    adjoint = std::max(adjoint, std::abs(lhs - rhs) / scale);
  }
  o.detail << "max|dd| trivial " << trivial << ", flat " << flat << "; adjoint defect " << adjoint;
  o.check(trivial == 0.0, "dd = 0 exactly");
  o.check(flat <= kFlatDD, "flat dd");
  o.check(adjoint <= kAdjoint, "adjointness");
}

void criterion2(Outcome& o) {
  struct Case {
    Shape s;
    int res;
    std::vector<int> neumann, dirichlet;
  };
  for (const auto& c : {Case{Shape::disk, 8, {1, 0, 0}, {0, 0, 1}}, Case{Shape::annulus, 8, {1, 1, 0}, {0, 1, 1}},
                        Case{Shape::torus2d, 6, {1, 2, 1}, {1, 2, 1}}, Case{Shape::box3d, 3, {1, 0, 0, 0}, {0, 0, 0, 1}}}) {
    const auto m = shape(c.s, c.res);
    const auto b = FlatBundle::identity(1, m.count(1));
    std::vector<int> n, d;
    for (int p = 0; p <= m.dim(); ++p) {
      n.push_back(harmonic_space(HodgeLaplacian(m, p, b, BoundaryCondition::neumann)).dimension());
      d.push_back(harmonic_space(HodgeLaplacian(m, p, b, BoundaryCondition::dirichlet)).dimension());
    }
    o.detail << shape_name(c.s) << " N(";
    for (int x : n) o.detail << x;
    o.detail << ") D(";
    for (int x : d) o.detail << x;
    o.detail << ") ";
    o.check(n == c.neumann && d == c.dirichlet, shape_name(c.s) + " Betti numbers");
  }
}

DecayReport box_decay(int res, int p, DecayMode mode) {
  const auto m = shape(Shape::box3d, res);
  const auto b = FlatBundle::identity(1, m.count(1));
  const HodgeLaplacian lap(m, p, b, BoundaryCondition::dirichlet);
  const auto k = green_columns(lap, stratified_sources(m, p, 16, 2.0 * m.mesh_width()));
  return decay_report(k, lap, mode);
}

void criterion3(Outcome& o) {
  for (int p : {0, 1}) {
    const double coarse = box_decay(12, p, DecayMode::kernel).fitted_slope;
    const double fine = box_decay(24, p, DecayMode::kernel).fitted_slope;
    o.detail << "p=" << p << " slope res12 " << coarse << " res24 " << fine << "; ";
    const std::string tag = "p=" + std::to_string(p);
    o.check(coarse >= kSlopeLo && coarse <= kSlopeHi, tag + " res12 window");
    o.check(fine >= kSlopeLo && fine <= kSlopeHi, tag + " res24 window");
    o.check(std::abs(fine + 1.0) < std::abs(coarse + 1.0), tag + " toward -1");
  }
}

void criterion4(Outcome& o) {
  auto report = [](Shape s, int res, int p, DecayMode mode) {
    const auto m = shape(s, res);
    const auto b = FlatBundle::identity(1, m.count(1));
    const HodgeLaplacian lap(m, p, b, BoundaryCondition::dirichlet);
    const auto k = green_columns(lap, stratified_sources(m, p, 16, 2.0 * m.mesh_width()));
    return decay_report(k, lap, mode);
  };
  struct Level {
    Shape s;
    int coarse, fine;
  };
  for (const auto& lv : {Level{Shape::box3d, 6, 12}, Level{Shape::disk, 16, 32}})
    for (int p : {0, 1}) {
      const std::string tag = shape_name(lv.s) + " p=" + std::to_string(p);
      const auto bw0 = report(lv.s, lv.coarse, p, DecayMode::kernel_boundary_weighted);
      const auto bw1 = report(lv.s, lv.fine, p, DecayMode::kernel_boundary_weighted);
      const auto dv0 = report(lv.s, lv.coarse, p, DecayMode::derivative);
      const auto dv1 = report(lv.s, lv.fine, p, DecayMode::derivative);
      const double sb = spread(bw0.empirical_constant, bw1.empirical_constant);
      const double sd = spread(dv0.constant_d, dv1.constant_d);
      o.detail << tag << " bw x" << sb << " d x" << sd;
      o.check(sb <= kConstantFactor, tag + " boundary-weighted");
      o.check(sd <= kConstantFactor, tag + " d constant");
      if (p > 0) {
        const double ss = spread(dv0.constant_dstar, dv1.constant_dstar);
        o.detail << " d* x" << ss;
        o.check(ss <= kConstantFactor, tag + " d* constant");
      }
      o.detail << "; ";
    }
}

void criterion5(Outcome& o) {
  for (int p : {0, 1}) {
    const auto m = shape(Shape::disk, 12);
    const auto b = FlatBundle::identity(1, m.count(1));
    const HodgeLaplacian lap(m, p, b, BoundaryCondition::dirichlet);
    const auto k = green_columns(lap, stratified_sources(m, p, 16, 0.1));
    Rng rng(4);
    const auto field = random_smooth_form(2, p, 1, rng, 6, 3.0);
    const FormField bump = [&](const Point& x) -> Vec {
      const double r2 = x.squaredNorm();
      return r2 < 0.25 ? Vec(field(x) * std::pow(0.25 - r2, 2)) : Vec(Vec::Zero(field(x).size()));
    };
    const double r = integral_representation_check(lap, k, interpolate(m, p, 1, bump)).residual;
    o.detail << "compact p=" << p << " " << r << "; ";
    o.check(r <= kCompactResidual, "compact p=" + std::to_string(p));
  }
  std::vector<double> res;
  for (int n : {16, 32}) {
    const auto m = shape(Shape::disk, n);
    const auto b = FlatBundle::identity(1, m.count(1));
    const HodgeLaplacian lap(m, 0, b, BoundaryCondition::dirichlet);
    const auto k = green_columns(lap, stratified_sources(m, 0, 16, 2.0 * m.mesh_width()));
    Cochain f = Cochain::zeros(m, 0);
    for (int v = 0; v < m.count(0); ++v) f.values[v] = m.vertex(v)[0] * m.vertex(v)[0] - m.vertex(v)[1] * m.vertex(v)[1];
    res.push_back(integral_representation_check(lap, k, f).residual);
  }
  o.detail << "boundary term res16 " << res[0] << " res32 " << res[1];
  o.check(res[1] <= kBoundaryResidual, "res32 within 5%");
  o.check(res[1] < res[0], "decreasing");
}

Cochain random_exact(const SimplicialMesh& m, const FlatBundle& b, int p, Rng& rng) {
  const int r = b.rank();
  const Cochain v = to_bundle_frame(m, b, interpolate(m, p - 1, r, random_smooth_form(m.dim(), p - 1, r, rng, 6, 3.0)));
  return {p, r, exterior_derivative(m, p - 1, b).matrix * v.values};
}

void criterion6(Outcome& o) {
  struct Case {
    Shape s;
    int res, p, rank;
  };
  double worst = 0.0;
  for (const auto& c : {Case{Shape::disk, 12, 1, 1}, Case{Shape::disk, 12, 2, 1}, Case{Shape::annulus, 12, 1, 2},
                        Case{Shape::box3d, 4, 1, 1}, Case{Shape::box3d, 4, 2, 1}}) {
    const auto m = shape(c.s, c.res);
    const auto b = c.rank > 1 ? build_flat_bundle(m, c.rank, BundleSpec::random_flat(7)) : FlatBundle::identity(1, m.count(1));
    const DSolver ds(m, c.p, b);
    Rng rng(21);
    for (int i = 0; i < 50; ++i) worst = std::max(worst, ds.solve(random_exact(m, b, c.p, rng)).report.residual);
  }
  o.detail << "max residual " << worst << "; ";
  o.check(worst <= kSolveResidual, "residual");

  bool raised = false;
  {
    const auto m = shape(Shape::annulus, 12);
    const auto b = FlatBundle::identity(1, m.count(1));
    const DSolver ds(m, 1, b);
    try {
      ds.solve(Cochain{1, 1, ds.neumann().harmonic().full.col(0)});
    } catch (const ObstructionError& e) {
      raised = e.code() == ErrorCode::ObstructionNonExact;
    }
  }
  o.detail << "obstruction " << (raised ? "raised" : "missing") << "; ";
  o.check(raised, "ObstructionNonExact");

  std::vector<double> delta;
  const auto m = shape(Shape::disk, 12);
  for (int rank : {1, 2}) {
    const auto b = rank == 1 ? FlatBundle::identity(1, m.count(1)) : build_flat_bundle(m, 2, BundleSpec::random_flat(13));
    const DSolver ds(m, 1, b);
    Rng rng(17);
    double w = 0.0;
    for (int i = 0; i < 50; ++i) w = std::max(w, ds.solve(random_exact(m, b, 1, rng), 2.0, 2.0).report.norm_ratio);
    delta.push_back(1.0 / w);
  }
  o.detail << "delta trivial " << delta[0] << " gauge rank 2 " << delta[1];
  o.check(spread(delta[0], delta[1]) <= kGaugeFactor, "gauge independence");
}

void criterion7(Outcome& o) {
  struct Tuple {
    SobolevMode mode;
    int p;
    ExponentTuple t;
  };
  for (const auto& c : {Tuple{SobolevMode::laplace, 0, {2, 2, 2, kInf, 2}}, Tuple{SobolevMode::laplace, 1, {2, 2, 2, kInf, 2}},
                        Tuple{SobolevMode::laplace, 0, {4, 2, kInf, kInf, 2}}, Tuple{SobolevMode::gradient, 0, {2, 2, 2, 2, 2}},
                        Tuple{SobolevMode::gradient, 1, {2, 2, 2, 2, 2}}, Tuple{SobolevMode::gradient, 1, {3, 2, 2, 2, 2}}}) {
    std::vector<double> d;
    for (int res : {16, 32}) {
      ExperimentConfig cfg;
      cfg.mesh = MeshSpec{Shape::disk, {1.0}, res};
      cfg.degree = c.p;
      cfg.ensemble = 20;
      cfg.seed = 5;
      cfg.exponents = c.t;
      d.push_back(sobolev_check(cfg, c.mode).delta_hat);
    }
    const std::string tag = sobolev_mode_name(c.mode) + " p=" + std::to_string(c.p) + " q=" + std::to_string(c.t.q).substr(0, 3);
    o.detail << tag << " " << d[0] << "/" << d[1] << "; ";
    o.check(d[0] > 0.0 && d[1] > 0.0 && std::isfinite(d[0]) && std::isfinite(d[1]), tag + " positive");
    o.check(spread(d[0], d[1]) <= kStability, tag + " stable");
  }
  for (auto [s, res] : {std::pair{Shape::disk, 16}, {Shape::disk, 32}, {Shape::annulus, 16}}) {
    ExperimentConfig cfg;
    cfg.mesh = MeshSpec{s, s == Shape::annulus ? std::vector<double>{0.5, 1.0} : std::vector<double>{1.0}, res};
    cfg.ensemble = 20;
    const auto rep = sobolev_check(cfg, SobolevMode::harmonic_max);
    o.detail << "harmonic max " << shape_name(s) << res << " " << rep.delta_hat << "; ";
    o.check(rep.delta_hat <= kHarmonicMaxSlack, "maximum principle");
  }
  const bool flips = admissible({2.9, 1, kInf, kInf, 3}, Admissibility::cor_laplace) &&
                     !admissible({3.0, 1, kInf, kInf, 3}, Admissibility::cor_laplace) &&
                     admissible({2, 2, kInf, kInf, 3}, Admissibility::thm_lqp) &&
                     !admissible({kInf, 2, kInf, kInf, 2}, Admissibility::cor_gradient) &&
                     admissible({1.9, 3, 1, kInf, 2}, Admissibility::cor_laplace) &&
                     !admissible({2.0, 3, 1, kInf, 2}, Admissibility::cor_laplace);
  o.detail << "endpoint flips " << (flips ? "ok" : "wrong");
  o.check(flips, "admissibility endpoints");
}

void criterion8(Outcome& o) {
  std::vector<double> mins, l2;
  for (int cells : {48, 96}) {
    const auto d = disk_domain(cells);
    const auto s = build_system(d);
    const auto data = band_limited_ensemble(s, 30, 5);
    try {
      const auto rep = improved_estimate_check(s, data);
      mins.push_back(rep.min_delta_hat);
      o.detail << "h=1/" << cells << " baseline " << rep.max_baseline_ratio << " min delta " << rep.min_delta_hat << "; ";
    } catch (const Error& e) {
      o.check(false, e.what());
      mins.push_back(0.0);
    }
    l2.push_back(l2_sobolev_check(s, data).delta_hat);
  }
  o.check(mins[0] > 0.0 && mins[1] > 0.0, "min delta positive");
  o.check(mins[0] > 0.0 && mins[1] > 0.0 && spread(mins[0], mins[1]) <= kStability, "refinement");
  o.detail << "l2 delta " << l2[0] << "/" << l2[1] << "; ";
  o.check(l2[0] > 0.0 && spread(l2[0], l2[1]) <= kStability, "l2 boundary estimate");

  const auto d = disk_domain(48);
  const auto s = build_system(d);
  Rng rng(11);
  double worst = 0.0;
  auto random_c = [&rng](std::size_t n) {
    CVec v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = {rng.normal(), rng.normal()};
    return v;
  };
  auto wdot = [](const Vec& w, const CVec& a, const CVec& b) {
    std::complex<double> z = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) z += w[i] * a[i] * std::conj(b[i]);
    return z;
  };
  for (int t = 0; t < 100; ++t) {
    const CVec u = random_c(s.u_nodes.size()), v = random_c(s.f_nodes.size());
    const CVec du = s.apply(u);
    const double scale = std::sqrt(s.norm2_f(du) * s.norm2_f(v));
    worst = std::max(worst, std::abs(wdot(s.weight_f, du, v) - wdot(s.weight_u, u, s.adjoint(v))) / scale);
  }
  o.detail << "adjoint defect " << worst;
  o.check(worst <= kDbarAdjoint, "dbar adjoint");
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion9(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / "greenforms_acceptance_determinism";
  fs::remove_all(root);
  int files = 0;
  for (const char* cfg : {"dbar_disk.ini", "solve_d_disk.ini", "representation_disk.ini", "mesh_gen.ini"}) {
    const std::string sub = fs::path(cfg).stem().string();
    const std::string base = std::string(GREENFORMS_CLI) + " " + (std::string(cfg).substr(0, 4) == "mesh" ? "mesh-gen" :
                             std::string(cfg).substr(0, 4) == "dbar" ? "dbar" :
                             std::string(cfg).substr(0, 5) == "solve" ? "solve-d" : "representation") +
                             " --config " + GREENFORMS_CONFIGS + "/" + cfg + " --out-dir ";
    for (const char* run : {"a", "b"}) {
      const int code = shell(base + (root / sub / run).string() + " > /dev/null 2>&1");
      o.check(code == 0, std::string(cfg) + " exit " + std::to_string(code));
    }
    for (const auto& entry : fs::directory_iterator(root / sub / "a")) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const bool same = slurp(entry.path()) == slurp(root / sub / "b" / entry.path().filename());
      o.check(same, sub + "/" + entry.path().filename().string() + " differs");
    }
  }
  o.detail << files << " CSV files compared";
  o.check(files > 0, "no CSV produced");
  fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void(Outcome&)>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                               criterion6, criterion7, criterion8, criterion9};
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) chosen.push_back(std::atoi(argv[++i]));
    else {
      std::cerr << "usage: acceptance [--criterion N]...\n";
      return 1;
    }
  }
  if (chosen.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) chosen.push_back(i);

  bool all = true;
  for (int n : chosen) {
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::cerr << "no criterion " << n << '\n';
      return 1;
    }
    Outcome o;
    try {
      criteria[static_cast<std::size_t>(n - 1)](o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str() << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
