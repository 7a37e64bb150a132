#include "greenforms/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "greenforms/errors.hpp"
#include "greenforms/forms.hpp"
#include "greenforms/hodge.hpp"
#include "greenforms/rng.hpp"

namespace greenforms {

void validate(const ExponentTuple& t) {
  for (double e : {t.q, t.k, t.r, t.s})
    if (!(e >= 1.0)) throw Error(ErrorCode::InvalidExponent, "exponents must lie in [1, inf]");
  if (t.n != 2 && t.n != 3) throw Error(ErrorCode::InvalidExponent, "dimension must be 2 or 3");
}

Admissibility parse_admissibility(const std::string& name) {
  if (name == "cor_laplace") return Admissibility::cor_laplace;
  if (name == "cor_gradient") return Admissibility::cor_gradient;
  if (name == "thm_lqp") return Admissibility::thm_lqp;
  throw Error(ErrorCode::InvalidParams, "unknown admissibility table '" + name + "'");
}

std::string admissibility_name(Admissibility which) {
  switch (which) {
    case Admissibility::cor_laplace: return "cor_laplace";
    case Admissibility::cor_gradient: return "cor_gradient";
    case Admissibility::thm_lqp: return "thm_lqp";
  }
  return "?";
}

namespace {

// q < cap (strict) or q <= cap; a vanishing denominator makes the cap infinite
bool below(double q, double num, double den, bool strict) {
  if (den <= 0.0) return strict ? std::isfinite(q) : true;
  const double cap = num / den;
  return strict ? q < cap : q <= cap;
}

// integrability exponent e of a volume term with loss `order` (2 for Delta, 1 for d)
bool volume_rule(double q, double e, int n, int order) {
  const double top = static_cast<double>(n) / order;
  if (e > top) return true;
  const bool strict = e == 1.0 || e == top;
  return below(q, n * e, n - order * e, strict);
}

bool boundary_rule(double q, double e, int n) {
  if (e == 1.0) return q < static_cast<double>(n) / (n - 1);
  if (std::isinf(e)) return true;
  return q <= n * e / (n - 1);
}

}  // namespace

bool admissible(const ExponentTuple& t, Admissibility which) {
  validate(t);
  const int n = t.n;
  switch (which) {
    case Admissibility::cor_laplace:
      return volume_rule(t.q, t.k, n, 2) && boundary_rule(t.q, t.r, n);
    case Admissibility::cor_gradient:
      return volume_rule(t.q, t.k, n, 1) && volume_rule(t.q, t.r, n, 1) && boundary_rule(t.q, t.s, n);
    case Admissibility::thm_lqp:
      return t.q > 1.0 && std::isfinite(t.q) && t.k > 1.0 && std::isfinite(t.k) && t.q * (n - t.k) <= n * t.k;
  }
  return false;
}

SobolevMode parse_sobolev_mode(const std::string& name) {
  if (name == "laplace") return SobolevMode::laplace;
  if (name == "gradient") return SobolevMode::gradient;
  if (name == "max_laplace") return SobolevMode::max_laplace;
  if (name == "max_gradient") return SobolevMode::max_gradient;
  if (name == "harmonic_max") return SobolevMode::harmonic_max;
  throw Error(ErrorCode::InvalidParams, "unknown sobolev mode '" + name + "'");
}

std::string sobolev_mode_name(SobolevMode mode) {
  switch (mode) {
    case SobolevMode::laplace: return "laplace";
    case SobolevMode::gradient: return "gradient";
    case SobolevMode::max_laplace: return "max_laplace";
    case SobolevMode::max_gradient: return "max_gradient";
    case SobolevMode::harmonic_max: return "harmonic_max";
  }
  return "?";
}

namespace {

// Interior-tested mass solve for one degree: x_I = M_II^{-1} load_I, then
// boundary simplices take the transported mean of already known neighbours.
class InteriorMass {
 public:
  InteriorMass(const SimplicialMesh& mesh, const FlatBundle& bundle, int degree, const SpMat& mass)
      : mesh_(&mesh), bundle_(&bundle), degree_(degree), rank_(bundle.rank()) {
    const int count = mesh.count(degree);
    std::vector<int> dof_of(static_cast<std::size_t>(count * rank_), -1);
    for (int i = 0; i < count; ++i) {
      if (mesh.on_boundary(degree, i)) {
        boundary_.push_back(i);
        continue;
      }
      for (int a = 0; a < rank_; ++a) {
        dof_of[static_cast<std::size_t>(i * rank_ + a)] = static_cast<int>(inner_.size());
        inner_.push_back(i * rank_ + a);
      }
    }
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < mass.outerSize(); ++k)
      for (SpMat::InnerIterator it(mass, k); it; ++it) {
        const int r = dof_of[static_cast<std::size_t>(it.row())], c = dof_of[static_cast<std::size_t>(it.col())];
        if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
      }
    SpMat m_ii(static_cast<Eigen::Index>(inner_.size()), static_cast<Eigen::Index>(inner_.size()));
    m_ii.setFromTriplets(t.begin(), t.end());
    if (!inner_.empty()) solver_ = std::make_unique<SpdSolver>(m_ii);
    build_neighbours();
  }

  Vec solve(const Vec& load) const {
    Vec x = Vec::Zero(load.size());
    if (solver_) {
      Vec b(static_cast<Eigen::Index>(inner_.size()));
      for (std::size_t i = 0; i < inner_.size(); ++i) b[static_cast<Eigen::Index>(i)] = load[inner_[i]];
      const Vec xi = solver_->solve(b);
      for (std::size_t i = 0; i < inner_.size(); ++i) x[inner_[i]] = xi[static_cast<Eigen::Index>(i)];
    }
    fill_boundary(x);
    return x;
  }

 private:
  void build_neighbours() {
    const int n = mesh_->dim();
    std::vector<int> slot(static_cast<std::size_t>(mesh_->count(degree_)), -1);
    for (std::size_t i = 0; i < boundary_.size(); ++i) slot[static_cast<std::size_t>(boundary_[i])] = static_cast<int>(i);
    neighbours_.assign(boundary_.size(), {});
    const auto subsets = combinations(n + 1, degree_ + 1);
    std::vector<int> faces(subsets.size()), verts(static_cast<std::size_t>(degree_ + 1));
    for (int t = 0; t < mesh_->count(n); ++t) {
      const auto top = mesh_->simplex(n, t);
      for (std::size_t s = 0; s < subsets.size(); ++s) {
        for (int j = 0; j <= degree_; ++j) verts[static_cast<std::size_t>(j)] = top[subsets[s][static_cast<std::size_t>(j)]];
        faces[s] = mesh_->find(verts);
      }
      for (int f : faces) {
        const int b = slot[static_cast<std::size_t>(f)];
        if (b < 0) continue;
        for (int g : faces)
          if (g != f) neighbours_[static_cast<std::size_t>(b)].push_back(g);
      }
    }
    for (auto& list : neighbours_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }

  void fill_boundary(Vec& x) const {
    std::vector<char> known(static_cast<std::size_t>(mesh_->count(degree_)), 1);
    for (int b : boundary_) known[static_cast<std::size_t>(b)] = 0;
    // interior neighbours first, then simplices filled in earlier sweeps
    for (int sweep = 0; sweep < 4; ++sweep) {
      std::vector<int> filled;
      for (std::size_t i = 0; i < boundary_.size(); ++i) {
        const int b = boundary_[i];
        if (known[static_cast<std::size_t>(b)]) continue;
        const int base = mesh_->simplex(degree_, b)[0];
        Vec acc = Vec::Zero(rank_);
        int used = 0;
        for (int g : neighbours_[i]) {
          if (!known[static_cast<std::size_t>(g)]) continue;
          const Vec v = x.segment(static_cast<Eigen::Index>(g) * rank_, rank_);
          acc += bundle_->transport(*mesh_, base, mesh_->simplex(degree_, g)[0]) * v;
          ++used;
        }
        if (used == 0) continue;
        x.segment(static_cast<Eigen::Index>(b) * rank_, rank_) = acc / used;
        filled.push_back(b);
      }
      if (filled.empty()) break;
      for (int b : filled) known[static_cast<std::size_t>(b)] = 1;
    }
  }

  const SimplicialMesh* mesh_;
  const FlatBundle* bundle_;
  int degree_, rank_;
  std::vector<int> inner_, boundary_;
  std::vector<std::vector<int>> neighbours_;
  std::unique_ptr<SpdSolver> solver_;
};

}  // namespace

struct SobolevProblem::Impl {
  std::vector<std::unique_ptr<WhitneyEvaluator>> eval;  // indexed by degree
  std::unique_ptr<InteriorMass> mass_p, mass_lo;
  double volume = 0.0, boundary_volume = 0.0;
};

SobolevProblem::SobolevProblem(const SimplicialMesh& mesh, int p, const FlatBundle& bundle)
    : mesh_(&mesh), bundle_(&bundle), p_(p), impl_(std::make_unique<Impl>()) {
  const int n = mesh.dim();
  if (p < 0 || p > n) throw Error(ErrorCode::DegreeOutOfRange, "form degree out of range");
  lap_ = std::make_unique<HodgeLaplacian>(mesh, p, bundle, BoundaryCondition::neumann);
  impl_->eval.resize(static_cast<std::size_t>(n + 1));
  for (int k = std::max(0, p - 1); k <= std::min(n, p + 1); ++k)
    impl_->eval[static_cast<std::size_t>(k)] = std::make_unique<WhitneyEvaluator>(mesh, k, bundle);
  impl_->mass_p = std::make_unique<InteriorMass>(mesh, bundle, p, lap_->mass_full());
  if (p > 0) impl_->mass_lo = std::make_unique<InteriorMass>(mesh, bundle, p - 1, lap_->mass_lower());
  impl_->volume = mesh.total_volume();
  impl_->boundary_volume = mesh.boundary_volume();
}

SobolevProblem::~SobolevProblem() = default;

Vec SobolevProblem::derivative(const Vec& f) const {
  if (p_ == mesh_->dim()) return Vec();
  return lap_->d_upper() * f;
}

Vec SobolevProblem::codifferential(const Vec& f) const {
  if (p_ == 0) return Vec();
  return impl_->mass_lo->solve(Vec(lap_->d_lower().transpose() * (lap_->mass_full() * f)));
}

Vec SobolevProblem::laplacian(const Vec& f) const {
  Vec load = Vec::Zero(f.size());
  if (p_ < mesh_->dim()) load += lap_->d_upper().transpose() * (lap_->mass_upper() * (lap_->d_upper() * f));
  if (p_ > 0) load += lap_->mass_full() * (lap_->d_lower() * codifferential(f));
  return impl_->mass_p->solve(load);
}

double SobolevProblem::norm(const Vec& f, int degree, double q, bool normalize) const {
  const auto& eval = impl_->eval.at(static_cast<std::size_t>(degree));
  if (!eval) throw Error(ErrorCode::DegreeOutOfRange, "no evaluator for this degree");
  if (f.size() == 0) return 0.0;
  const double v = weighted_lq(eval->interior_norms(f), eval->interior_weights(), q);
  return normalize && std::isfinite(q) ? v / std::pow(impl_->volume, 1.0 / q) : v;
}

double SobolevProblem::boundary_norm(const Vec& f, double q, bool normalize) const {
  const auto& eval = *impl_->eval[static_cast<std::size_t>(p_)];
  const double v = weighted_lq(eval.boundary_norms(f), eval.boundary_weights(), q);
  return normalize && std::isfinite(q) && impl_->boundary_volume > 0.0
             ? v / std::pow(impl_->boundary_volume, 1.0 / q)
             : v;
}

namespace {

Mat dirichlet_modes(const SimplicialMesh& mesh, int p, const FlatBundle& bundle, int count, std::uint64_t seed) {
  const HodgeLaplacian lap(mesh, p, bundle, BoundaryCondition::dirichlet);
  const int n = lap.dofs().size();
  count = std::min(count, n);
  if (count == 0) return Mat(lap.dofs().full_size(), 0);
  if (n <= 400) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(lap.dense_stiffness(), Mat(lap.mass()));
    return lap.dofs().extend(Mat(es.eigenvectors().leftCols(count)));
  }
  const auto solver = lap.factor(1e-6 * lap.spectral_scale());
  const EigenPairs pairs = lowest_eigenpairs([&lap](const Vec& x) { return lap.apply_stiffness(x); },
                                             [&solver](const Vec& b) { return solver->solve(b); }, lap.mass(),
                                             count, seed, 200, 1e-8);
  return lap.dofs().extend(pairs.vectors);
}

Vec smooth_lift(const SobolevProblem& problem, Rng& rng) {
  const SimplicialMesh& mesh = problem.mesh();
  const FormField field = random_smooth_form(mesh.dim(), problem.degree(), problem.bundle().rank(), rng);
  const Cochain c = interpolate(mesh, problem.degree(), problem.bundle().rank(), field);
  return to_bundle_frame(mesh, problem.bundle(), c).values;
}

Vec unit(const SpMat& mass, Vec v) {
  const double nv = mass_norm(mass, v);
  return nv > 0.0 ? Vec(v / nv) : v;
}

}  // namespace

std::vector<Vec> sobolev_ensemble(const SobolevProblem& problem, int size, std::uint64_t seed, int eigenvectors) {
  const SpMat& m = problem.neumann().mass_full();
  const Mat modes = dirichlet_modes(problem.mesh(), problem.degree(), problem.bundle(), eigenvectors, seed);
  const Rng root(seed);
  std::vector<Vec> out;
  for (int j = 0; j < size; ++j) {
    Rng rng = root.split(static_cast<std::uint64_t>(j));
    Vec c(modes.cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.normal();
    const Vec interior = modes.cols() ? unit(m, Vec(modes * c)) : Vec(Vec::Zero(m.rows()));
    const Vec lift = unit(m, smooth_lift(problem, rng));
    const double t = 0.5 * std::numbers::pi * rng.uniform(0.0, 1.0);
    out.push_back(unit(m, Vec(std::cos(t) * interior + std::sin(t) * lift)));
  }
  return out;
}

SobolevReport sobolev_check(const SobolevProblem& problem, const std::vector<Vec>& ensemble, SobolevMode mode,
                            const ExponentTuple& t, bool normalize) {
  validate(t);
  const SimplicialMesh& mesh = problem.mesh();
  const int n = mesh.dim(), p = problem.degree();
  if (t.n != n) throw Error(ErrorCode::InvalidParams, "exponent tuple dimension differs from the mesh");
  auto inadmissible = [&](const std::string& why) {
    std::ostringstream msg;
    msg << "(q,k,r,s)=(" << t.q << "," << t.k << "," << t.r << "," << t.s << ") n=" << n << ": " << why;
    throw Error(ErrorCode::InadmissibleExponents, msg.str());
  };
  switch (mode) {
    case SobolevMode::laplace:
      if (!admissible(t, Admissibility::cor_laplace)) inadmissible("outside the Laplace case table");
      break;
    case SobolevMode::gradient:
      if (!admissible(t, Admissibility::cor_gradient)) inadmissible("outside the gradient case table");
      break;
    case SobolevMode::max_laplace:
      if (!(t.k > n / 2.0)) inadmissible("the maximum estimate needs k > n/2");
      break;
    case SobolevMode::max_gradient:
      if (!(t.k > n && t.r > n)) inadmissible("the maximum estimate needs k, r > n");
      break;
    case SobolevMode::harmonic_max:
      if (!problem.bundle().trivial() || problem.bundle().rank() != 1)
        throw Error(ErrorCode::UnsupportedConfiguration, "harmonic maximum check runs on scalar forms");
      break;
  }

  SobolevReport rep;
  rep.mode = mode;
  rep.exponents = t;
  rep.degree = p;
  rep.mesh_width = mesh.mesh_width();
  const bool maximum = mode == SobolevMode::max_laplace || mode == SobolevMode::max_gradient ||
                       mode == SobolevMode::harmonic_max;
  rep.delta_hat = maximum ? 0.0 : kInf;

  std::unique_ptr<HarmonicExtension> ext;
  if (mode == SobolevMode::harmonic_max) ext = std::make_unique<HarmonicExtension>(mesh, p);

  for (const Vec& f : ensemble) {
    double lhs = 0.0, rhs = 0.0, ratio = 0.0;
    switch (mode) {
      case SobolevMode::laplace:
        lhs = problem.norm(f, p, t.q, normalize);
        rhs = problem.norm(problem.laplacian(f), p, t.k, normalize) + problem.boundary_norm(f, t.r, normalize);
        break;
      case SobolevMode::gradient:
        lhs = problem.norm(f, p, t.q, normalize);
        rhs = problem.boundary_norm(f, t.s, normalize);
        if (p < n) rhs += problem.norm(problem.derivative(f), p + 1, t.k, normalize);
        if (p > 0) rhs += problem.norm(problem.codifferential(f), p - 1, t.r, normalize);
        break;
      case SobolevMode::max_laplace:
        lhs = problem.norm(f, p, kInf) - problem.boundary_norm(f, kInf);
        rhs = problem.norm(problem.laplacian(f), p, t.k, normalize);
        break;
      case SobolevMode::max_gradient:
        lhs = problem.norm(f, p, kInf) - problem.boundary_norm(f, kInf);
        if (p < n) rhs += problem.norm(problem.derivative(f), p + 1, t.k, normalize);
        if (p > 0) rhs += problem.norm(problem.codifferential(f), p - 1, t.r, normalize);
        break;
      case SobolevMode::harmonic_max: {
        const Vec h = ext->extend(f);
        lhs = problem.norm(h, p, kInf);
        rhs = problem.boundary_norm(h, kInf);
        break;
      }
    }
    if (mode == SobolevMode::harmonic_max) {
      if (rhs == 0.0 && lhs == 0.0) continue;
      ratio = rhs > 0.0 ? lhs / rhs : kInf;
    } else if (maximum) {
      if (rhs == 0.0 && lhs <= 0.0) continue;
      ratio = lhs <= 0.0 ? 0.0 : (rhs > 0.0 ? lhs / rhs : kInf);
    } else {
      if (lhs == 0.0) continue;
      ratio = rhs / lhs;
    }
    ++rep.samples;
    rep.ratios.push_back(ratio);
    rep.delta_hat = maximum ? std::max(rep.delta_hat, ratio) : std::min(rep.delta_hat, ratio);
  }
  if (rep.samples == 0) throw Error(ErrorCode::EnsembleDegenerate, "every ensemble member has LHS = RHS = 0");
  if (mode == SobolevMode::harmonic_max) rep.passed = rep.delta_hat <= kHarmonicMaxSlack;
  else if (maximum) rep.passed = std::isfinite(rep.delta_hat);
  else rep.passed = rep.delta_hat > 0.0 && std::isfinite(rep.delta_hat);
  return rep;
}

SobolevReport sobolev_check(const ExperimentConfig& config, SobolevMode mode) {
  if (config.curvature_assumption != "flat")
    throw Error(ErrorCode::FlatnessViolation, "estimates are only exercised under the flat assumption");
  if (config.ensemble <= 0) throw Error(ErrorCode::InvalidParams, "ensemble size must be positive");
  const SimplicialMesh mesh = generate_mesh(config.mesh);
  const FlatBundle bundle = build_flat_bundle(mesh, config.rank, config.bundle);
  ExponentTuple t = config.exponents;
  t.n = mesh.dim();
  const SobolevProblem problem(mesh, config.degree, bundle);
  std::vector<Vec> ensemble;
  if (mode == SobolevMode::harmonic_max) {
    const Rng root(config.seed);
    for (int j = 0; j < config.ensemble; ++j) {
      Rng rng = root.split(static_cast<std::uint64_t>(j));
      ensemble.push_back(smooth_lift(problem, rng));
    }
  } else {
    ensemble = sobolev_ensemble(problem, config.ensemble, config.seed);
  }
  SobolevReport rep = sobolev_check(problem, ensemble, mode, t, config.normalize_volume);
  rep.resolution = config.mesh.resolution;
  return rep;
}

}  // namespace greenforms
