#include "greenforms/hodge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "greenforms/forms.hpp"

namespace greenforms {

namespace {

constexpr double kKernelTolerance = 1e-7;  // eigenvalue / spectral scale
constexpr int kDenseLimit = 400;

HarmonicSpace from_pairs(const HodgeLaplacian& lap, const Vec& values, const Mat& vectors, double cut) {
  HarmonicSpace h;
  h.degree = lap.degree();
  h.bc = lap.bc();
  int dim = 0;
  while (dim < values.size() && values[dim] < cut) ++dim;
  h.basis = vectors.leftCols(dim);
  h.eigenvalues = values.head(dim);
  h.gap = dim < values.size() ? values[dim] : std::numeric_limits<double>::infinity();
  h.full = lap.dofs().extend(h.basis);
  return h;
}

}  // namespace

HarmonicSpace harmonic_space(const HodgeLaplacian& lap, std::uint64_t seed) {
  const int n = lap.dofs().size();
  if (n == 0) return from_pairs(lap, Vec(), Mat(0, 0), 0.0);
  const double scale = lap.spectral_scale();
  const double cut = kKernelTolerance * scale;

  if (n <= kDenseLimit) {
    const Mat s = lap.dense_stiffness();
    const Mat m = Mat(lap.mass());
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(s, m);
    return from_pairs(lap, es.eigenvalues(), es.eigenvectors(), cut);
  }

  const double shift = 1e-6 * scale;
  const auto solver = lap.factor(shift);
  auto apply = [&lap](const Vec& x) { return lap.apply_stiffness(x); };
  auto inverse = [&solver](const Vec& b) { return solver->solve(b); };
  for (int count = 6;; count *= 2) {
    const EigenPairs pairs = lowest_eigenpairs(apply, inverse, lap.mass(), std::min(count, n), seed, 80, 1e-8);
    int below = 0;
    while (below < pairs.values.size() && pairs.values[below] < cut) ++below;
    if (below < pairs.values.size() || count >= n) return from_pairs(lap, pairs.values, pairs.vectors, cut);
  }
}

PotentialSolver::PotentialSolver(const HodgeLaplacian& laplacian) : lap_(&laplacian) {
  harmonic_ = harmonic_space(laplacian);
  if (harmonic_.dimension() > 0) shift_ = 1e-8 * laplacian.spectral_scale();
  solver_ = laplacian.factor(shift_);
}

Vec PotentialSolver::solve_load(const Vec& load) const {
  const Mat& h = harmonic_.basis;
  Vec x = solver_->solve(load);
  if (shift_ == 0.0) return x;
  // the shift only perturbs by shift * M x; a few refinement steps remove it
  for (int it = 0; it < 4; ++it) {
    const Vec r = load - lap_->apply_stiffness(x);
    x += solver_->solve(r);
    x -= h * (h.transpose() * (lap_->mass() * x));
  }
  return x;
}

Vec PotentialSolver::harmonic_part(const Vec& f) const {
  if (harmonic_.dimension() == 0) return Vec::Zero(f.size());
  return harmonic_.full * (harmonic_.full.transpose() * (lap_->mass_full() * f));
}

double PotentialSolver::harmonic_fraction(const Vec& f) const {
  const double nf = mass_norm(lap_->mass_full(), f);
  if (nf == 0.0 || harmonic_.dimension() == 0) return 0.0;
  return (harmonic_.full.transpose() * (lap_->mass_full() * f)).norm() / nf;
}

Vec PotentialSolver::potential(const Vec& f, bool project) const {
  const DofMap& dofs = lap_->dofs();
  if (f.size() != dofs.full_size()) throw Error(ErrorCode::ShapeMismatch, "potential: cochain size mismatch");
  Vec load = dofs.restrict(Vec(lap_->mass_full() * f));
  if (harmonic_.dimension() > 0) {
    const Vec c = harmonic_.basis.transpose() * load;
    const double nf = mass_norm(lap_->mass_full(), f);
    if (nf > 0.0 && c.norm() > 1e-8 * nf) {
      if (!project) {
        std::ostringstream msg;
        msg << "harmonic component " << c.norm() / nf << " of the source exceeds tolerance";
        throw Error(ErrorCode::NotOrthogonal, msg.str());
      }
    }
    load -= lap_->mass() * (harmonic_.basis * c);
  }
  if (load.squaredNorm() == 0.0) return Vec::Zero(dofs.full_size());
  return dofs.extend(solve_load(load));
}

DSolver::DSolver(const SimplicialMesh& mesh, int p, const FlatBundle& bundle)
    : mesh_(&mesh), bundle_(&bundle), p_(p) {
  if (p < 1 || p > mesh.dim()) throw Error(ErrorCode::DegreeOutOfRange, "du = f needs 1 <= p <= dim");
  dir_lap_ = std::make_unique<HodgeLaplacian>(mesh, p, bundle, BoundaryCondition::dirichlet);
  neu_lap_ = std::make_unique<HodgeLaplacian>(mesh, p, bundle, BoundaryCondition::neumann);
  lower_lap_ = std::make_unique<HodgeLaplacian>(mesh, p - 1, bundle, BoundaryCondition::neumann);
  dir_ = std::make_unique<PotentialSolver>(*dir_lap_);
  neu_ = std::make_unique<PotentialSolver>(*neu_lap_);
  lower_harmonic_ = harmonic_space(*lower_lap_);
  d_ = exterior_derivative(mesh, p - 1, bundle).matrix;
  if (p < mesh.dim()) d_next_ = exterior_derivative(mesh, p, bundle).matrix;
  if (p >= 2) {
    lower2_lap_ = std::make_unique<HodgeLaplacian>(mesh, p - 2, bundle, BoundaryCondition::neumann);
    lower2_ = std::make_unique<PotentialSolver>(*lower2_lap_);
    d_prev_ = exterior_derivative(mesh, p - 2, bundle).matrix;
  }
  lower_mass_ = lower_lap_->mass_full();
  eval_ = std::make_unique<WhitneyEvaluator>(mesh, p, bundle);
  eval_lower_ = std::make_unique<WhitneyEvaluator>(mesh, p - 1, bundle);
}

SolveResult DSolver::solve(const Cochain& f, double q, double k) const {
  const SpMat& m = mass();
  if (f.degree != p_ || f.values.size() != m.rows()) throw Error(ErrorCode::ShapeMismatch, "solve: cochain does not match");
  SolveResult out;
  out.report.q = q;
  out.report.k = k;
  out.u = Cochain::zeros(*mesh_, p_ - 1, bundle_->rank());
  const double nf = mass_norm(m, f.values);
  if (nf == 0.0) return out;

  if (d_next_.size() > 0) {
    const double df = (d_next_ * f.values).cwiseAbs().maxCoeff();
    if (df > 1e-8 * (p_ + 2) * f.values.cwiseAbs().maxCoeff())
      throw Error(ErrorCode::NotClosed, "df does not vanish");
  }

  const Vec f1 = dir_->harmonic_part(f.values);
  const Vec phi = dir_->potential(f.values - f1);
  Vec sigma = Vec::Zero(lower_mass_.rows());
  if (dir_lap_->lower_dofs().size() > 0)
    sigma = dir_lap_->lower_dofs().extend(dir_lap_->codifferential(dir_lap_->dofs().restrict(phi)));
  const Vec g = f.values - d_ * sigma;
  const Vec pg = neu_->harmonic_part(g);
  out.report.obstruction_norm = mass_norm(m, pg);
  const Vec psi = neu_->potential(g, true);
  Vec u = sigma + neu_lap_->codifferential(psi);
  if (lower2_) {
    // sigma is only Dirichlet-coexact; drop the exact part d w of u
    const Vec du = lower_lap_->lower_dofs().extend(lower_lap_->codifferential(lower_lap_->dofs().restrict(u)));
    u -= d_prev_ * lower2_->potential(du, true);
  }
  if (lower_harmonic_.dimension() > 0) {
    const Mat& h = lower_harmonic_.full;
    u -= h * (h.transpose() * (lower_mass_ * u));
  }
  out.u.values = u;

  out.report.residual = mass_norm(m, Vec(d_ * u - f.values)) / nf;
  const double nu = mass_norm(lower_mass_, u);
  if (lower_harmonic_.dimension() > 0 && nu > 0.0)
    out.report.orthogonality = (lower_harmonic_.full.transpose() * (lower_mass_ * u)).norm() / nu;
  const double fk = weighted_lq(eval_->interior_norms(f.values), eval_->interior_weights(), k);
  const double uq = weighted_lq(eval_lower_->interior_norms(u), eval_lower_->interior_weights(), q);
  out.report.norm_ratio = fk > 0.0 ? uq / fk : 0.0;

  if (out.report.residual > 1e-6) {
    std::ostringstream msg;
    msg << "f is not exact: residual " << out.report.residual << ", obstruction norm " << out.report.obstruction_norm
        << " (|f| = " << nf << ")";
    throw ObstructionError(out.report, msg.str());
  }
  return out;
}

HarmonicExtension::HarmonicExtension(const SimplicialMesh& mesh, int p)
    : mesh_(&mesh), p_(p), trivial_(FlatBundle::identity(1, mesh.count(1))) {
  const int n = mesh.dim();
  if (p < 0 || p > n) throw Error(ErrorCode::DegreeOutOfRange, "harmonic extension degree out of range");
  if (p == n) throw Error(ErrorCode::UnsupportedConfiguration, "top-degree forms carry no boundary trace");
  lap_ = std::make_unique<HodgeLaplacian>(mesh, p, trivial_, BoundaryCondition::neumann);
  for (int i = 0; i < mesh.count(p); ++i) (mesh.on_boundary(p, i) ? outer_ : inner_).push_back(i);
  auto selector = [&](const std::vector<int>& idx) {
    SpMat s(static_cast<Eigen::Index>(idx.size()), mesh.count(p));
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t i = 0; i < idx.size(); ++i) t.emplace_back(static_cast<int>(i), idx[i], 1.0);
    s.setFromTriplets(t.begin(), t.end());
    return s;
  };
  pi_ = selector(inner_);
  pb_ = selector(outer_);
  SpMat c(mesh.count(p), mesh.count(p));
  if (p < n) c = SpMat(lap_->d_upper().transpose()) * lap_->mass_upper() * lap_->d_upper();
  const SpMat c_ii = pi_ * c * SpMat(pi_.transpose());
  c_ib_ = pi_ * c * SpMat(pb_.transpose());
  if (inner_.empty()) return;
  if (p == 0) {
    chol_ = std::make_unique<SpdSolver>(c_ii);
    return;
  }
  // [[-M_lo, B_I], [B_I^T, C_II]] [sigma; u_I] = -[B_b; C_Ib] u_b, B = d^T M
  const SpMat b = SpMat(lap_->d_lower().transpose()) * lap_->mass();
  const SpMat b_i = b * SpMat(pi_.transpose());
  b_b_ = b * SpMat(pb_.transpose());
  n_lo_ = static_cast<int>(b.rows());
  const int ni = static_cast<int>(inner_.size());
  std::vector<Eigen::Triplet<double>> t;
  const SpMat& m_lo = lap_->mass_lower();
  for (int k = 0; k < m_lo.outerSize(); ++k)
    for (SpMat::InnerIterator it(m_lo, k); it; ++it) t.emplace_back(it.row(), it.col(), -it.value());
  for (int k = 0; k < b_i.outerSize(); ++k)
    for (SpMat::InnerIterator it(b_i, k); it; ++it) {
      t.emplace_back(it.row(), n_lo_ + it.col(), it.value());
      t.emplace_back(n_lo_ + it.col(), it.row(), it.value());
    }
  for (int k = 0; k < c_ii.outerSize(); ++k)
    for (SpMat::InnerIterator it(c_ii, k); it; ++it) t.emplace_back(n_lo_ + it.row(), n_lo_ + it.col(), it.value());
  SpMat kkt(n_lo_ + ni, n_lo_ + ni);
  kkt.setFromTriplets(t.begin(), t.end());
  lu_ = std::make_unique<LuSolver>(kkt);
}

HarmonicExtension::~HarmonicExtension() = default;

Vec HarmonicExtension::extend(const Vec& data, Vec* sigma) const {
  if (data.size() != mesh_->count(p_)) throw Error(ErrorCode::ShapeMismatch, "boundary data size mismatch");
  const Vec ub = pb_ * data;
  Vec u = SpMat(pb_.transpose()) * ub;
  if (inner_.empty()) {
    if (sigma && p_ > 0) *sigma = lap_->solve_mass(Vec(lap_->d_lower().transpose() * (lap_->mass() * u)));
    return u;
  }
  if (p_ == 0) {
    u += SpMat(pi_.transpose()) * chol_->solve(Vec(-(c_ib_ * ub)));
    return u;
  }
  const int total = n_lo_ + interior_dofs();
  Vec rhs(total);
  rhs.head(n_lo_) = -(b_b_ * ub);
  rhs.tail(total - n_lo_) = -(c_ib_ * ub);
  const Vec x = lu_->solve(rhs);
  u += SpMat(pi_.transpose()) * x.tail(total - n_lo_);
  if (sigma) *sigma = x.head(n_lo_);
  return u;
}

HodgeDecomposition hodge_decomposition(const PotentialSolver& neumann, const Vec& f) {
  const HodgeLaplacian& lap = neumann.laplacian();
  if (lap.bc() != BoundaryCondition::neumann)
    throw Error(ErrorCode::UnsupportedConfiguration, "decomposition uses the Neumann potential");
  const SpMat& m = lap.mass_full();
  HodgeDecomposition out;
  out.harmonic = neumann.harmonic_part(f);
  const Vec psi = neumann.potential(f - out.harmonic);
  out.exact = Vec::Zero(f.size());
  out.coexact = Vec::Zero(f.size());
  if (lap.has_lower()) {
    out.a = lap.codifferential(psi);
    out.exact = lap.d_lower() * out.a;
  }
  if (lap.has_upper()) {
    out.b = lap.derivative(psi);
    out.coexact = lap.solve_mass(Vec(lap.d_upper().transpose() * (lap.mass_upper() * out.b)));
  }
  const double nf = mass_norm(m, f);
  const Vec rest = f - out.exact - out.coexact - out.harmonic;
  out.reconstruction = nf > 0.0 ? mass_norm(m, rest) / nf : 0.0;
  const Vec* parts[3] = {&out.exact, &out.coexact, &out.harmonic};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double ni = mass_norm(m, *parts[i]), nj = mass_norm(m, *parts[j]);
      if (ni == 0.0 || nj == 0.0) continue;
      out.max_cross = std::max(out.max_cross, std::abs(mass_inner(m, *parts[i], *parts[j])) / (ni * nj));
    }
  return out;
}

}  // namespace greenforms
