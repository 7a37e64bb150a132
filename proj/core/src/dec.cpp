#include "greenforms/dec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "greenforms/errors.hpp"

namespace greenforms {

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_degree(const SimplicialMesh& mesh, int p, int hi) {
  if (p < 0 || p > hi) throw Error(ErrorCode::DegreeOutOfRange, "degree " + std::to_string(p) + " out of range");
  (void)mesh;
}

}  // namespace

Cochain Cochain::zeros(const SimplicialMesh& mesh, int degree, int rank) {
  return {degree, rank, Vec::Zero(static_cast<Eigen::Index>(mesh.count(degree)) * rank)};
}

DofMap::DofMap(const SimplicialMesh& mesh, int degree, int rank, BoundaryCondition bc)
    : degree_(degree), rank_(rank), bc_(bc) {
  const int n = mesh.count(degree);
  full_size_ = n * rank;
  to_local_.assign(static_cast<std::size_t>(full_size_), -1);
  for (int i = 0; i < n; ++i) {
    if (bc == BoundaryCondition::dirichlet && mesh.on_boundary(degree, i)) continue;
    for (int a = 0; a < rank; ++a) {
      to_local_[static_cast<std::size_t>(i * rank + a)] = static_cast<int>(free_.size());
      free_.push_back(i * rank + a);
    }
  }
}

Vec DofMap::restrict(const Vec& full) const {
  Vec out(size());
  for (int i = 0; i < size(); ++i) out[i] = full[free_[static_cast<std::size_t>(i)]];
  return out;
}

Vec DofMap::extend(const Vec& local) const {
  Vec out = Vec::Zero(full_size_);
  for (int i = 0; i < size(); ++i) out[free_[static_cast<std::size_t>(i)]] = local[i];
  return out;
}

Mat DofMap::extend(const Mat& local) const {
  Mat out = Mat::Zero(full_size_, local.cols());
  for (int i = 0; i < size(); ++i) out.row(free_[static_cast<std::size_t>(i)]) = local.row(i);
  return out;
}

SpMat DofMap::selector() const {
  SpMat s(size(), full_size_);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(free_.size());
  for (int i = 0; i < size(); ++i) t.emplace_back(i, free_[static_cast<std::size_t>(i)], 1.0);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

OperatorMatrix exterior_derivative(const SimplicialMesh& mesh, int p, const FlatBundle& bundle) {
  check_degree(mesh, p, mesh.dim() - 1);
  const int r = bundle.rank();
  const int rows = mesh.count(p + 1), cols = mesh.count(p);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(rows) * (p + 2) * r * r);
  for (int i = 0; i < rows; ++i) {
    auto s = mesh.simplex(p + 1, i);
    auto fs = mesh.faces(p + 1, i);
    for (int j = 0; j <= p + 1; ++j) {
      const double sign = (j % 2) ? -1.0 : 1.0;
      const int f = fs[j];
      if (j == 0 && !bundle.trivial()) {
        const int e = (p == 0) ? i : mesh.edge(s[0], s[1]);
        const auto q = bundle.edge_transport(e);
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b)
            if (q(a, b) != 0.0) t.emplace_back(i * r + a, f * r + b, sign * q(a, b));
      } else {
        for (int a = 0; a < r; ++a) t.emplace_back(i * r + a, f * r + a, sign);
      }
    }
  }
  OperatorMatrix op;
  op.rows = {p + 1, r, BoundaryCondition::neumann, rows * r};
  op.cols = {p, r, BoundaryCondition::neumann, cols * r};
  op.matrix.resize(rows * r, cols * r);
  op.matrix.setFromTriplets(t.begin(), t.end());
  return op;
}

LocalWhitney::LocalWhitney(const SimplicialMesh& mesh, int top, int p) : n_(mesh.dim()), p_(p) {
  const auto pts = mesh.coordinates(n_, top);
  Mat jac(n_, n_);
  for (int j = 0; j < n_; ++j) jac.col(j) = (pts.col(j + 1) - pts.col(0)).head(n_);
  volume_ = std::abs(jac.determinant()) / factorial(n_);
  const Mat inv = jac.inverse();
  grads_.resize(n_ + 1, n_);
  grads_.bottomRows(n_) = inv;
  grads_.row(0) = -inv.colwise().sum();

  const auto s = mesh.simplex(n_, top);
  faces_ = combinations(n_ + 1, p + 1);
  const auto multi = combinations(n_, p);
  for (const auto& f : faces_) {
    std::vector<int> verts;
    for (int l : f) verts.push_back(s[l]);
    global_.push_back(mesh.find(verts));
    Mat w(static_cast<Eigen::Index>(multi.size()), p + 1);
    for (int j = 0; j <= p; ++j) {
      Mat g(p, n_);
      for (int c = 0, row = 0; c <= p; ++c)
        if (c != j) g.row(row++) = grads_.row(f[static_cast<std::size_t>(c)]);
      for (std::size_t m = 0; m < multi.size(); ++m) {
        if (p == 0) {
          w(static_cast<Eigen::Index>(m), j) = 1.0;
          continue;
        }
        Mat sub(p, p);
        for (int c = 0; c < p; ++c) sub.col(c) = g.col(multi[m][static_cast<std::size_t>(c)]);
        w(static_cast<Eigen::Index>(m), j) = sub.determinant();
      }
    }
    wedge_.push_back(std::move(w));
  }
}

Mat LocalWhitney::values(const Vec& lambda) const {
  const double pf = factorial(p_);
  Mat out(wedge_.empty() ? 0 : wedge_[0].rows(), face_count());
  for (int f = 0; f < face_count(); ++f) {
    Vec v = Vec::Zero(out.rows());
    for (int j = 0; j <= p_; ++j)
      v += ((j % 2) ? -1.0 : 1.0) * lambda[faces_[static_cast<std::size_t>(f)][static_cast<std::size_t>(j)]] *
           wedge_[static_cast<std::size_t>(f)].col(j);
    out.col(f) = pf * v;
  }
  return out;
}

Mat LocalWhitney::local_mass() const {
  const double pf = factorial(p_);
  const double denom = (n_ + 1.0) * (n_ + 2.0);
  Mat m(face_count(), face_count());
  for (int f = 0; f < face_count(); ++f)
    for (int g = f; g < face_count(); ++g) {
      double acc = 0.0;
      const auto& F = faces_[static_cast<std::size_t>(f)];
      const auto& G = faces_[static_cast<std::size_t>(g)];
      for (int j = 0; j <= p_; ++j)
        for (int l = 0; l <= p_; ++l) {
          const double lam = volume_ * (F[static_cast<std::size_t>(j)] == G[static_cast<std::size_t>(l)] ? 2.0 : 1.0) / denom;
          const double sign = ((j + l) % 2) ? -1.0 : 1.0;
          acc += sign * lam * wedge_[static_cast<std::size_t>(f)].col(j).dot(wedge_[static_cast<std::size_t>(g)].col(l));
        }
      m(f, g) = m(g, f) = pf * pf * acc;
    }
  return m;
}

OperatorMatrix mass_matrix(const SimplicialMesh& mesh, int p, const FlatBundle& bundle) {
  check_degree(mesh, p, mesh.dim());
  const int n = mesh.dim(), r = bundle.rank();
  const int size = mesh.count(p) * r;
  std::vector<Eigen::Triplet<double>> t;
  const int nf = binomial(n + 1, p + 1);
  t.reserve(static_cast<std::size_t>(mesh.count(n)) * nf * nf * r * r);
  for (int top = 0; top < mesh.count(n); ++top) {
    LocalWhitney lw(mesh, top, p);
    if (!(lw.volume() > 0.0)) throw Error(ErrorCode::DegenerateSimplex, "zero-volume simplex " + std::to_string(top));
    const Mat m = lw.local_mass();
    for (int f = 0; f < nf; ++f)
      for (int g = 0; g < nf; ++g) {
        const int gf = lw.global_face(f), gg = lw.global_face(g);
        if (bundle.trivial()) {
          for (int a = 0; a < r; ++a) t.emplace_back(gf * r + a, gg * r + a, m(f, g));
          continue;
        }
        const int bf = mesh.simplex(p, gf)[0], bg = mesh.simplex(p, gg)[0];
        const Mat q = bundle.transport(mesh, bf, bg);
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b)
            if (q(a, b) != 0.0) t.emplace_back(gf * r + a, gg * r + b, m(f, g) * q(a, b));
      }
  }
  OperatorMatrix op;
  op.rows = op.cols = {p, r, BoundaryCondition::neumann, size};
  op.matrix.resize(size, size);
  op.matrix.setFromTriplets(t.begin(), t.end());
  return op;
}

OperatorMatrix mass_matrix(const SimplicialMesh& mesh, int p, int rank) {
  return mass_matrix(mesh, p, FlatBundle::identity(rank, mesh.count(1)));
}

OperatorMatrix restrict_operator(const OperatorMatrix& op, const DofMap& rows, const DofMap& cols) {
  if (op.matrix.rows() != rows.full_size() || op.matrix.cols() != cols.full_size())
    throw Error(ErrorCode::ShapeMismatch, "restriction does not match operator shape");
  OperatorMatrix out;
  out.rows = rows.signature();
  out.cols = cols.signature();
  out.matrix = rows.selector() * op.matrix * cols.selector().transpose();
  return out;
}

Codifferential::Codifferential(const OperatorMatrix& d, const OperatorMatrix& m_p, const OperatorMatrix& m_p1) {
  if (d.matrix.rows() != m_p1.matrix.rows() || d.matrix.cols() != m_p.matrix.rows() ||
      m_p.matrix.rows() != m_p.matrix.cols() || m_p1.matrix.rows() != m_p1.matrix.cols())
    throw Error(ErrorCode::ShapeMismatch, "codifferential operand shapes disagree");
  dt_m_ = SpMat(d.matrix.transpose()) * m_p1.matrix;
  mass_ = std::make_shared<SpdSolver>(m_p.matrix);
}

Vec Codifferential::apply(const Vec& b) const { return mass_->solve(Vec(dt_m_ * b)); }

Mat Codifferential::to_dense() const { return mass_->solve(Mat(dt_m_)); }

Codifferential codifferential(const OperatorMatrix& d, const OperatorMatrix& m_p, const OperatorMatrix& m_p1) {
  return Codifferential(d, m_p, m_p1);
}

namespace {

class CholeskyShifted final : public ShiftedSolver {
 public:
  explicit CholeskyShifted(const SpMat& a) : llt_(a) {}
  Vec solve(const Vec& b) const override { return llt_.solve(b); }

 private:
  SpdSolver llt_;
};

// [[-M_lo, B], [B^T, C + s M]] [sigma; u] = [0; b]
class MixedShifted final : public ShiftedSolver {
 public:
  MixedShifted(const SpMat& m_lo, const SpMat& b, const SpMat& c_shift)
      : n_lo_(static_cast<int>(m_lo.rows())), n_(static_cast<int>(c_shift.rows())), lu_(assemble(m_lo, b, c_shift)) {}

  Vec solve(const Vec& rhs) const override {
    Vec full = Vec::Zero(n_lo_ + n_);
    full.tail(n_) = rhs;
    return lu_.solve(full).tail(n_);
  }

 private:
  static SpMat assemble(const SpMat& m_lo, const SpMat& b, const SpMat& c) {
    const int nl = static_cast<int>(m_lo.rows()), n = static_cast<int>(c.rows());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(m_lo.nonZeros() + 2 * b.nonZeros() + c.nonZeros()));
    for (int k = 0; k < m_lo.outerSize(); ++k)
      for (SpMat::InnerIterator it(m_lo, k); it; ++it) t.emplace_back(it.row(), it.col(), -it.value());
    for (int k = 0; k < b.outerSize(); ++k)
      for (SpMat::InnerIterator it(b, k); it; ++it) {
        t.emplace_back(it.row(), nl + it.col(), it.value());
        t.emplace_back(nl + it.col(), it.row(), it.value());
      }
    for (int k = 0; k < c.outerSize(); ++k)
      for (SpMat::InnerIterator it(c, k); it; ++it) t.emplace_back(nl + it.row(), nl + it.col(), it.value());
    SpMat k(nl + n, nl + n);
    k.setFromTriplets(t.begin(), t.end());
    return k;
  }

  int n_lo_, n_;
  LuSolver lu_;
};

}  // namespace

HodgeLaplacian::HodgeLaplacian(const SimplicialMesh& mesh, int p, const FlatBundle& bundle, BoundaryCondition bc)
    : mesh_(&mesh), bundle_(&bundle), p_(p), bc_(bc) {
  const int n = mesh.dim(), r = bundle.rank();
  if (p < 0 || p > n) throw Error(ErrorCode::DegreeOutOfRange, "Laplacian degree out of range");
  if (bundle.edge_count() != mesh.count(1)) throw Error(ErrorCode::ShapeMismatch, "bundle built on another mesh");
  dofs_ = DofMap(mesh, p, r, bc);
  m_full_ = mass_matrix(mesh, p, bundle).matrix;
  m_ = dofs_.selector() * m_full_ * dofs_.selector().transpose();
  m_solver_ = std::make_shared<SpdSolver>(m_);
  if (p > 0) {
    lower_ = DofMap(mesh, p - 1, r, bc);
    const SpMat sel = lower_.selector();
    m_lo_ = sel * mass_matrix(mesh, p - 1, bundle).matrix * sel.transpose();
    d_lo_ = restrict_operator(exterior_derivative(mesh, p - 1, bundle), dofs_, lower_).matrix;
    b_ = SpMat(d_lo_.transpose()) * m_;
    m_lo_solver_ = std::make_shared<SpdSolver>(m_lo_);
  }
  if (p < n) {
    upper_ = DofMap(mesh, p + 1, r, bc);
    const SpMat sel = upper_.selector();
    m_hi_ = sel * mass_matrix(mesh, p + 1, bundle).matrix * sel.transpose();
    d_hi_ = restrict_operator(exterior_derivative(mesh, p, bundle), upper_, dofs_).matrix;
    c_ = SpMat(d_hi_.transpose()) * m_hi_ * d_hi_;
  } else {
    c_.resize(dofs_.size(), dofs_.size());
  }
}

Vec HodgeLaplacian::apply_stiffness(const Vec& u) const {
  Vec out = c_ * u;
  if (p_ > 0 && lower_.size() > 0) out += b_.transpose() * m_lo_solver_->solve(Vec(b_ * u));
  return out;
}

Vec HodgeLaplacian::apply(const Vec& u) const { return m_solver_->solve(apply_stiffness(u)); }

Vec HodgeLaplacian::codifferential(const Vec& u) const {
  if (p_ == 0) return Vec();
  if (lower_.size() == 0) return Vec::Zero(0);
  return m_lo_solver_->solve(Vec(b_ * u));
}

Vec HodgeLaplacian::derivative(const Vec& u) const {
  if (p_ == mesh_->dim()) return Vec();
  return d_hi_ * u;
}

Vec HodgeLaplacian::solve_mass(const Vec& b) const { return m_solver_->solve(b); }

Mat HodgeLaplacian::dense_stiffness() const {
  Mat s = Mat(c_);
  if (p_ > 0 && lower_.size() > 0) {
    const Mat b = Mat(b_);
    s += b.transpose() * m_lo_solver_->solve(b);
  }
  return 0.5 * (s + s.transpose());
}

double HodgeLaplacian::spectral_scale() const {
  double s = 0.0, m = 0.0;
  const Vec dm = m_.diagonal();
  m = dm.sum();
  s = c_.diagonal().sum();
  if (p_ > 0 && lower_.size() > 0) {
    const Vec inv_lo = m_lo_.diagonal().cwiseInverse();
    for (int k = 0; k < b_.outerSize(); ++k)
      for (SpMat::InnerIterator it(b_, k); it; ++it) s += it.value() * it.value() * inv_lo[it.row()];
  }
  return m > 0.0 ? s / m : 1.0;
}

std::shared_ptr<const ShiftedSolver> HodgeLaplacian::factor(double shift) const {
  SpMat c = c_;
  if (shift != 0.0) c += shift * m_;
  if (p_ == 0 || lower_.size() == 0) return std::make_shared<CholeskyShifted>(c);
  return std::make_shared<MixedShifted>(m_lo_, b_, c);
}

WhitneyEvaluator::WhitneyEvaluator(const SimplicialMesh& mesh, int p, const FlatBundle& bundle)
    : mesh_(&mesh), bundle_(&bundle), p_(p), comps_(binomial(mesh.dim(), p)) {
  const int n = mesh.dim();
  check_degree(mesh, p, n);
  auto make_site = [&](int top, const LocalWhitney& lw, const Vec& lambda) {
    Site site;
    site.top = top;
    site.weights = lw.values(lambda);
    const int base = mesh.simplex(n, top)[0];
    for (int f = 0; f < lw.face_count(); ++f) {
      const int g = lw.global_face(f);
      site.faces.push_back(g);
      const int fb = mesh.simplex(p, g)[0];
      site.transport_edge.push_back(fb == base || bundle.trivial() ? -1 : mesh.edge(base, fb));
    }
    return site;
  };
  vol_.resize(mesh.count(n));
  for (int t = 0; t < mesh.count(n); ++t) {
    LocalWhitney lw(mesh, t, p);
    vol_[t] = lw.volume();
    interior_.push_back(make_site(t, lw, Vec::Constant(n + 1, 1.0 / (n + 1))));
  }
  std::vector<double> bv;
  for (int f = 0; f < mesh.count(n - 1); ++f) {
    if (!mesh.on_boundary(n - 1, f)) continue;
    const int t = mesh.facet_tops(f)[0];
    auto fs = mesh.faces(n, t);
    const int j = static_cast<int>(std::find(fs.begin(), fs.end(), f) - fs.begin());
    Vec lambda = Vec::Constant(n + 1, 1.0 / n);
    lambda[j] = 0.0;
    LocalWhitney lw(mesh, t, p);
    boundary_.push_back(make_site(t, lw, lambda));
    bfacets_.push_back(f);
    bv.push_back(mesh.volume(n - 1, f));
  }
  bvol_ = Eigen::Map<Vec>(bv.data(), static_cast<Eigen::Index>(bv.size()));
}

Mat WhitneyEvaluator::evaluate(const Site& site, const Vec& full) const {
  const int r = bundle_->rank();
  Mat out = Mat::Zero(comps_, r);
  for (std::size_t f = 0; f < site.faces.size(); ++f) {
    Vec c = full.segment(static_cast<Eigen::Index>(site.faces[f]) * r, r);
    if (site.transport_edge[f] >= 0) c = bundle_->edge_transport(site.transport_edge[f]) * c;
    out.noalias() += site.weights.col(static_cast<Eigen::Index>(f)) * c.transpose();
  }
  return out;
}

Mat WhitneyEvaluator::value(const Vec& full, int top) const {
  return evaluate(interior_[static_cast<std::size_t>(top)], full);
}

Vec WhitneyEvaluator::interior_norms(const Vec& full) const {
  Vec out(static_cast<Eigen::Index>(interior_.size()));
  for (std::size_t i = 0; i < interior_.size(); ++i) out[static_cast<Eigen::Index>(i)] = evaluate(interior_[i], full).norm();
  return out;
}

Vec WhitneyEvaluator::boundary_norms(const Vec& full) const {
  Vec out(static_cast<Eigen::Index>(boundary_.size()));
  for (std::size_t i = 0; i < boundary_.size(); ++i) out[static_cast<Eigen::Index>(i)] = evaluate(boundary_[i], full).norm();
  return out;
}

double weighted_lq(const Vec& pointwise, const Vec& weights, double q) {
  if (!(q >= 1.0)) throw Error(ErrorCode::InvalidExponent, "exponent must be at least 1");
  if (pointwise.size() == 0) return 0.0;
  if (std::isinf(q)) return pointwise.cwiseAbs().maxCoeff();
  const double peak = pointwise.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pointwise.size(); ++i) acc += weights[i] * std::pow(std::abs(pointwise[i]) / peak, q);
  return peak * std::pow(acc, 1.0 / q);
}

double lq_norm(const Cochain& c, const SimplicialMesh& mesh, double q, NormDomain domain, const FlatBundle* bundle) {
  if (!(q >= 1.0)) throw Error(ErrorCode::InvalidExponent, "exponent must be at least 1");
  FlatBundle trivial;
  if (bundle == nullptr) {
    trivial = FlatBundle::identity(c.rank, mesh.count(1));
    bundle = &trivial;
  }
  WhitneyEvaluator eval(mesh, c.degree, *bundle);
  if (domain == NormDomain::interior) return weighted_lq(eval.interior_norms(c.values), eval.interior_weights(), q);
  return weighted_lq(eval.boundary_norms(c.values), eval.boundary_weights(), q);
}

}  // namespace greenforms
