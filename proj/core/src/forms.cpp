#include "greenforms/forms.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "greenforms/errors.hpp"

namespace greenforms {

namespace {

struct Gauss {
  std::vector<double> x, w;  // on [0, 1]
};

Gauss gauss_legendre(int m) {
  // Newton on P_m, then map from [-1, 1]
  Gauss g;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    g.x.push_back(0.5 * (1.0 - z));
    g.w.push_back(1.0 / ((1.0 - z * z) * dp * dp));
  }
  return g;
}

struct SimplexRule {
  std::vector<Vec> xi;  // reference coordinates (length p)
  std::vector<double> w;
};

// Duffy-collapsed product rule on {xi >= 0, sum xi <= 1}
SimplexRule simplex_rule(int p, int m) {
  SimplexRule r;
  if (p == 0) {
    r.xi.emplace_back(0);
    r.w.push_back(1.0);
    return r;
  }
  const Gauss g = gauss_legendre(m);
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  while (true) {
    Vec xi(p);
    double w = 1.0, rest = 1.0;
    for (int d = 0; d < p; ++d) {
      const double t = g.x[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
      w *= g.w[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])] * rest;
      xi[d] = rest * t;
      rest *= 1.0 - t;
    }
    r.xi.push_back(xi);
    r.w.push_back(w);
    int d = p - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == m) idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  return r;
}

}  // namespace

Cochain interpolate(const SimplicialMesh& mesh, int p, int rank, const FormField& field, int order) {
  const int n = mesh.dim();
  if (p < 0 || p > n) throw Error(ErrorCode::DegreeOutOfRange, "interpolation degree out of range");
  const auto multi = combinations(n, p);
  const SimplexRule rule = simplex_rule(p, order);
  Cochain c = Cochain::zeros(mesh, p, rank);
  for (int i = 0; i < mesh.count(p); ++i) {
    const auto pts = mesh.coordinates(p, i);
    Mat tangent(n, p);
    for (int j = 0; j < p; ++j) tangent.col(j) = (pts.col(j + 1) - pts.col(0)).head(n);
    Vec minors(static_cast<Eigen::Index>(multi.size()));
    for (std::size_t m = 0; m < multi.size(); ++m) {
      if (p == 0) {
        minors[0] = 1.0;
        break;
      }
      Mat sub(p, p);
      for (int r = 0; r < p; ++r) sub.row(r) = tangent.row(multi[m][static_cast<std::size_t>(r)]);
      minors[static_cast<Eigen::Index>(m)] = sub.determinant();
    }
    Vec acc = Vec::Zero(rank);
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      Point x = pts.col(0);
      for (int j = 0; j < p; ++j) x += rule.xi[q][j] * (pts.col(j + 1) - pts.col(0));
      const Vec v = field(x);
      for (std::size_t m = 0; m < multi.size(); ++m)
        acc += rule.w[q] * minors[static_cast<Eigen::Index>(m)] *
               v.segment(static_cast<Eigen::Index>(m) * rank, rank);
    }
    c.at(i) = acc;
  }
  return c;
}

FormField random_smooth_form(int n, int p, int rank, Rng& rng, int waves, double max_frequency) {
  const int comps = binomial(n, p) * rank;
  struct Wave {
    Eigen::Vector3d k;
    double phase;
    Vec amp;
  };
  std::vector<Wave> list;
  for (int w = 0; w < waves; ++w) {
    Wave wave;
    wave.k.setZero();
    for (int d = 0; d < n; ++d) wave.k[d] = rng.uniform(-max_frequency, max_frequency);
    wave.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    wave.amp.resize(comps);
    for (int c = 0; c < comps; ++c) wave.amp[c] = rng.normal();
    list.push_back(std::move(wave));
  }
  return [list, comps](const Point& x) {
    Vec v = Vec::Zero(comps);
    for (const auto& w : list) v += std::cos(w.k.dot(x) + w.phase) * w.amp;
    return v;
  };
}

Cochain to_bundle_frame(const SimplicialMesh& mesh, const FlatBundle& bundle, const Cochain& c) {
  if (!bundle.has_gauge()) return c;
  if (c.rank != bundle.rank()) throw Error(ErrorCode::ShapeMismatch, "cochain rank differs from bundle rank");
  Cochain out = c;
  for (int i = 0; i < c.simplex_count(); ++i) out.at(i) = bundle.gauge(mesh.simplex(c.degree, i)[0]) * c.at(i);
  return out;
}

double mass_inner(const SpMat& mass, const Vec& a, const Vec& b) { return a.dot(mass * b); }

double mass_norm(const SpMat& mass, const Vec& a) { return std::sqrt(std::max(0.0, mass_inner(mass, a, a))); }

}  // namespace greenforms
