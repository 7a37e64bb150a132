#include "greenforms/dbar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "greenforms/errors.hpp"
#include "greenforms/rng.hpp"

namespace greenforms {

PlanarDomain disk_domain(int cells_per_unit, const Weight& phi) {
  if (cells_per_unit < 4) throw Error(ErrorCode::InvalidParams, "grid needs at least 4 cells per unit");
  PlanarDomain d;
  d.h = 1.0 / cells_per_unit;
  const int pad = cells_per_unit + 2;
  d.side = 2 * pad + 1;
  d.origin = -pad * d.h;
  const int count = d.side * d.side;
  d.interior.assign(static_cast<std::size_t>(count), 0);
  d.rho.resize(count);
  d.phi.resize(count);
  d.laplace_phi = Vec::Zero(count);
  for (int j = 0; j < d.side; ++j)
    for (int i = 0; i < d.side; ++i) {
      const int v = d.node(i, j);
      const double x = d.x(i), y = d.x(j);
      d.rho[v] = x * x + y * y - 1.0;
      d.phi[v] = phi ? phi(x, y) : x * x + y * y;
      d.interior[static_cast<std::size_t>(v)] = d.rho[v] < 0.0;
    }

  int first = -1, total = 0;
  d.epsilon = std::numeric_limits<double>::infinity();
  for (int j = 1; j + 1 < d.side; ++j)
    for (int i = 1; i + 1 < d.side; ++i) {
      const int v = d.node(i, j);
      if (!d.interior[static_cast<std::size_t>(v)]) continue;
      if (first < 0) first = v;
      ++total;
      d.laplace_phi[v] = (d.phi[v + 1] + d.phi[v - 1] + d.phi[v + d.side] + d.phi[v - d.side] - 4.0 * d.phi[v]) /
                         (d.h * d.h);
      d.epsilon = std::min(d.epsilon, d.laplace_phi[v]);
    }

  std::vector<char> seen(static_cast<std::size_t>(count), 0);
  std::queue<int> queue;
  queue.push(first);
  seen[static_cast<std::size_t>(first)] = 1;
  int reached = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop();
    ++reached;
    for (int w : {v + 1, v - 1, v + d.side, v - d.side})
      if (d.interior[static_cast<std::size_t>(w)] && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        queue.push(w);
      }
  }
  if (reached != total) throw Error(ErrorCode::DisconnectedInterior, "grid interior is not 4-connected");
  return d;
}

namespace {

Vec stack(const CVec& c) {
  Vec r(2 * c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    r[2 * i] = c[i].real();
    r[2 * i + 1] = c[i].imag();
  }
  return r;
}

CVec unstack(const Vec& r) {
  CVec c(r.size() / 2);
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = {r[2 * i], r[2 * i + 1]};
  return c;
}

Vec doubled(const Vec& w) {
  Vec r(2 * w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) r[2 * i] = r[2 * i + 1] = w[i];
  return r;
}

}  // namespace

DbarSystem build_system(const PlanarDomain& d) {
  DbarSystem s;
  s.domain = &d;
  const int count = d.side * d.side;
  std::vector<int> u_index(static_cast<std::size_t>(count), -1);
  for (int v = 0; v < count; ++v)
    if (d.interior[static_cast<std::size_t>(v)]) s.f_nodes.push_back(v);
  for (int v : s.f_nodes)
    for (int w : {v, v + 1, v + d.side}) u_index[static_cast<std::size_t>(w)] = 0;
  for (int v = 0; v < count; ++v)
    if (u_index[static_cast<std::size_t>(v)] == 0) {
      u_index[static_cast<std::size_t>(v)] = static_cast<int>(s.u_nodes.size());
      s.u_nodes.push_back(v);
    }

  const double c = 0.5 / d.h;
  std::vector<Eigen::Triplet<double>> tb, td;
  for (std::size_t r = 0; r < s.f_nodes.size(); ++r) {
    const int v = s.f_nodes[r];
    const int re = 2 * static_cast<int>(r), im = re + 1;
    const int p = 2 * u_index[static_cast<std::size_t>(v)];
    const int px = 2 * u_index[static_cast<std::size_t>(v + 1)];
    const int py = 2 * u_index[static_cast<std::size_t>(v + d.side)];
    // u = a + ib.  dbar u = ((a_x - b_y) + i (b_x + a_y)) / 2
    tb.insert(tb.end(), {{re, px, c}, {re, p, -c}, {re, py + 1, -c}, {re, p + 1, c},
                         {im, px + 1, c}, {im, p + 1, -c}, {im, py, c}, {im, p, -c}});
    // del u = ((a_x + b_y) + i (b_x - a_y)) / 2
    td.insert(td.end(), {{re, px, c}, {re, p, -c}, {re, py + 1, c}, {re, p + 1, -c},
                         {im, px + 1, c}, {im, p + 1, -c}, {im, py, -c}, {im, p, c}});
  }
  const auto rows = static_cast<Eigen::Index>(2 * s.f_nodes.size());
  const auto cols = static_cast<Eigen::Index>(2 * s.u_nodes.size());
  s.dbar.resize(rows, cols);
  s.dbar.setFromTriplets(tb.begin(), tb.end());
  s.del.resize(rows, cols);
  s.del.setFromTriplets(td.begin(), td.end());

  const double area = d.h * d.h;
  s.weight_f.resize(static_cast<Eigen::Index>(s.f_nodes.size()));
  s.a.resize(s.weight_f.size());
  for (std::size_t r = 0; r < s.f_nodes.size(); ++r) {
    const int v = s.f_nodes[r];
    s.weight_f[static_cast<Eigen::Index>(r)] = std::exp(-d.phi[v]) * area;
    s.a[static_cast<Eigen::Index>(r)] = d.laplace_phi[v] / 4.0;
  }
  s.weight_u.resize(static_cast<Eigen::Index>(s.u_nodes.size()));
  for (std::size_t r = 0; r < s.u_nodes.size(); ++r)
    s.weight_u[static_cast<Eigen::Index>(r)] = std::exp(-d.phi[s.u_nodes[r]]) * area;
  return s;
}

CVec DbarSystem::apply(const CVec& u) const { return unstack(dbar * stack(u)); }

CVec DbarSystem::adjoint(const CVec& v) const {
  const Vec wv = doubled(weight_f).cwiseProduct(stack(v));
  return unstack(Vec(dbar.transpose() * wv).cwiseQuotient(doubled(weight_u)));
}

CVec DbarSystem::del_adjoint(const CVec& v) const { return unstack(del.transpose() * stack(v)); }

double DbarSystem::norm2_f(const CVec& f) const { return weight_f.dot(f.cwiseAbs2()); }

double DbarSystem::norm2_u(const CVec& u) const { return weight_u.dot(u.cwiseAbs2()); }

namespace {

CVec sample(const PlanarDomain& d, const std::vector<int>& nodes,
            const std::function<std::complex<double>(std::complex<double>)>& g) {
  CVec out(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) out[static_cast<Eigen::Index>(i)] = g(d.z(nodes[i]));
  return out;
}

}  // namespace

CVec sample_f(const DbarSystem& s, const std::function<std::complex<double>(std::complex<double>)>& g) {
  return sample(*s.domain, s.f_nodes, g);
}

CVec sample_u(const DbarSystem& s, const std::function<std::complex<double>(std::complex<double>)>& g) {
  return sample(*s.domain, s.u_nodes, g);
}

MinimalSolver::MinimalSolver(const DbarSystem& system) : system_(&system) {
  const Vec inv = doubled(system.weight_u).cwiseInverse();
  const SpMat normal = system.dbar * inv.asDiagonal() * SpMat(system.dbar.transpose());
  try {
    normal_ = std::make_unique<SpdSolver>(normal);
  } catch (const Error& e) {
    throw Error(ErrorCode::RankDeficient, std::string("normal equations: ") + e.what());
  }
}

MinimalSolver::~MinimalSolver() = default;

CVec MinimalSolver::solve(const CVec& f, double* residual) const {
  const DbarSystem& s = *system_;
  if (f.size() != static_cast<Eigen::Index>(s.f_nodes.size()))
    throw Error(ErrorCode::ShapeMismatch, "data does not live on the f-nodes");
  const Vec rhs = stack(f);
  const Vec lambda = normal_->solve(rhs);
  const Vec u = Vec(s.dbar.transpose() * lambda).cwiseQuotient(doubled(s.weight_u));
  const double nf = rhs.norm();
  const double res = nf > 0.0 ? (s.dbar * u - rhs).norm() / nf : 0.0;
  if (residual) *residual = res;
  if (!std::isfinite(res) || res > 1e-10) {
    std::ostringstream msg;
    msg << "constraint residual " << res;
    throw Error(ErrorCode::RankDeficient, msg.str());
  }
  return unstack(u);
}

std::vector<CVec> band_limited_ensemble(const DbarSystem& s, int size, std::uint64_t seed, int bandwidth) {
  const PlanarDomain& d = *s.domain;
  const Rng root(seed);
  std::vector<CVec> out;
  for (int m = 0; m < size; ++m) {
    Rng rng = root.split(static_cast<std::uint64_t>(m));
    CVec f = CVec::Zero(static_cast<Eigen::Index>(s.f_nodes.size()));
    for (int ky = -bandwidth; ky <= bandwidth; ++ky)
      for (int kx = -bandwidth; kx <= bandwidth; ++kx) {
        const std::complex<double> c(rng.normal(), rng.normal());
        for (std::size_t i = 0; i < s.f_nodes.size(); ++i) {
          const auto z = d.z(s.f_nodes[i]);
          f[static_cast<Eigen::Index>(i)] += c * std::polar(1.0, std::numbers::pi * (kx * z.real() + ky * z.imag()));
        }
      }
    out.push_back(f / std::sqrt(s.norm2_f(f)));
  }
  return out;
}

std::vector<double> default_delta_grid() {
  std::vector<double> g(81);
  for (int i = 0; i < 81; ++i) g[static_cast<std::size_t>(i)] = std::pow(10.0, -6.0 + 8.0 * i / 80.0);
  return g;
}

ImprovedReport improved_estimate_check(const DbarSystem& s, const std::vector<CVec>& ensemble,
                                       const std::vector<double>& grid) {
  if (s.a.size() == 0 || s.a.minCoeff() <= 0.0)
    throw Error(ErrorCode::InvalidParams, "curvature A must be positive on the interior");
  ImprovedReport rep;
  rep.h = s.domain->h;
  rep.epsilon = s.domain->epsilon;
  rep.min_delta_hat = std::numeric_limits<double>::infinity();
  const MinimalSolver solver(s);
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    const CVec& f = ensemble[m];
    ImprovedSample smp;
    smp.f2 = s.norm2_f(f);
    if (smp.f2 == 0.0) continue;
    double res = 0.0;
    const CVec u = solver.solve(f, &res);
    rep.max_residual = std::max(rep.max_residual, res);
    smp.u2 = s.norm2_u(u);
    smp.nf = s.weight_f.dot(f.cwiseAbs2().cwiseQuotient(s.a));
    rep.max_baseline_ratio = std::max(rep.max_baseline_ratio, smp.u2 / smp.nf);
    if (smp.u2 > smp.nf) {
      std::ostringstream msg;
      msg << "sample " << m << ": |u|^2 = " << smp.u2 << " exceeds N_f = " << smp.nf;
      throw Error(ErrorCode::BaselineViolated, msg.str());
    }
    const double ratio = smp.nf / smp.u2;
    smp.delta_star = smp.f2 * (ratio * ratio - 1.0) / smp.nf;
    for (double g : grid)
      if (g <= smp.delta_star) smp.delta_hat = std::max(smp.delta_hat, g);
    rep.min_delta_hat = std::min(rep.min_delta_hat, smp.delta_hat);
    rep.samples.push_back(smp);
  }
  if (rep.samples.empty()) rep.min_delta_hat = 0.0;
  return rep;
}

L2SobolevReport l2_sobolev_check(const DbarSystem& s, const std::vector<CVec>& ensemble) {
  const PlanarDomain& d = *s.domain;
  auto inside = [&](int v) { return d.interior[static_cast<std::size_t>(v)] != 0; };
  std::vector<char> complete(s.u_nodes.size(), 0);
  for (std::size_t i = 0; i < s.u_nodes.size(); ++i) {
    const int v = s.u_nodes[i];
    complete[i] = inside(v) && inside(v - 1) && inside(v - d.side);
  }
  std::vector<char> staircase(s.f_nodes.size(), 0);
  for (std::size_t i = 0; i < s.f_nodes.size(); ++i) {
    const int v = s.f_nodes[i];
    staircase[i] = !inside(v + 1) || !inside(v - 1) || !inside(v + d.side) || !inside(v - d.side);
  }
  const double area = d.h * d.h;
  L2SobolevReport rep;
  rep.h = d.h;
  rep.delta_hat = std::numeric_limits<double>::infinity();
  for (const CVec& f : ensemble) {
    const double lhs = std::sqrt(area * f.squaredNorm());
    if (lhs == 0.0) continue;
    const CVec g = s.del_adjoint(f);
    double star = 0.0, bnd = 0.0;
    for (std::size_t i = 0; i < s.u_nodes.size(); ++i)
      if (complete[i]) star += std::norm(g[static_cast<Eigen::Index>(i)]);
    for (std::size_t i = 0; i < s.f_nodes.size(); ++i)
      if (staircase[i]) bnd += std::norm(f[static_cast<Eigen::Index>(i)]);
    const double ratio = (std::sqrt(area * star) + std::sqrt(d.h * bnd)) / lhs;
    ++rep.samples;
    rep.ratios.push_back(ratio);
    rep.delta_hat = std::min(rep.delta_hat, ratio);
  }
  if (rep.samples == 0) rep.delta_hat = 0.0;
  return rep;
}

MonotonicityReport monotonicity_check(int cells_per_unit, const Weight& phi, int ensemble, std::uint64_t seed) {
  const Weight base = phi ? phi : Weight([](double x, double y) { return x * x + y * y; });
  const PlanarDomain d1 = disk_domain(cells_per_unit, base);
  const PlanarDomain d2 = disk_domain(cells_per_unit, [&base](double x, double y) { return 2.0 * base(x, y); });
  const DbarSystem s1 = build_system(d1), s2 = build_system(d2);
  const auto data = band_limited_ensemble(s1, ensemble, seed);
  const auto grid = default_delta_grid();
  const ImprovedReport r1 = improved_estimate_check(s1, data, grid);
  const ImprovedReport r2 = improved_estimate_check(s2, data, grid);
  MonotonicityReport rep;
  rep.grid_step = grid[1] / grid[0];
  for (std::size_t i = 0; i < r1.samples.size(); ++i) {
    rep.delta_hat.push_back(r1.samples[i].delta_hat);
    rep.delta_hat_doubled.push_back(r2.samples[i].delta_hat);
    if (r2.samples[i].delta_hat < r1.samples[i].delta_hat / rep.grid_step * (1.0 - 1e-12)) ++rep.violations;
  }
  return rep;
}

}  // namespace greenforms
