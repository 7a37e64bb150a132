#include "greenforms/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>

#include <Eigen/Dense>

#include "greenforms/errors.hpp"

namespace greenforms {

namespace {

constexpr double kPi = std::numbers::pi;

std::array<int, 4> make_key(std::span<const int> verts) {
  std::array<int, 4> key{-1, -1, -1, -1};
  std::copy(verts.begin(), verts.end(), key.begin());
  return key;
}

int factorial(int n) {
  int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// parity of the permutation sorting `v`, as +1/-1
int sort_with_parity(std::vector<int>& v) {
  int sign = 1;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j + 1 < v.size() - i; ++j)
      if (v[j] > v[j + 1]) {
        std::swap(v[j], v[j + 1]);
        sign = -sign;
      }
  return sign;
}

double gram_volume(const Eigen::Matrix<double, 3, Eigen::Dynamic>& pts, int ambient) {
  const int k = static_cast<int>(pts.cols()) - 1;
  if (k == 0) return 1.0;
  Eigen::MatrixXd e(ambient, k);
  for (int j = 0; j < k; ++j) e.col(j) = (pts.col(j + 1) - pts.col(0)).head(ambient);
  const double g = (e.transpose() * e).determinant();
  return std::sqrt(std::max(g, 0.0)) / factorial(k);
}

double signed_volume(const Eigen::Matrix<double, 3, Eigen::Dynamic>& pts, int dim) {
  Eigen::MatrixXd e(dim, dim);
  for (int j = 0; j < dim; ++j) e.col(j) = (pts.col(j + 1) - pts.col(0)).head(dim);
  return e.determinant() / factorial(dim);
}

}  // namespace

Shape parse_shape(const std::string& name) {
  if (name == "disk") return Shape::disk;
  if (name == "annulus") return Shape::annulus;
  if (name == "box3d") return Shape::box3d;
  if (name == "torus2d") return Shape::torus2d;
  throw Error(ErrorCode::InvalidParams, "unknown shape '" + name + "'");
}

std::string shape_name(Shape shape) {
  switch (shape) {
    case Shape::disk: return "disk";
    case Shape::annulus: return "annulus";
    case Shape::box3d: return "box3d";
    case Shape::torus2d: return "torus2d";
  }
  return "unknown";
}

std::size_t SimplicialMesh::KeyHash::operator()(const std::array<int, 4>& key) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  for (int v : key) h = (h ^ static_cast<std::size_t>(v + 1)) * 0x100000001b3ULL;
  return h;
}

int SimplicialMesh::count(int k) const {
  if (k < 0 || k > dim_) return 0;
  return static_cast<int>(simplices_[k].size()) / (k + 1);
}

int SimplicialMesh::find(std::span<const int> sorted_vertices) const {
  auto it = index_.find(make_key(sorted_vertices));
  return it == index_.end() ? -1 : it->second;
}

int SimplicialMesh::edge(int a, int b) const {
  const int key[2] = {std::min(a, b), std::max(a, b)};
  return find(key);
}

Eigen::Vector3d SimplicialMesh::displacement(int a, int b) const {
  Eigen::Vector3d d = vertex(b) - vertex(a);
  for (int c = 0; c < 3; ++c)
    if (period_[c] > 0.0) d[c] -= period_[c] * std::round(d[c] / period_[c]);
  return d;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> SimplicialMesh::coordinates(int k, int i) const {
  auto s = simplex(k, i);
  Eigen::Matrix<double, 3, Eigen::Dynamic> pts(3, k + 1);
  pts.col(0) = vertex(s[0]);
  for (int j = 1; j <= k; ++j) pts.col(j) = pts.col(0) + displacement(s[0], s[j]);
  return pts;
}

double SimplicialMesh::volume(int k, int i) const { return gram_volume(coordinates(k, i), ambient_dim_); }

Point SimplicialMesh::barycenter(int k, int i) const { return coordinates(k, i).rowwise().mean(); }

double SimplicialMesh::total_volume() const {
  double v = 0.0;
  for (int t = 0; t < count(dim_); ++t) v += volume(dim_, t);
  return v;
}

double SimplicialMesh::boundary_volume() const {
  if (dim_ == 0) return 0.0;
  double v = 0.0;
  for (int f = 0; f < count(dim_ - 1); ++f)
    if (on_boundary(dim_ - 1, f)) v += volume(dim_ - 1, f);
  return v;
}

double SimplicialMesh::mesh_width() const {
  const int n = count(dim_);
  if (n == 0 || dim_ == 0) return 0.0;
  return std::pow(factorial(dim_) * total_volume() / n, 1.0 / dim_);
}

double SimplicialMesh::max_edge_length() const {
  double h = 0.0;
  for (int e = 0; e < count(1); ++e) h = std::max(h, volume(1, e));
  return h;
}

double SimplicialMesh::max_aspect_ratio() const {
  if (dim_ < 2) return 1.0;
  double worst = 1.0;
  for (int t = 0; t < count(dim_); ++t) {
    auto pts = coordinates(dim_, t);
    double hmax = 0.0;
    for (int a = 0; a <= dim_; ++a)
      for (int b = a + 1; b <= dim_; ++b) hmax = std::max(hmax, (pts.col(a) - pts.col(b)).norm());
    double area = 0.0;
    for (int j = 0; j <= dim_; ++j) {
      Eigen::Matrix<double, 3, Eigen::Dynamic> face(3, dim_);
      for (int c = 0, col = 0; c <= dim_; ++c)
        if (c != j) face.col(col++) = pts.col(c);
      area += gram_volume(face, ambient_dim_);
    }
    const double inradius = dim_ * gram_volume(pts, ambient_dim_) / area;
    const double regular = dim_ == 2 ? 2.0 * std::sqrt(3.0) : 2.0 * std::sqrt(6.0);
    worst = std::max(worst, hmax / (regular * inradius));
  }
  return worst;
}

SimplicialMesh SimplicialMesh::from_top_simplices(int dim, int ambient_dim, std::vector<Point> vertices,
                                                  const std::vector<int>& tops, const std::vector<int>& signs,
                                                  const Eigen::Vector3d& period) {
  if (dim < 0 || dim > 3 || ambient_dim < dim || ambient_dim > 3)
    throw Error(ErrorCode::InvalidMesh, "unsupported dimensions");
  if (tops.size() % static_cast<std::size_t>(dim + 1) != 0)
    throw Error(ErrorCode::InvalidMesh, "top simplex list is not a multiple of dim+1");
  if (!signs.empty() && signs.size() != tops.size() / static_cast<std::size_t>(dim + 1))
    throw Error(ErrorCode::InvalidMesh, "orientation list length mismatch");
  if (signs.empty() && dim != ambient_dim && !tops.empty())
    throw Error(ErrorCode::InvalidMesh, "embedded complexes need explicit orientations");
  SimplicialMesh m;
  m.dim_ = dim;
  m.ambient_dim_ = ambient_dim;
  m.vertices_ = std::move(vertices);
  m.period_ = period;
  m.build(tops, signs);
  return m;
}

void SimplicialMesh::build(const std::vector<int>& tops, const std::vector<int>& signs) {
  const int nv = static_cast<int>(vertices_.size());
  const int ntop = static_cast<int>(tops.size()) / (dim_ + 1);
  if (ntop == 0) {
    vertices_.clear();
    return;
  }

  simplices_[0].resize(static_cast<std::size_t>(nv));
  std::iota(simplices_[0].begin(), simplices_[0].end(), 0);
  for (int v = 0; v < nv; ++v) index_.emplace(make_key(std::span<const int>(&v, 1)), v);

  orientation_.resize(static_cast<std::size_t>(ntop));
  std::vector<int> sorted(static_cast<std::size_t>(dim_ + 1));
  if (dim_ > 0) {
    for (int t = 0; t < ntop; ++t) {
      std::copy_n(tops.begin() + static_cast<std::ptrdiff_t>(t) * (dim_ + 1), dim_ + 1, sorted.begin());
      for (int v : sorted)
        if (v < 0 || v >= nv) throw Error(ErrorCode::InvalidMesh, "vertex index out of range");
      const int parity = sort_with_parity(sorted);
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error(ErrorCode::InvalidMesh, "repeated vertex in simplex");
      const int id = static_cast<int>(simplices_[dim_].size()) / (dim_ + 1);
      if (!index_.emplace(make_key(sorted), id).second)
        throw Error(ErrorCode::InvalidMesh, "duplicate top simplex");
      simplices_[dim_].insert(simplices_[dim_].end(), sorted.begin(), sorted.end());
      orientation_[static_cast<std::size_t>(t)] = signs.empty() ? 0 : signs[static_cast<std::size_t>(t)] * parity;
    }
  } else {
    for (int t = 0; t < ntop; ++t) orientation_[static_cast<std::size_t>(t)] = signs.empty() ? 1 : signs[t];
  }

  for (int k = dim_ - 1; k >= 1; --k) {
    const int n_up = count(k + 1);
    for (int i = 0; i < n_up; ++i) {
      auto s = simplex(k + 1, i);
      for (int j = 0; j <= k + 1; ++j) {
        std::array<int, 4> key{-1, -1, -1, -1};
        for (int c = 0, col = 0; c <= k + 1; ++c)
          if (c != j) key[col++] = s[c];
        const int id = static_cast<int>(simplices_[k].size()) / (k + 1);
        if (index_.emplace(key, id).second) simplices_[k].insert(simplices_[k].end(), key.begin(), key.begin() + k + 1);
      }
    }
  }

  for (int k = 1; k <= dim_; ++k) {
    const int n = count(k);
    faces_[k].resize(static_cast<std::size_t>(n) * (k + 1));
    for (int i = 0; i < n; ++i) {
      auto s = simplex(k, i);
      for (int j = 0; j <= k; ++j) {
        std::array<int, 4> key{-1, -1, -1, -1};
        for (int c = 0, col = 0; c <= k; ++c)
          if (c != j) key[col++] = s[c];
        faces_[k][static_cast<std::size_t>(i) * (k + 1) + j] = index_.at(key);
      }
    }
  }

  if (dim_ > 0) {
    const int nf = count(dim_ - 1);
    facet_tops_.assign(static_cast<std::size_t>(nf), {-1, -1});
    for (int t = 0; t < ntop; ++t)
      for (int f : faces(dim_, t)) {
        auto& slot = facet_tops_[static_cast<std::size_t>(f)];
        if (slot[0] < 0)
          slot[0] = t;
        else if (slot[1] < 0)
          slot[1] = t;
        else
          throw Error(ErrorCode::InvalidMesh, "facet shared by more than two top simplices");
      }
  }

  for (int t = 0; t < ntop && dim_ > 0; ++t) {
    auto pts = coordinates(dim_, t);
    const double scale = std::pow((pts.rightCols(dim_).colwise() - pts.col(0)).colwise().norm().maxCoeff(), dim_);
    const double vol = gram_volume(pts, ambient_dim_);
    if (!(vol > 1e-12 * scale)) throw Error(ErrorCode::DegenerateSimplex, "top simplex " + std::to_string(t));
    if (dim_ == ambient_dim_) {
      const int det_sign = signed_volume(pts, dim_) > 0.0 ? 1 : -1;
      int& o = orientation_[static_cast<std::size_t>(t)];
      if (o == 0)
        o = det_sign;
      else if (o != det_sign)
        throw Error(ErrorCode::InvalidMesh, "orientation sign disagrees with embedding at simplex " + std::to_string(t));
    }
  }

  for (int k = 0; k < dim_; ++k) boundary_[k].assign(static_cast<std::size_t>(count(k)), 0);
  if (dim_ > 0) {
    for (int f = 0; f < count(dim_ - 1); ++f) {
      const auto& slot = facet_tops_[static_cast<std::size_t>(f)];
      if (slot[1] < 0) {
        boundary_[dim_ - 1][static_cast<std::size_t>(f)] = 1;
        continue;
      }
      auto local = [&](int t) {
        auto fs = faces(dim_, t);
        return static_cast<int>(std::find(fs.begin(), fs.end(), f) - fs.begin());
      };
      const int s0 = orientation(slot[0]) * ((local(slot[0]) % 2) ? -1 : 1);
      const int s1 = orientation(slot[1]) * ((local(slot[1]) % 2) ? -1 : 1);
      if (s0 + s1 != 0) throw Error(ErrorCode::InvalidMesh, "inconsistent orientation across facet " + std::to_string(f));
    }
    for (int k = dim_ - 1; k >= 1; --k)
      for (int i = 0; i < count(k); ++i)
        if (boundary_[k][static_cast<std::size_t>(i)])
          for (int f : faces(k, i)) boundary_[k - 1][static_cast<std::size_t>(f)] = 1;
  }
}

namespace {

struct Triangulation {
  std::vector<Point> pts;
  std::vector<std::array<int, 3>> tris;
};

double angle_at(const Point& apex, const Point& a, const Point& b) {
  const Eigen::Vector3d u = a - apex, v = b - apex;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

double cross2(const Point& a, const Point& b, const Point& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// Lawson flips until every interior edge is locally Delaunay
void make_delaunay(Triangulation& tr) {
  for (int sweep = 0; sweep < 200; ++sweep) {
    std::unordered_map<long long, std::vector<int>> by_edge;
    auto key = [](int a, int b) { return (static_cast<long long>(std::min(a, b)) << 32) | std::max(a, b); };
    for (int t = 0; t < static_cast<int>(tr.tris.size()); ++t)
      for (int j = 0; j < 3; ++j) by_edge[key(tr.tris[t][j], tr.tris[t][(j + 1) % 3])].push_back(t);
    std::vector<char> touched(tr.tris.size(), 0);
    int flips = 0;
    std::vector<long long> keys;
    keys.reserve(by_edge.size());
    for (const auto& [k, ts] : by_edge)
      if (ts.size() == 2) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (long long k : keys) {
      const auto& ts = by_edge[k];
      const int t1 = ts[0], t2 = ts[1];
      if (touched[t1] || touched[t2]) continue;
      const int a = static_cast<int>(k >> 32), b = static_cast<int>(k & 0xffffffff);
      auto opposite = [&](int t) {
        for (int v : tr.tris[t])
          if (v != a && v != b) return v;
        return -1;
      };
      const int c = opposite(t1), d = opposite(t2);
      const double sum = angle_at(tr.pts[c], tr.pts[a], tr.pts[b]) + angle_at(tr.pts[d], tr.pts[a], tr.pts[b]);
      if (sum <= kPi + 1e-10) continue;
      if (cross2(tr.pts[c], tr.pts[d], tr.pts[a]) * cross2(tr.pts[c], tr.pts[d], tr.pts[b]) >= 0.0) continue;
      tr.tris[t1] = {c, d, a};
      tr.tris[t2] = {c, d, b};
      touched[t1] = touched[t2] = 1;
      ++flips;
    }
    if (flips == 0) return;
  }
  throw Error(ErrorCode::InvalidMesh, "edge flipping did not terminate");
}

Triangulation ring_triangulation(const std::vector<double>& radii, const std::vector<int>& counts) {
  Triangulation tr;
  std::vector<std::vector<int>> ring(radii.size());
  std::vector<double> offset(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    offset[i] = (i % 2 == 1) ? kPi / counts[i] : 0.0;
    for (int k = 0; k < counts[i]; ++k) {
      const double th = offset[i] + 2.0 * kPi * k / counts[i];
      ring[i].push_back(static_cast<int>(tr.pts.size()));
      tr.pts.emplace_back(radii[i] * std::cos(th), radii[i] * std::sin(th), 0.0);
    }
  }
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    const auto& A = ring[i];
    const auto& B = ring[i + 1];
    const int na = static_cast<int>(A.size()), nb = static_cast<int>(B.size());
    if (na == 1) {
      for (int k = 0; k < nb; ++k) tr.tris.push_back({A[0], B[k], B[(k + 1) % nb]});
      continue;
    }
    int ia = 0, ib = 0;
    while (ia < na || ib < nb) {
      const double ta = offset[i] + 2.0 * kPi * (ia + 1) / na;
      const double tb = offset[i + 1] + 2.0 * kPi * (ib + 1) / nb;
      if (ib == nb || (ia < na && ta <= tb)) {
        tr.tris.push_back({A[ia % na], A[(ia + 1) % na], B[ib % nb]});
        ++ia;
      } else {
        tr.tris.push_back({A[ia % na], B[ib % nb], B[(ib + 1) % nb]});
        ++ib;
      }
    }
  }
  make_delaunay(tr);
  return tr;
}

SimplicialMesh from_triangulation(Triangulation tr) {
  std::vector<int> flat;
  flat.reserve(tr.tris.size() * 3);
  for (const auto& t : tr.tris) flat.insert(flat.end(), t.begin(), t.end());
  return SimplicialMesh::from_top_simplices(2, 2, std::move(tr.pts), flat);
}

SimplicialMesh make_disk(double radius, int n) {
  std::vector<double> radii;
  std::vector<int> counts;
  for (int i = 0; i <= n; ++i) {
    radii.push_back(radius * i / n);
    counts.push_back(i == 0 ? 1 : 6 * i);
  }
  return from_triangulation(ring_triangulation(radii, counts));
}

SimplicialMesh make_annulus(double r_in, double r_out, int n) {
  const double h = r_out / n;
  const int rings = std::max(1, static_cast<int>(std::lround((r_out - r_in) / h)));
  std::vector<double> radii;
  std::vector<int> counts;
  for (int i = 0; i <= rings; ++i) {
    const double r = r_in + (r_out - r_in) * i / rings;
    radii.push_back(r);
    counts.push_back(std::max(6, static_cast<int>(std::lround(2.0 * kPi * r / h))));
  }
  return from_triangulation(ring_triangulation(radii, counts));
}

SimplicialMesh make_box(const Eigen::Vector3d& len, int n) {
  const double h = len.maxCoeff() / n;
  std::array<int, 3> cells{};
  for (int c = 0; c < 3; ++c) cells[c] = std::max(1, static_cast<int>(std::lround(len[c] / h)));
  const int sx = cells[0] + 1, sy = cells[1] + 1;
  auto id = [&](int i, int j, int k) { return i + sx * (j + sy * k); };
  std::vector<Point> pts;
  for (int k = 0; k <= cells[2]; ++k)
    for (int j = 0; j <= cells[1]; ++j)
      for (int i = 0; i <= cells[0]; ++i)
        pts.emplace_back(len[0] * i / cells[0], len[1] * j / cells[1], len[2] * k / cells[2]);
  std::vector<int> tets;
  std::array<int, 3> perm{0, 1, 2};
  for (int k = 0; k < cells[2]; ++k)
    for (int j = 0; j < cells[1]; ++j)
      for (int i = 0; i < cells[0]; ++i) {
        perm = {0, 1, 2};
        do {
          std::array<int, 3> at{i, j, k};
          tets.push_back(id(at[0], at[1], at[2]));
          for (int step : perm) {
            ++at[step];
            tets.push_back(id(at[0], at[1], at[2]));
          }
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
  return SimplicialMesh::from_top_simplices(3, 3, std::move(pts), tets);
}

SimplicialMesh make_torus(double side, int n) {
  if (n < 3) throw Error(ErrorCode::InvalidParams, "torus2d needs resolution >= 3");
  const double h = side / n;
  std::vector<Point> pts;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) pts.emplace_back(i * h, j * h, 0.0);
  auto id = [n](int i, int j) { return (i % n) + n * (j % n); };
  std::vector<int> tris;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      tris.insert(tris.end(), {id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.insert(tris.end(), {id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return SimplicialMesh::from_top_simplices(2, 2, std::move(pts), tris, {}, Eigen::Vector3d(side, side, 0.0));
}

}  // namespace

SimplicialMesh generate_mesh(Shape shape, const std::vector<double>& params, int resolution) {
  if (resolution < 2) throw Error(ErrorCode::InvalidParams, "resolution must be at least 2");
  auto param = [&](std::size_t i, double fallback) { return i < params.size() ? params[i] : fallback; };
  SimplicialMesh mesh;
  switch (shape) {
    case Shape::disk: {
      const double r = param(0, 1.0);
      if (!(r > 0.0)) throw Error(ErrorCode::InvalidParams, "disk radius must be positive");
      mesh = make_disk(r, resolution);
      break;
    }
    case Shape::annulus: {
      const double r_in = param(0, 0.5), r_out = param(1, 1.0);
      if (!(r_in > 0.0) || !(r_in < r_out)) throw Error(ErrorCode::InvalidParams, "annulus needs 0 < r_in < r_out");
      mesh = make_annulus(r_in, r_out, resolution);
      break;
    }
    case Shape::box3d: {
      const Eigen::Vector3d len(param(0, 1.0), param(1, param(0, 1.0)), param(2, param(0, 1.0)));
      if (!(len.minCoeff() > 0.0)) throw Error(ErrorCode::InvalidParams, "box side lengths must be positive");
      mesh = make_box(len, resolution);
      break;
    }
    case Shape::torus2d: {
      const double side = param(0, 1.0);
      if (!(side > 0.0)) throw Error(ErrorCode::InvalidParams, "torus side must be positive");
      mesh = make_torus(side, resolution);
      break;
    }
  }
  const double ratio = mesh.max_aspect_ratio();
  if (ratio > 6.0) throw Error(ErrorCode::InvalidMesh, "aspect ratio " + std::to_string(ratio) + " exceeds 6");
  return mesh;
}

SimplicialMesh boundary_complex(const SimplicialMesh& mesh) {
  const int n = mesh.dim();
  if (n == 0 || mesh.empty()) return SimplicialMesh::from_top_simplices(std::max(n - 1, 0), mesh.ambient_dim(), {}, {}, {}, mesh.period());
  std::vector<int> remap(mesh.vertices().size(), -1);
  std::vector<Point> verts;
  for (int v : boundary_vertices(mesh)) {
    remap[static_cast<std::size_t>(v)] = static_cast<int>(verts.size());
    verts.push_back(mesh.vertex(v));
  }
  std::vector<int> tops, signs;
  for (int f = 0; f < mesh.count(n - 1); ++f) {
    if (!mesh.on_boundary(n - 1, f)) continue;
    const int t = mesh.facet_tops(f)[0];
    auto fs = mesh.faces(n, t);
    const int j = static_cast<int>(std::find(fs.begin(), fs.end(), f) - fs.begin());
    for (int v : mesh.simplex(n - 1, f)) tops.push_back(remap[static_cast<std::size_t>(v)]);
    signs.push_back(mesh.orientation(t) * (j % 2 ? -1 : 1));
  }
  return SimplicialMesh::from_top_simplices(n - 1, mesh.ambient_dim(), std::move(verts), tops, signs, mesh.period());
}

SubMesh submesh(const SimplicialMesh& mesh, const std::vector<char>& keep_top) {
  const int n = mesh.dim();
  SubMesh out;
  std::vector<int> remap(mesh.vertices().size(), -1);
  std::vector<int> tops, signs;
  for (int t = 0; t < mesh.count(n); ++t) {
    if (!keep_top[static_cast<std::size_t>(t)]) continue;
    for (int v : mesh.simplex(n, t)) {
      if (remap[static_cast<std::size_t>(v)] < 0) {
        remap[static_cast<std::size_t>(v)] = static_cast<int>(out.parent_vertex.size());
        out.parent_vertex.push_back(v);
      }
    }
  }
  // keep the parent's vertex order so increasing tuples stay increasing
  std::sort(out.parent_vertex.begin(), out.parent_vertex.end());
  std::vector<Point> verts;
  for (std::size_t i = 0; i < out.parent_vertex.size(); ++i) {
    remap[static_cast<std::size_t>(out.parent_vertex[i])] = static_cast<int>(i);
    verts.push_back(mesh.vertex(out.parent_vertex[i]));
  }
  for (int t = 0; t < mesh.count(n); ++t) {
    if (!keep_top[static_cast<std::size_t>(t)]) continue;
    for (int v : mesh.simplex(n, t)) tops.push_back(remap[static_cast<std::size_t>(v)]);
    signs.push_back(mesh.orientation(t));
  }
  out.mesh = SimplicialMesh::from_top_simplices(n, mesh.ambient_dim(), std::move(verts), tops, signs, mesh.period());
  return out;
}

int euler_characteristic(const SimplicialMesh& mesh) {
  int chi = 0;
  for (int k = 0; k <= mesh.dim(); ++k) chi += (k % 2 ? -1 : 1) * mesh.count(k);
  return chi;
}

int component_count(const SimplicialMesh& mesh) {
  const int nv = mesh.count(0);
  std::vector<int> parent(static_cast<std::size_t>(nv));
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
    return v;
  };
  for (int e = 0; e < mesh.count(1); ++e) {
    auto s = mesh.simplex(1, e);
    parent[static_cast<std::size_t>(root(s[0]))] = root(s[1]);
  }
  int comps = 0;
  for (int v = 0; v < nv; ++v) comps += root(v) == v;
  return comps;
}

std::vector<int> boundary_vertices(const SimplicialMesh& mesh) {
  std::vector<int> out;
  if (mesh.dim() == 0) return out;
  for (int v = 0; v < mesh.count(0); ++v)
    if (mesh.on_boundary(0, v)) out.push_back(v);
  return out;
}

DistanceField distance_field(const SimplicialMesh& mesh, const std::vector<int>& sources) {
  if (sources.empty()) throw Error(ErrorCode::EmptySourceSet, "distance field needs at least one source");
  const int nv = mesh.count(0);
  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(nv));
  for (int e = 0; e < mesh.count(1); ++e) {
    auto s = mesh.simplex(1, e);
    const double len = mesh.displacement(s[0], s[1]).norm();
    adj[static_cast<std::size_t>(s[0])].emplace_back(s[1], len);
    adj[static_cast<std::size_t>(s[1])].emplace_back(s[0], len);
  }
  DistanceField field;
  field.sources = sources;
  field.values.assign(static_cast<std::size_t>(nv), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (int s : sources) {
    if (s < 0 || s >= nv) throw Error(ErrorCode::InvalidParams, "source vertex out of range");
    field.values[static_cast<std::size_t>(s)] = 0.0;
    queue.emplace(0.0, s);
  }
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > field.values[static_cast<std::size_t>(v)]) continue;
    for (auto [w, len] : adj[static_cast<std::size_t>(v)]) {
      if (d + len < field.values[static_cast<std::size_t>(w)]) {
        field.values[static_cast<std::size_t>(w)] = d + len;
        queue.emplace(d + len, w);
      }
    }
  }
  return field;
}

}  // namespace greenforms
