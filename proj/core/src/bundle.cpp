#include "greenforms/bundle.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

#include "greenforms/errors.hpp"
#include "greenforms/rng.hpp"

namespace greenforms {

FlatBundle::FlatBundle(int rank, int edge_count, std::vector<double> transports, bool trivial)
    : rank_(rank), edges_(edge_count), trivial_(trivial), data_(std::move(transports)) {
  if (rank < 1) throw Error(ErrorCode::InvalidParams, "bundle rank must be positive");
  if (data_.size() != static_cast<std::size_t>(edge_count) * rank * rank)
    throw Error(ErrorCode::ShapeMismatch, "transport storage does not match edge count");
}

FlatBundle FlatBundle::identity(int rank, int edge_count) {
  std::vector<double> data(static_cast<std::size_t>(edge_count) * rank * rank, 0.0);
  for (int e = 0; e < edge_count; ++e)
    for (int i = 0; i < rank; ++i) data[static_cast<std::size_t>(e) * rank * rank + i * rank + i] = 1.0;
  return FlatBundle(rank, edge_count, std::move(data), true);
}

Eigen::MatrixXd FlatBundle::transport(const SimplicialMesh& mesh, int a, int b) const {
  if (a == b || trivial_) return Eigen::MatrixXd::Identity(rank_, rank_);
  const int e = mesh.edge(a, b);
  if (e < 0) throw Error(ErrorCode::InvalidParams, "no edge between the given vertices");
  if (a < b) return edge_transport(e);
  return edge_transport(e).transpose();
}

namespace {

double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return x - two_pi * std::round(x / two_pi);
}

Eigen::MatrixXd embedded_rotation(int rank, double angle) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(rank, rank);
  r(0, 0) = std::cos(angle);
  r(0, 1) = -std::sin(angle);
  r(1, 0) = std::sin(angle);
  r(1, 1) = std::cos(angle);
  return r;
}

}  // namespace

FlatBundle build_flat_bundle(const SimplicialMesh& mesh, int rank, const BundleSpec& spec) {
  if (rank < 1) throw Error(ErrorCode::InvalidParams, "bundle rank must be positive");
  const int ne = mesh.count(1);
  if (spec.kind == BundleSpec::Kind::trivial) return FlatBundle::identity(rank, ne);

  std::vector<double> data(static_cast<std::size_t>(ne) * rank * rank);
  std::vector<double> frames;
  auto store = [&](int e, const Eigen::MatrixXd& t) {
    Eigen::Map<Eigen::MatrixXd>(data.data() + static_cast<std::size_t>(e) * rank * rank, rank, rank) = t;
  };

  if (spec.kind == BundleSpec::Kind::rotation_angle) {
    if (rank < 2) throw Error(ErrorCode::InvalidParams, "rotation bundles need rank >= 2");
    // angular coordinate per generator; the transport rotates by theta per full turn
    std::vector<std::function<double(int)>> coords;
    if (mesh.periodic()) {
      for (int c = 0; c < 3; ++c)
        if (mesh.period()[c] > 0.0) {
          const double scale = 2.0 * std::numbers::pi / mesh.period()[c];
          coords.emplace_back([&mesh, c, scale](int v) { return scale * mesh.vertex(v)[c]; });
        }
    } else {
      if (mesh.dim() != 2 || component_count(boundary_complex(mesh)) < 2)
        throw Error(ErrorCode::InvalidParams, "rotation bundles need a non-simply-connected planar mesh");
      coords.emplace_back([&mesh](int v) { return std::atan2(mesh.vertex(v)[1], mesh.vertex(v)[0]); });
    }
    const double kappa = spec.angle / (2.0 * std::numbers::pi);
    for (int e = 0; e < ne; ++e) {
      auto s = mesh.simplex(1, e);
      double turn = 0.0;
      for (const auto& coord : coords) turn += wrap_angle(coord(s[1]) - coord(s[0]));
      store(e, embedded_rotation(rank, kappa * turn));
    }
  } else {
    Rng rng(spec.seed);
    std::vector<Eigen::MatrixXd> gauge(static_cast<std::size_t>(mesh.count(0)));
    for (auto& g : gauge) {
      Eigen::MatrixXd a(rank, rank);
      for (int j = 0; j < rank; ++j)
        for (int i = 0; i < rank; ++i) a(i, j) = rng.normal();
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
      Eigen::MatrixXd q = qr.householderQ();
      const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int j = 0; j < rank; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
      g = q;
    }
    for (int e = 0; e < ne; ++e) {
      auto s = mesh.simplex(1, e);
      store(e, gauge[static_cast<std::size_t>(s[0])] * gauge[static_cast<std::size_t>(s[1])].transpose());
    }
    for (const auto& g : gauge) frames.insert(frames.end(), g.data(), g.data() + g.size());
  }

  FlatBundle bundle(rank, ne, std::move(data), false);
  if (!frames.empty()) bundle.set_gauge(std::move(frames));
  if (max_orthogonality_defect(bundle) > 1e-12) throw Error(ErrorCode::FlatnessViolation, "non-orthogonal transport");
  const double defect = max_triangle_holonomy_defect(mesh, bundle);
  if (defect > 1e-10) throw Error(ErrorCode::FlatnessViolation, "triangle holonomy defect " + std::to_string(defect));
  return bundle;
}

Eigen::MatrixXd holonomy(const SimplicialMesh& mesh, const FlatBundle& bundle, const std::vector<int>& cycle) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(bundle.rank(), bundle.rank());
  for (std::size_t i = 0; i < cycle.size(); ++i)
    h = h * bundle.transport(mesh, cycle[i], cycle[(i + 1) % cycle.size()]);
  return h;
}

double max_triangle_holonomy_defect(const SimplicialMesh& mesh, const FlatBundle& bundle) {
  double worst = 0.0;
  if (mesh.dim() < 2) return worst;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(bundle.rank(), bundle.rank());
  for (int t = 0; t < mesh.count(2); ++t) {
    auto s = mesh.simplex(2, t);
    const Eigen::MatrixXd h = holonomy(mesh, bundle, {s[0], s[1], s[2]});
    worst = std::max(worst, (h - id).cwiseAbs().maxCoeff());
  }
  return worst;
}

double max_orthogonality_defect(const FlatBundle& bundle) {
  double worst = 0.0;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(bundle.rank(), bundle.rank());
  for (int e = 0; e < bundle.edge_count(); ++e) {
    const auto q = bundle.edge_transport(e);
    worst = std::max(worst, (q.transpose() * q - id).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace greenforms
