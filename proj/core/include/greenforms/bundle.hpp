#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "greenforms/mesh.hpp"

namespace greenforms {

struct BundleSpec {
  enum class Kind { trivial, rotation_angle, random_flat };
  Kind kind = Kind::trivial;
  double angle = 0.0;       // rotation_angle: holonomy around each generator
  std::uint64_t seed = 0;   // random_flat: vertex gauge seed

  static BundleSpec trivial() { return {}; }
  static BundleSpec rotation(double theta) { return {Kind::rotation_angle, theta, 0}; }
  static BundleSpec random_flat(std::uint64_t seed) { return {Kind::random_flat, 0.0, seed}; }
};

// Orthogonal parallel transport on the edges of a mesh. For the edge with
// vertices a < b the stored matrix carries the fibre at b into the fibre at a;
// the reverse direction uses the transpose.
class FlatBundle {
 public:
  FlatBundle() = default;
  FlatBundle(int rank, int edge_count, std::vector<double> transports, bool trivial);

  static FlatBundle identity(int rank, int edge_count);

  int rank() const { return rank_; }
  bool trivial() const { return trivial_; }
  int edge_count() const { return edges_; }

  Eigen::Map<const Eigen::MatrixXd> edge_transport(int e) const {
    return {data_.data() + static_cast<std::size_t>(e) * rank_ * rank_, rank_, rank_};
  }
  // fibre at b -> fibre at a
  Eigen::MatrixXd transport(const SimplicialMesh& mesh, int a, int b) const;

  // Pure-gauge bundles remember the vertex frames g_v with T_ab = g_a g_b^T.
  bool has_gauge() const { return !gauge_.empty(); }
  Eigen::Map<const Eigen::MatrixXd> gauge(int v) const {
    return {gauge_.data() + static_cast<std::size_t>(v) * rank_ * rank_, rank_, rank_};
  }
  void set_gauge(std::vector<double> frames) { gauge_ = std::move(frames); }

 private:
  int rank_ = 1;
  int edges_ = 0;
  bool trivial_ = true;
  std::vector<double> data_;
  std::vector<double> gauge_;
};

FlatBundle build_flat_bundle(const SimplicialMesh& mesh, int rank, const BundleSpec& spec);

// product of transports along the closed vertex path cycle[0] -> cycle[1] -> ... -> cycle[0]
Eigen::MatrixXd holonomy(const SimplicialMesh& mesh, const FlatBundle& bundle, const std::vector<int>& cycle);
double max_triangle_holonomy_defect(const SimplicialMesh& mesh, const FlatBundle& bundle);
double max_orthogonality_defect(const FlatBundle& bundle);

}  // namespace greenforms
