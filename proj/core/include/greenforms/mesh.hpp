#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace greenforms {

using Point = Eigen::Vector3d;

enum class Shape { disk, annulus, box3d, torus2d };

Shape parse_shape(const std::string& name);
std::string shape_name(Shape shape);

// Simplices are stored as increasing vertex tuples; that order is the canonical
// orientation of every simplex of degree below the top. Top simplices carry an
// extra sign relating the increasing order to the manifold orientation.
class SimplicialMesh {
 public:
  SimplicialMesh() = default;

  // `tops` holds (dim+1)-tuples in any order. With empty `signs` the embedding
  // determinant fixes the orientation (requires dim == ambient_dim).
  static SimplicialMesh from_top_simplices(int dim, int ambient_dim, std::vector<Point> vertices,
                                           const std::vector<int>& tops,
                                           const std::vector<int>& signs = {},
                                           const Eigen::Vector3d& period = Eigen::Vector3d::Zero());

  int dim() const { return dim_; }
  int ambient_dim() const { return ambient_dim_; }
  int count(int k) const;
  bool empty() const { return count(dim_) == 0; }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }

  std::span<const int> simplex(int k, int i) const {
    return {simplices_[k].data() + static_cast<std::size_t>(i) * (k + 1), static_cast<std::size_t>(k + 1)};
  }
  const std::vector<int>& simplices(int k) const { return simplices_[k]; }

  // (k-1)-faces of simplex i of degree k; entry j is the face opposite vertex j
  std::span<const int> faces(int k, int i) const {
    return {faces_[k].data() + static_cast<std::size_t>(i) * (k + 1), static_cast<std::size_t>(k + 1)};
  }

  // index of the simplex with the given increasing vertex tuple, or -1
  int find(std::span<const int> sorted_vertices) const;
  int edge(int a, int b) const;

  int orientation(int top) const { return orientation_[static_cast<std::size_t>(top)]; }
  bool on_boundary(int k, int i) const { return k < dim_ && boundary_[k][static_cast<std::size_t>(i)] != 0; }
  const std::vector<char>& boundary_flags(int k) const { return boundary_[k]; }
  // top simplices incident to facet i; second entry is -1 on the boundary
  std::array<int, 2> facet_tops(int i) const { return facet_tops_[static_cast<std::size_t>(i)]; }

  bool periodic() const { return (period_.array() > 0.0).any(); }
  const Eigen::Vector3d& period() const { return period_; }
  // x_b - x_a, reduced to the minimum image on periodic axes
  Eigen::Vector3d displacement(int a, int b) const;

  // vertex coordinates as columns, unwrapped relative to the first vertex
  Eigen::Matrix<double, 3, Eigen::Dynamic> coordinates(int k, int i) const;
  double volume(int k, int i) const;
  Point barycenter(int k, int i) const;

  double total_volume() const;
  double boundary_volume() const;
  // (dim! * mean top volume)^(1/dim): nominal grid spacing
  double mesh_width() const;
  double max_edge_length() const;
  // 1 for the regular simplex
  double max_aspect_ratio() const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::array<int, 4>& key) const noexcept;
  };

  void build(const std::vector<int>& tops, const std::vector<int>& signs);

  int dim_ = 0;
  int ambient_dim_ = 0;
  std::vector<Point> vertices_;
  Eigen::Vector3d period_ = Eigen::Vector3d::Zero();
  std::array<std::vector<int>, 4> simplices_;
  std::array<std::vector<int>, 4> faces_;
  std::array<std::vector<char>, 3> boundary_;
  std::vector<int> orientation_;
  std::vector<std::array<int, 2>> facet_tops_;
  std::unordered_map<std::array<int, 4>, int, KeyHash> index_;
};

// disk: {radius}; annulus: {r_in, r_out}; box3d: {Lx, Ly, Lz}; torus2d: {side}
SimplicialMesh generate_mesh(Shape shape, const std::vector<double>& params, int resolution);

struct MeshSpec {
  Shape shape = Shape::disk;
  std::vector<double> params{1.0};
  int resolution = 16;
};
inline SimplicialMesh generate_mesh(const MeshSpec& spec) {
  return generate_mesh(spec.shape, spec.params, spec.resolution);
}

// (dim-1)-complex of boundary facets with the induced orientation
SimplicialMesh boundary_complex(const SimplicialMesh& mesh);

struct SubMesh {
  SimplicialMesh mesh;
  std::vector<int> parent_vertex;
};

SubMesh submesh(const SimplicialMesh& mesh, const std::vector<char>& keep_top);

int euler_characteristic(const SimplicialMesh& mesh);
int component_count(const SimplicialMesh& mesh);

struct DistanceField {
  std::vector<int> sources;
  std::vector<double> values;
};

DistanceField distance_field(const SimplicialMesh& mesh, const std::vector<int>& sources);
std::vector<int> boundary_vertices(const SimplicialMesh& mesh);

}  // namespace greenforms
