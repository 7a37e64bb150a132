#include "greenforms/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "greenforms/errors.hpp"

namespace greenforms {

namespace {

bool next_line(std::istream& in, std::istringstream& line) {
  std::string text;
  while (std::getline(in, text)) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos || text[first] == '#') continue;
    line.clear();
    line.str(text);
    return true;
  }
  return false;
}

void expect(std::istringstream& line, const std::string& word) {
  std::string got;
  if (!(line >> got) || got != word) throw Error(ErrorCode::MeshFormat, "expected '" + word + "'");
}

}  // namespace

void write_mesh(std::ostream& out, const SimplicialMesh& mesh) {
  const int n = mesh.dim();
  out << "greenforms-mesh 1\n";
  out << "dim " << n << " ambient " << mesh.ambient_dim() << "\n";
  out << std::setprecision(17);
  out << "period " << mesh.period()[0] << ' ' << mesh.period()[1] << ' ' << mesh.period()[2] << "\n";
  out << "vertices " << mesh.vertices().size() << "\n";
  for (const auto& p : mesh.vertices()) out << p[0] << ' ' << p[1] << ' ' << p[2] << "\n";
  out << "simplices " << mesh.count(n) << "\n";
  for (int t = 0; t < mesh.count(n); ++t) {
    out << mesh.orientation(t);
    for (int v : mesh.simplex(n, t)) out << ' ' << v;
    out << "\n";
  }
}

SimplicialMesh read_mesh(std::istream& in) {
  std::istringstream line;
  if (!next_line(in, line)) throw Error(ErrorCode::MeshFormat, "empty input");
  expect(line, "greenforms-mesh");
  int version = 0;
  if (!(line >> version) || version != 1) throw Error(ErrorCode::MeshFormat, "unsupported version");

  int dim = 0, ambient = 0;
  if (!next_line(in, line)) throw Error(ErrorCode::MeshFormat, "missing dim line");
  expect(line, "dim");
  line >> dim;
  expect(line, "ambient");
  if (!(line >> ambient)) throw Error(ErrorCode::MeshFormat, "bad dim line");

  Eigen::Vector3d period = Eigen::Vector3d::Zero();
  if (!next_line(in, line)) throw Error(ErrorCode::MeshFormat, "missing period line");
  expect(line, "period");
  if (!(line >> period[0] >> period[1] >> period[2])) throw Error(ErrorCode::MeshFormat, "bad period line");

  std::size_t nv = 0;
  if (!next_line(in, line)) throw Error(ErrorCode::MeshFormat, "missing vertices header");
  expect(line, "vertices");
  if (!(line >> nv)) throw Error(ErrorCode::MeshFormat, "bad vertex count");
  std::vector<Point> verts(nv);
  for (auto& p : verts) {
    if (!next_line(in, line) || !(line >> p[0] >> p[1] >> p[2])) throw Error(ErrorCode::MeshFormat, "truncated vertex block");
  }

  std::size_t ns = 0;
  if (!next_line(in, line)) throw Error(ErrorCode::MeshFormat, "missing simplices header");
  expect(line, "simplices");
  if (!(line >> ns)) throw Error(ErrorCode::MeshFormat, "bad simplex count");
  std::vector<int> tops, signs;
  tops.reserve(ns * static_cast<std::size_t>(dim + 1));
  for (std::size_t i = 0; i < ns; ++i) {
    int sign = 0;
    if (!next_line(in, line) || !(line >> sign) || (sign != 1 && sign != -1))
      throw Error(ErrorCode::MeshFormat, "bad simplex line");
    signs.push_back(sign);
    for (int j = 0; j <= dim; ++j) {
      int v = 0;
      if (!(line >> v)) throw Error(ErrorCode::MeshFormat, "short simplex line");
      tops.push_back(v);
    }
  }
  return SimplicialMesh::from_top_simplices(dim, ambient, std::move(verts), tops, signs, period);
}

void save_mesh(const std::filesystem::path& path, const SimplicialMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MissingInput, "cannot write " + path.string());
  write_mesh(out, mesh);
}

SimplicialMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, "cannot open " + path.string());
  return read_mesh(in);
}

}  // namespace greenforms
