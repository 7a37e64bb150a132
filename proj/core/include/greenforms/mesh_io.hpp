#pragma once

#include <filesystem>
#include <iosfwd>

#include "greenforms/mesh.hpp"

namespace greenforms {

// Text layout:
//   greenforms-mesh 1
//   dim <d> ambient <a>
//   period <px> <py> <pz>
//   vertices <n>
//   <x> <y> <z>            (n lines)
//   simplices <m>
//   <sign> <v0> ... <vd>   (m lines)
// Lines starting with '#' are ignored. Lower-degree simplices are derived.
void write_mesh(std::ostream& out, const SimplicialMesh& mesh);
SimplicialMesh read_mesh(std::istream& in);

void save_mesh(const std::filesystem::path& path, const SimplicialMesh& mesh);
SimplicialMesh load_mesh(const std::filesystem::path& path);

}  // namespace greenforms
