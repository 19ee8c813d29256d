#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bamesh/mesh.hpp"

namespace bamesh::mesh {

// Text format:
//
//   trimesh 2d v1
//   vertices <N_v>
//   x y b          (one line per vertex, b = 1 on the boundary)
//   triangles <N_t>
//   i j k          (0-based, counterclockwise)
//
// Coordinates are written with 17 significant digits so a round trip is exact.

void write_mesh(const TriMesh& mesh, std::ostream& out);
void write_mesh(const TriMesh& mesh, const std::filesystem::path& path);

/// Throws ParseError naming the line and record on malformed input.
TriMesh read_mesh(std::istream& in);
TriMesh read_mesh(const std::filesystem::path& path);

struct VtkPointField {
  std::string name;
  std::vector<double> values;  ///< N_v scalars, or 2*N_v interleaved vectors
  int components = 1;
};

/// Legacy ASCII VTK unstructured grid, for visualization only.
void write_vtk(const TriMesh& mesh, const std::filesystem::path& path,
               std::span<const VtkPointField> fields = {});

}  // namespace bamesh::mesh
