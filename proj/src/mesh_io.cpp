#include "bamesh/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "bamesh/error.hpp"

namespace bamesh::mesh {

void write_mesh(const TriMesh& mesh, std::ostream& out) {
  out << "trimesh 2d v1\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  out << std::setprecision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const auto& p = mesh.vertex(v);
    out << p.x() << " " << p.y() << " " << (mesh.is_boundary_vertex(v) ? 1 : 0) << "\n";
  }
  out << "triangles " << mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles()) out << t[0] << " " << t[1] << " " << t[2] << "\n";
}

void write_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_mesh(mesh, out);
  if (!out) throw Error("failed writing " + path.string());
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line; throws at end of input.
  std::istringstream next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        return std::istringstream(line);
      }
    }
    throw ParseError(std::string("unexpected end of file, expected ") + expecting,
                     line_no_ + 1);
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

void expect_end(std::istringstream& ss, const std::string& record, int line) {
  std::string extra;
  if (ss >> extra) throw ParseError("trailing data in " + record, line);
}

}  // namespace

TriMesh read_mesh(std::istream& in) {
  LineReader reader(in);
  {
    auto ss = reader.next("header");
    std::string a, b, c;
    ss >> a >> b >> c;
    if (a != "trimesh" || b != "2d" || c != "v1") {
      throw ParseError("expected header 'trimesh 2d v1'", reader.line());
    }
  }
  auto read_count = [&](const char* keyword) {
    auto ss = reader.next(keyword);
    std::string kw;
    long long n = -1;
    if (!(ss >> kw >> n) || kw != keyword || n < 0) {
      throw ParseError(std::string("expected '") + keyword + " <count>'", reader.line());
    }
    expect_end(ss, std::string(keyword) + " header", reader.line());
    return static_cast<int>(n);
  };

  const int nv = read_count("vertices");
  std::vector<Vec2> verts(nv);
  std::vector<int> flags(nv);
  std::vector<int> vert_lines(nv);
  for (int v = 0; v < nv; ++v) {
    auto ss = reader.next("vertex record");
    double x, y;
    int b;
    if (!(ss >> x >> y >> b) || (b != 0 && b != 1)) {
      throw ParseError("malformed vertex " + std::to_string(v), reader.line());
    }
    expect_end(ss, "vertex " + std::to_string(v), reader.line());
    verts[v] = Vec2(x, y);
    flags[v] = b;
    vert_lines[v] = reader.line();
  }

  const int nt = read_count("triangles");
  std::vector<Triangle> tris(nt);
  for (int t = 0; t < nt; ++t) {
    auto ss = reader.next("triangle record");
    long long i, j, k;
    if (!(ss >> i >> j >> k)) {
      throw ParseError("malformed triangle " + std::to_string(t), reader.line());
    }
    expect_end(ss, "triangle " + std::to_string(t), reader.line());
    for (long long idx : {i, j, k}) {
      if (idx < 0 || idx >= nv) {
        throw ParseError("triangle " + std::to_string(t) + " references missing vertex " +
                             std::to_string(idx),
                         reader.line());
      }
    }
    tris[t] = {static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)};
  }

  TriMesh mesh;
  try {
    mesh = TriMesh(std::move(verts), std::move(tris));
  } catch (const Error& e) {
    throw ParseError(e.what(), reader.line());
  }
  for (int v = 0; v < nv; ++v) {
    if ((flags[v] == 1) != mesh.is_boundary_vertex(v)) {
      throw ParseError("boundary flag of vertex " + std::to_string(v) +
                           " disagrees with the triangulation",
                       vert_lines[v]);
    }
  }
  return mesh;
}

TriMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_mesh(in);
}

void write_vtk(const TriMesh& mesh, const std::filesystem::path& path,
               std::span<const VtkPointField> fields) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "# vtk DataFile Version 3.0\nbamesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n" << std::setprecision(17);
  for (const auto& p : mesh.vertices()) out << p.x() << " " << p.y() << " 0\n";
  out << "CELLS " << mesh.num_triangles() << " " << 4 * mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
  if (fields.empty()) return;
  out << "POINT_DATA " << mesh.num_vertices() << "\n";
  for (const auto& f : fields) {
    if (f.values.size() != static_cast<std::size_t>(f.components * mesh.num_vertices())) {
      throw InvalidArgument("VTK field '" + f.name + "' has the wrong length");
    }
    if (f.components == 1) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) out << v << "\n";
    } else {
      out << "VECTORS " << f.name << " double\n";
      for (int v = 0; v < mesh.num_vertices(); ++v)
        out << f.values[2 * v] << " " << f.values[2 * v + 1] << " 0\n";
    }
  }
}

}  // namespace bamesh::mesh
