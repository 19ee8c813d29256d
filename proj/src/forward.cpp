#include "bamesh/forward.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "bamesh/darcy.hpp"
#include "bamesh/error.hpp"

namespace bamesh::forward {

static_assert(std::endian::native == std::endian::little, "binary format assumes little endian");

std::string_view to_string(Problem p) {
  return p == Problem::Tomography ? "tomography" : "darcy";
}

mesh::DomainShape domain_of(Problem p) {
  return p == Problem::Tomography ? mesh::DomainShape::UnitDisc : mesh::DomainShape::UnitSquare;
}

ForwardOperator build_forward(const ForwardSpec& spec, const mesh::TriMesh& mesh) {
  if (spec.problem == Problem::Tomography) {
    auto op = tomo::tomo_system_matrix(mesh, spec.geometry);
    return {LinearOperator(std::move(op.a_all)), std::move(op.a)};
  }
  const auto op = darcy::assemble_darcy_operators(mesh, spec.grid);
  LinearOperator all(darcy::darcy_forward_matrix(op, true));
  auto interior = all.select_columns(mesh.interior_vertices());
  return {std::move(all), std::move(interior)};
}

Vector add_noise(const Vector& clean, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("add_noise: sigma must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out = clean;
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) += sigma * normal(rng);
  return out;
}

bool same_mesh(const mesh::TriMesh& a, const mesh::TriMesh& b) {
  return a.num_vertices() == b.num_vertices() && a.num_triangles() == b.num_triangles() &&
         a.vertices() == b.vertices() && a.triangles() == b.triangles();
}

SyntheticData synthesize_data(const ForwardSpec& spec, const mesh::TriMesh& truth_mesh,
                              const Vector& truth_field, const SynthesisOptions& options,
                              const mesh::TriMesh* inversion_mesh) {
  if (truth_field.size() != truth_mesh.num_vertices()) {
    throw InvalidArgument("synthesize_data: truth field does not match the truth mesh");
  }
  SyntheticData out;
  out.inverse_crime = inversion_mesh != nullptr && same_mesh(truth_mesh, *inversion_mesh);
  if (out.inverse_crime && !options.allow_inverse_crime) {
    throw InvalidArgument("synthesize_data: truth mesh equals the inversion mesh (inverse crime)");
  }
  const auto op = build_forward(spec, truth_mesh);
  out.clean = op.a_all.apply(truth_field);
  out.sigma = options.sigma;
  out.noisy = add_noise(out.clean, options.sigma, options.seed);
  return out;
}

void write_matrix_binary(std::ostream& out, const DenseMatrix& m) {
  out.write("BAMESHM1", 8);
  const std::array<std::int64_t, 2> dims{m.rows(), m.cols()};
  out.write(reinterpret_cast<const char*>(dims.data()), sizeof(dims));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(sizeof(double) * rm.size()));
  if (!out) throw Error("write_matrix_binary: write failed");
}

DenseMatrix read_matrix_binary(std::istream& in) {
  char magic[8];
  std::array<std::int64_t, 2> dims{};
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(dims.data()), sizeof(dims));
  if (!in || std::memcmp(magic, "BAMESHM1", 8) != 0) {
    throw ParseError("read_matrix_binary: bad header", 0);
  }
  if (dims[0] < 0 || dims[1] < 0) throw ParseError("read_matrix_binary: negative dimensions", 0);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(dims[0], dims[1]);
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(sizeof(double) * rm.size()));
  if (!in) throw ParseError("read_matrix_binary: truncated data", 0);
  return rm;
}

void write_matrix_binary(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_matrix_binary(out, m);
}

DenseMatrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_matrix_binary(in);
}

void write_vector_csv(const std::filesystem::path& path, const Vector& v, std::string_view header) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << header << '\n';
  for (Eigen::Index k = 0; k < v.size(); ++k) out << v(k) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

Vector read_vector_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> vals;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      vals.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw ParseError("read_vector_csv: not a number", lineno);
    }
  }
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace bamesh::forward
