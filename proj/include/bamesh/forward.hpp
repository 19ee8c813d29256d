#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "bamesh/linalg.hpp"
#include "bamesh/mesh.hpp"
#include "bamesh/phantom.hpp"
#include "bamesh/tomography.hpp"

namespace bamesh::forward {

using linalg::DenseMatrix;
using linalg::LinearOperator;
using linalg::Vector;

enum class Problem { Tomography, Darcy };

std::string_view to_string(Problem p);
mesh::DomainShape domain_of(Problem p);

struct ForwardSpec {
  Problem problem = Problem::Tomography;
  tomo::FanBeamGeometry geometry;
  int grid = 20;
};

/// Forward map on one mesh: all-vertex columns and the interior restriction.
struct ForwardOperator {
  LinearOperator a_all;
  LinearOperator a;
};

ForwardOperator build_forward(const ForwardSpec& spec, const mesh::TriMesh& mesh);

/// b + sigma * N(0, I) drawn from a 64-bit Mersenne twister seeded with `seed`.
Vector add_noise(const Vector& clean, double sigma, std::uint64_t seed);

struct SynthesisOptions {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  /// Permit data generated on the inversion mesh itself.
  bool allow_inverse_crime = false;
};

struct SyntheticData {
  Vector clean;
  Vector noisy;
  double sigma = 0.0;
  bool inverse_crime = false;
};

/// Exact data from the truth field on `truth_mesh`, plus noise. When
/// `inversion_mesh` is given and coincides with `truth_mesh` the call throws
/// InvalidArgument unless `allow_inverse_crime` is set, in which case the
/// returned flag is raised.
SyntheticData synthesize_data(const ForwardSpec& spec, const mesh::TriMesh& truth_mesh,
                              const Vector& truth_field, const SynthesisOptions& options,
                              const mesh::TriMesh* inversion_mesh = nullptr);

bool same_mesh(const mesh::TriMesh& a, const mesh::TriMesh& b);

// Binary matrix files: 8-byte magic "BAMESHM1", int64 rows, int64 cols,
// then rows*cols little-endian doubles in row-major order.
void write_matrix_binary(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_matrix_binary(std::istream& in);
void write_matrix_binary(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_matrix_binary(const std::filesystem::path& path);

void write_vector_csv(const std::filesystem::path& path, const Vector& v,
                      std::string_view header = "value");
Vector read_vector_csv(const std::filesystem::path& path);

}  // namespace bamesh::forward
