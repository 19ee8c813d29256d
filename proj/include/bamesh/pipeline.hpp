#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bamesh/config.hpp"
#include "bamesh/error.hpp"
#include "bamesh/ias.hpp"
#include "bamesh/mesh.hpp"
#include "bamesh/remesh.hpp"

namespace bamesh::pipeline {

using config::ExperimentConfig;
using linalg::LinearOperator;
using linalg::Vector;

using Logger = std::function<void(const std::string&)>;

/// Truth field on the fine mesh and the synthetic data generated from it.
struct Dataset {
  mesh::TriMesh truth_mesh;
  Vector truth;
  Vector clean;
  Vector data;
  double sigma = 0.0;
};

/// Absolute noise level: `sigma`, or `sigma_percent` of max |b*|.
double resolve_sigma(const ExperimentConfig& config, const Vector& clean);

Dataset prepare_dataset(const ExperimentConfig& config);

struct StageTimes {
  double forward = 0.0;
  double ias = 0.0;
  double clement = 0.0;
  double metric = 0.0;
  double remesh = 0.0;

  /// Everything except the forward model rebuild.
  double solver() const { return ias + clement + metric + remesh; }
};

struct IterationReport {
  int outer = 0;
  int n_t = 0;
  int n_v = 0;
  int n_e = 0;
  double sigma_eff = 0.0;
  std::vector<ias::IterationRecord> history;
  StageTimes seconds;
  double relative_error = 0.0;
  /// Conformity and in-band fraction of this iteration's mesh and of the
  /// adapted mesh with respect to the metric built here. Absent on the
  /// last iteration, which does not remesh.
  std::optional<double> conformity_before;
  std::optional<double> conformity_after;
  std::optional<double> in_band_before;
  std::optional<remesh::RemeshReport> remesh;
  /// Largest recovered gradient norm and share of vertices on the
  /// anisotropic branch of the metric.
  std::optional<double> max_gradient;
  std::optional<double> anisotropic_fraction;
  std::vector<double> profile;
};

struct RunResult {
  ExperimentConfig config;
  double sigma = 0.0;
  std::vector<IterationReport> iterations;
  /// "completed" or "early-exit".
  std::string stop_reason = "completed";
  std::vector<double> truth_profile;
  /// Mesh and recovered nodal field (all vertices) of each iteration.
  std::vector<mesh::TriMesh> meshes;
  std::vector<Vector> fields;
};

/// Raised when a stage of the outer loop fails; carries the iterations
/// completed so far.
class StageError : public Error {
 public:
  enum class Cause { Config, Numerical, Other };

  StageError(std::string stage, const std::string& what, Cause cause,
             std::shared_ptr<const RunResult> partial)
      : Error("stage '" + stage + "' failed: " + what),
        stage_(std::move(stage)),
        cause_(cause),
        partial_(std::move(partial)) {}

  const std::string& stage() const noexcept { return stage_; }
  Cause cause() const noexcept { return cause_; }
  bool numerical() const noexcept { return cause_ == Cause::Numerical; }
  const RunResult& partial() const noexcept { return *partial_; }

 private:
  std::string stage_;
  Cause cause_;
  std::shared_ptr<const RunResult> partial_;
};

struct Whitened {
  LinearOperator a;
  Vector b;
};

Whitened whiten(const LinearOperator& a, const Vector& b, double sigma);

/// Sigma used in the likelihood: max(sigma, inflation * h) on the first
/// outer iteration, sigma afterwards.
double effective_sigma(double sigma, double inflation, double h, int outer);

/// Values of the P1 field at `n` equispaced points from p0 to p1.
std::vector<double> extract_profile(const mesh::TriMesh& mesh, const Vector& u_all,
                                    const mesh::Vec2& p0, const mesh::Vec2& p1, int n);

/// ||I u - u_truth|| / ||u_truth|| in the lumped L2 norm of the truth mesh,
/// where I u interpolates the reconstruction at the truth vertices.
double relative_l2_error(const mesh::TriMesh& truth_mesh, const Vector& truth,
                         const mesh::TriMesh& mesh, const Vector& u_all);

RunResult run_outer_loop(const ExperimentConfig& config, const Dataset& dataset,
                         const Logger& log = {});
RunResult run_outer_loop(const ExperimentConfig& config, const Logger& log = {});

struct Comparison {
  RunResult anisotropic;
  RunResult isotropic;
};

/// Runs the configuration as given and with alpha = 1 on the same data.
Comparison compare_anisotropy(const ExperimentConfig& config, const Logger& log = {});

/// Writes cgls_counts.csv, mesh_stats.csv, energy.csv, profile.csv,
/// reports.json, config.ini and per-iteration meshes and fields.
void write_reports(const RunResult& result, const std::filesystem::path& out_dir);
void write_comparison(const Comparison& cmp, const std::filesystem::path& out_dir);

/// Rebuilds the tables from a reports.json written by write_reports.
RunResult load_reports(const std::filesystem::path& json_path);
/// Re-emits the CSV tables of a stored run into `out_dir`.
void write_tables(const RunResult& result, const std::filesystem::path& out_dir);

struct CglsCount {
  int outer = 0;
  int phase = 0;
  int iteration = 0;
  int cgls = 0;
  std::string stop;
};
std::vector<CglsCount> read_cgls_counts(const std::filesystem::path& csv);

/// Human-readable per-iteration summary table.
std::string summary_table(const RunResult& result);

}  // namespace bamesh::pipeline
