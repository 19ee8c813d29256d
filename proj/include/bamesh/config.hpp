#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "bamesh/forward.hpp"
#include "bamesh/ias.hpp"
#include "bamesh/phantom.hpp"

namespace bamesh::config {

/// Every setting of one adaptive reconstruction experiment.
///
/// The file format is INI: `key = value` lines grouped under `[section]`
/// headers, `;` or `#` comments. Unknown sections or keys are rejected.
/// See `configs/*.ini` for the full key list.
struct ExperimentConfig {
  forward::Problem problem = forward::Problem::Tomography;

  // [phantom]
  phantom::Phantom phantom = phantom::default_tomography_phantom();
  double truth_h = 0.005;

  // [geometry]
  tomo::FanBeamGeometry geometry;
  int grid = 20;

  // [noise]: exactly one of sigma / sigma_percent.
  std::optional<double> sigma;
  std::optional<double> sigma_percent = 4.0;
  std::uint64_t seed = 1;

  // [mesh]
  double h_init = 0.05;
  double h_min = 0.01;
  double h_max = 0.1;
  double alpha = 12.0;
  int max_sweeps = 20;
  /// Size gradation ratio applied to the metric before remeshing; values
  /// <= 1 disable it.
  double gradation = 1.8;

  // [ias]
  double eta = 1e-3;
  double vartheta_star = 0.05;
  bool hybrid = true;
  double threshold = 0.05;
  int max_ias_iterations = 15;
  int max_cgls_iterations = 200;
  bool sensitivity_scaling = false;
  ias::SensitivityRule sensitivity_rule = ias::SensitivityRule::Proportional;

  // [outer]
  double inflation = 0.3;
  int outer_iterations = 4;
  /// Stop early when the element count changes by less than this fraction;
  /// 0 disables the check.
  double early_exit = 0.02;

  // [output]
  mesh::Vec2 profile_start{-0.7071, 0.7071};
  mesh::Vec2 profile_end{0.7071, -0.7071};
  int profile_points = 200;

  forward::ForwardSpec forward_spec() const;
};

/// Experiment 1 style tomography or the Darcy inverse source setup.
ExperimentConfig default_config(forward::Problem problem);

/// Throws ConfigError describing the first invalid field.
void validate(const ExperimentConfig& config);

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const ExperimentConfig& config);

}  // namespace bamesh::config
