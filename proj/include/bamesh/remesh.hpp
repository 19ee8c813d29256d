#pragma once

#include "bamesh/metric.hpp"

namespace bamesh::remesh {

struct RemeshOptions {
  double h_min = 0.01;
  double h_max = 0.1;
  mesh::DomainShape domain = mesh::DomainShape::UnitDisc;
  int max_sweeps = 20;
  /// Stop once fewer than this fraction of edges lie outside the band.
  double out_of_band_target = 0.01;
  /// Give up after this many sweeps without improvement.
  int stall_sweeps = 3;
};

struct RemeshReport {
  int sweeps = 0;
  int splits = 0;
  int collapses = 0;
  int flips = 0;
  int moves = 0;
  /// Changes made by the final worst-element conformity pass.
  int polish_moves = 0;
  /// Fraction of edges with metric length in [1/sqrt(2), sqrt(2)].
  double fraction_in_band = 0.0;
  bool converged = false;
  /// Set when the loop stopped for lack of progress.
  bool stalled = false;
};

struct RemeshResult {
  mesh::TriMesh mesh;
  RemeshReport report;
};

/// Metric with eigenvalues clipped to [1/h_max^2, 1/h_min^2], so that unit
/// metric edges have Euclidean length between h_min and h_max.
metric::MetricFunction clamped_metric(metric::MetricFunction g, double h_min, double h_max);

/// Adapts `old_mesh` so that its edges have length close to 1 in the clamped
/// metric, by repeated edge splits, collapses, flips and vertex smoothing.
/// Boundary vertices stay on the boundary of the domain and corners of the
/// square are never removed.
RemeshResult adapt_mesh(const mesh::TriMesh& old_mesh, const metric::MetricFunction& g,
                        const RemeshOptions& options);

/// Fraction of edges whose metric length lies in [1/sqrt(2), sqrt(2)].
double fraction_in_band(const mesh::TriMesh& mesh, const metric::MetricFunction& g);

}  // namespace bamesh::remesh
