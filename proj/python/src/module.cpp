#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "bamesh/config.hpp"
#include "bamesh/error.hpp"
#include "bamesh/forward.hpp"
#include "bamesh/mesh.hpp"
#include "bamesh/mesh_io.hpp"
#include "bamesh/phantom.hpp"
#include "bamesh/pipeline.hpp"
#include "bamesh/whitney.hpp"

namespace py = pybind11;
using namespace bamesh;

namespace {

Eigen::MatrixX2d vertex_array(const mesh::TriMesh& m) {
  Eigen::MatrixX2d out(m.num_vertices(), 2);
  for (int v = 0; v < m.num_vertices(); ++v) out.row(v) = m.vertex(v).transpose();
  return out;
}

template <std::size_t N, class T>
Eigen::Matrix<int, Eigen::Dynamic, static_cast<int>(N)> index_array(const std::vector<std::array<T, N>>& rows) {
  Eigen::Matrix<int, Eigen::Dynamic, static_cast<int>(N)> out(rows.size(), static_cast<int>(N));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t j = 0; j < N; ++j) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = rows[r][j];
  return out;
}

mesh::TriMesh mesh_from_arrays(const Eigen::MatrixX2d& vertices, const Eigen::MatrixX3i& triangles) {
  std::vector<mesh::Vec2> v(vertices.rows());
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) v[i] = vertices.row(i).transpose();
  std::vector<mesh::Triangle> t(triangles.rows());
  for (Eigen::Index i = 0; i < triangles.rows(); ++i) t[i] = {triangles(i, 0), triangles(i, 1), triangles(i, 2)};
  return mesh::TriMesh(std::move(v), std::move(t));
}

config::ExperimentConfig config_from_string(const std::string& text) {
  std::istringstream in(text);
  return config::parse_config(in);
}

std::string config_to_string(const config::ExperimentConfig& c) {
  std::ostringstream out;
  config::write_config(out, c);
  return out.str();
}

forward::Problem problem_from_string(const std::string& name) {
  if (name == "tomography") return forward::Problem::Tomography;
  if (name == "darcy") return forward::Problem::Darcy;
  throw ConfigError("problem must be 'tomography' or 'darcy'");
}

}  // namespace

PYBIND11_MODULE(_bamesh, m) {
  m.doc() = "Adaptive anisotropic meshing for hierarchical Bayesian inverse problems";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<pipeline::StageError>(m, "StageError", PyExc_RuntimeError);

  py::enum_<mesh::DomainShape>(m, "DomainShape")
      .value("UnitDisc", mesh::DomainShape::UnitDisc)
      .value("UnitSquare", mesh::DomainShape::UnitSquare);

  py::class_<mesh::TriMesh>(m, "TriMesh")
      .def(py::init(&mesh_from_arrays), py::arg("vertices"), py::arg("triangles"))
      .def_property_readonly("vertices", &vertex_array)
      .def_property_readonly("triangles", [](const mesh::TriMesh& t) { return index_array(t.triangles()); })
      .def_property_readonly("edges", [](const mesh::TriMesh& t) { return index_array(t.edges()); })
      .def_property_readonly("num_vertices", &mesh::TriMesh::num_vertices)
      .def_property_readonly("num_triangles", &mesh::TriMesh::num_triangles)
      .def_property_readonly("num_edges", &mesh::TriMesh::num_edges)
      .def_property_readonly("num_interior_vertices", &mesh::TriMesh::num_interior_vertices)
      .def_property_readonly("num_interior_edges", &mesh::TriMesh::num_interior_edges)
      .def_property_readonly("interior_vertices", &mesh::TriMesh::interior_vertices)
      .def_property_readonly("interior_edges", &mesh::TriMesh::interior_edges)
      .def("area", &mesh::TriMesh::area)
      .def("total_area", &mesh::TriMesh::total_area)
      .def("min_quality", &mesh::TriMesh::min_quality)
      .def("__repr__", [](const mesh::TriMesh& t) {
        return "<TriMesh " + std::to_string(t.num_vertices()) + " vertices, " + std::to_string(t.num_triangles()) +
               " triangles>";
      });

  m.def(
      "generate_initial_mesh",
      [](mesh::DomainShape shape, double h) { return mesh::generate_initial_mesh({shape, h}); },
      py::arg("shape"), py::arg("h"));
  m.def("read_mesh", py::overload_cast<const std::filesystem::path&>(&mesh::read_mesh), py::arg("path"));
  m.def("write_mesh", py::overload_cast<const mesh::TriMesh&, const std::filesystem::path&>(&mesh::write_mesh),
        py::arg("mesh"), py::arg("path"));

  m.def(
      "incidence",
      [](const mesh::TriMesh& t, bool interior) {
        auto inc = whitney::assemble_incidence(t);
        return interior ? inc.interior : inc.full;
      },
      py::arg("mesh"), py::arg("interior") = true,
      "Edge-vertex incidence as a scipy.sparse matrix; rows give u_tail - u_head.");

  m.def(
      "phantom",
      [](const mesh::TriMesh& t, const std::string& problem) {
        const auto p = problem_from_string(problem) == forward::Problem::Darcy ? phantom::default_darcy_phantom()
                                                                                : phantom::default_tomography_phantom();
        return phantom::make_phantom(p, t);
      },
      py::arg("mesh"), py::arg("problem") = "tomography");

  py::class_<config::ExperimentConfig>(m, "Config")
      .def_static(
          "default", [](const std::string& problem) { return config::default_config(problem_from_string(problem)); },
          py::arg("problem") = "tomography")
      .def_static("load", &config::load_config, py::arg("path"))
      .def_static("from_string", &config_from_string, py::arg("text"))
      .def("to_string", &config_to_string)
      .def("validate", [](const config::ExperimentConfig& c) { config::validate(c); })
      .def_property_readonly("problem",
                             [](const config::ExperimentConfig& c) { return std::string(forward::to_string(c.problem)); })
      .def_readwrite("seed", &config::ExperimentConfig::seed)
      .def_readwrite("truth_h", &config::ExperimentConfig::truth_h)
      .def_readwrite("sigma", &config::ExperimentConfig::sigma)
      .def_readwrite("sigma_percent", &config::ExperimentConfig::sigma_percent)
      .def_readwrite("h_init", &config::ExperimentConfig::h_init)
      .def_readwrite("h_min", &config::ExperimentConfig::h_min)
      .def_readwrite("h_max", &config::ExperimentConfig::h_max)
      .def_readwrite("alpha", &config::ExperimentConfig::alpha)
      .def_readwrite("eta", &config::ExperimentConfig::eta)
      .def_readwrite("vartheta_star", &config::ExperimentConfig::vartheta_star)
      .def_readwrite("inflation", &config::ExperimentConfig::inflation)
      .def_readwrite("outer_iterations", &config::ExperimentConfig::outer_iterations)
      .def_readwrite("early_exit", &config::ExperimentConfig::early_exit)
      .def_readwrite("profile_points", &config::ExperimentConfig::profile_points)
      .def_property(
          "views", [](const config::ExperimentConfig& c) { return c.geometry.views; },
          [](config::ExperimentConfig& c, int v) { c.geometry.views = v; })
      .def_property(
          "rays", [](const config::ExperimentConfig& c) { return c.geometry.rays; },
          [](config::ExperimentConfig& c, int r) { c.geometry.rays = r; });

  py::class_<pipeline::Dataset>(m, "Dataset")
      .def_readonly("truth_mesh", &pipeline::Dataset::truth_mesh)
      .def_readonly("truth", &pipeline::Dataset::truth)
      .def_readonly("clean", &pipeline::Dataset::clean)
      .def_readonly("data", &pipeline::Dataset::data)
      .def_readonly("sigma", &pipeline::Dataset::sigma);
  m.def("prepare_dataset", &pipeline::prepare_dataset, py::arg("config"));

  py::class_<ias::IterationRecord>(m, "IasRecord")
      .def_readonly("phase", &ias::IterationRecord::phase)
      .def_readonly("iteration", &ias::IterationRecord::iteration)
      .def_readonly("cgls_iterations", &ias::IterationRecord::cgls_iterations)
      .def_property_readonly("cgls_stop",
                             [](const ias::IterationRecord& r) { return std::string(linalg::to_string(r.cgls_stop)); })
      .def_readonly("energy", &ias::IterationRecord::energy)
      .def_readonly("relative_change", &ias::IterationRecord::relative_change)
      .def_readonly("compatibility", &ias::IterationRecord::compatibility);

  py::class_<pipeline::IterationReport>(m, "IterationReport")
      .def_readonly("outer", &pipeline::IterationReport::outer)
      .def_readonly("n_t", &pipeline::IterationReport::n_t)
      .def_readonly("n_v", &pipeline::IterationReport::n_v)
      .def_readonly("n_e", &pipeline::IterationReport::n_e)
      .def_readonly("sigma_eff", &pipeline::IterationReport::sigma_eff)
      .def_readonly("relative_error", &pipeline::IterationReport::relative_error)
      .def_readonly("history", &pipeline::IterationReport::history)
      .def_readonly("profile", &pipeline::IterationReport::profile)
      .def_readonly("conformity_before", &pipeline::IterationReport::conformity_before)
      .def_readonly("conformity_after", &pipeline::IterationReport::conformity_after);

  py::class_<pipeline::RunResult>(m, "RunResult")
      .def_readonly("config", &pipeline::RunResult::config)
      .def_readonly("sigma", &pipeline::RunResult::sigma)
      .def_readonly("iterations", &pipeline::RunResult::iterations)
      .def_readonly("stop_reason", &pipeline::RunResult::stop_reason)
      .def_readonly("truth_profile", &pipeline::RunResult::truth_profile)
      .def_readonly("meshes", &pipeline::RunResult::meshes)
      .def_readonly("fields", &pipeline::RunResult::fields)
      .def("summary", [](const pipeline::RunResult& r) { return pipeline::summary_table(r); });

  m.def(
      "run",
      [](const config::ExperimentConfig& c, const pipeline::Logger& log) {
        py::gil_scoped_release release;
        pipeline::Logger guarded;
        if (log) guarded = [&log](const std::string& msg) {
          py::gil_scoped_acquire acquire;
          log(msg);
        };
        return pipeline::run_outer_loop(c, guarded);
      },
      py::arg("config"), py::arg("log") = pipeline::Logger{});
  m.def("write_reports", &pipeline::write_reports, py::arg("result"), py::arg("out_dir"));
  m.def("load_reports", &pipeline::load_reports, py::arg("json_path"));
}
