#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <json.hpp>

#include "bamesh/config.hpp"
#include "bamesh/error.hpp"
#include "bamesh/forward.hpp"
#include "bamesh/mesh_io.hpp"
#include "bamesh/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bamesh;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Common {
  std::string config_path;
  std::string problem = "tomography";
  std::string out = "bamesh_out";
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  bool quiet = false;
};

config::ExperimentConfig load(const Common& c) {
  config::ExperimentConfig cfg;
  if (!c.config_path.empty()) {
    cfg = config::load_config(c.config_path);
  } else if (c.problem == "tomography" || c.problem == "darcy") {
    cfg = config::default_config(c.problem == "darcy" ? forward::Problem::Darcy : forward::Problem::Tomography);
  } else {
    throw ConfigError("--problem must be tomography or darcy");
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.alpha) cfg.alpha = *c.alpha;
  config::validate(cfg);
  return cfg;
}

pipeline::Logger logger(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& msg) { std::cerr << msg << '\n'; };
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

int cmd_phantom(const Common& c) {
  const auto cfg = load(c);
  fs::create_directories(c.out);
  const auto m = mesh::generate_initial_mesh({forward::domain_of(cfg.problem), cfg.truth_h});
  const auto u = phantom::make_phantom(cfg.phantom, m);
  mesh::write_mesh(m, fs::path(c.out) / "truth_mesh.txt");
  forward::write_vector_csv(fs::path(c.out) / "truth_field.csv", u, "u");
  const mesh::VtkPointField f{"u", std::vector<double>(u.data(), u.data() + u.size()), 1};
  mesh::write_vtk(m, fs::path(c.out) / "truth.vtk", std::span(&f, 1));
  std::cout << "truth mesh: " << m.num_vertices() << " vertices, " << m.num_triangles() << " triangles\n";
  return 0;
}

int cmd_forward(const Common& c) {
  const auto cfg = load(c);
  fs::create_directories(c.out);
  const auto d = pipeline::prepare_dataset(cfg);
  forward::write_vector_csv(fs::path(c.out) / "clean.csv", d.clean, "b");
  forward::write_vector_csv(fs::path(c.out) / "data.csv", d.data, "b");
  const nlohmann::json meta{{"problem", std::string(forward::to_string(cfg.problem))},
                            {"measurements", d.data.size()},
                            {"sigma", d.sigma},
                            {"seed", cfg.seed},
                            {"truth_triangles", d.truth_mesh.num_triangles()}};
  write_text(fs::path(c.out) / "data.json", meta.dump(2) + "\n");
  std::cout << "m = " << d.data.size() << ", sigma = " << d.sigma << '\n';
  return 0;
}

int cmd_run(const Common& c) {
  const auto cfg = load(c);
  const auto result = pipeline::run_outer_loop(cfg, logger(c));
  pipeline::write_reports(result, c.out);
  std::cout << pipeline::summary_table(result);
  return 0;
}

int cmd_compare(const Common& c) {
  const auto cfg = load(c);
  const auto cmp = pipeline::compare_anisotropy(cfg, logger(c));
  pipeline::write_comparison(cmp, c.out);
  std::cout << "anisotropic (alpha = " << cfg.alpha << ")\n"
            << pipeline::summary_table(cmp.anisotropic) << "isotropic (alpha = 1)\n"
            << pipeline::summary_table(cmp.isotropic);
  return 0;
}

int cmd_report(const Common& c, const std::string& from) {
  const fs::path src = from.empty() ? fs::path(c.out) : fs::path(from);
  const auto result = pipeline::load_reports(src / "reports.json");
  pipeline::write_tables(result, c.out);
  std::cout << pipeline::summary_table(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive anisotropic meshing for Bayesian inverse problems"};
  app.require_subcommand(1);
  Common common;
  std::string from;

  auto add_common = [&](CLI::App* sub, bool with_alpha) {
    sub->add_option("--config", common.config_path, "Experiment configuration (INI)")->check(CLI::ExistingFile);
    sub->add_option("--problem", common.problem, "Built-in defaults when no --config is given")
        ->check(CLI::IsMember({"tomography", "darcy"}));
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--seed", common.seed, "Noise seed override");
    if (with_alpha) sub->add_option("--alpha", common.alpha, "Anisotropy ratio override");
    sub->add_flag("--quiet", common.quiet, "Suppress progress messages");
  };

  auto* phantom_cmd = app.add_subcommand("phantom", "Write the truth field on the fine mesh");
  add_common(phantom_cmd, false);
  auto* forward_cmd = app.add_subcommand("forward", "Synthesize noisy data");
  add_common(forward_cmd, false);
  auto* run_cmd = app.add_subcommand("run", "Run the adaptive outer loop");
  add_common(run_cmd, true);
  auto* compare_cmd = app.add_subcommand("compare", "Run with the configured alpha and with alpha = 1");
  add_common(compare_cmd, true);
  auto* report_cmd = app.add_subcommand("report", "Re-emit the tables of a stored run");
  report_cmd->add_option("--out", common.out, "Output directory");
  report_cmd->add_option("--from", from, "Directory holding reports.json (defaults to --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*phantom_cmd) return cmd_phantom(common);
    if (*forward_cmd) return cmd_forward(common);
    if (*run_cmd) return cmd_run(common);
    if (*compare_cmd) return cmd_compare(common);
    if (*report_cmd) return cmd_report(common, from);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const pipeline::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (!e.partial().iterations.empty()) {
      try {
        pipeline::write_reports(e.partial(), common.out);
        std::cerr << "partial report written to " << common.out << '\n';
      } catch (const std::exception&) {
      }
    }
    switch (e.cause()) {
      case pipeline::StageError::Cause::Config: return kConfigError;
      case pipeline::StageError::Cause::Numerical: return kNumericalError;
      default: return 1;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
