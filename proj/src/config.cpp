#include "bamesh/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bamesh/error.hpp"

namespace bamesh::config {

namespace pt = boost::property_tree;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"problem", "seed"}},
      {"phantom", {"preset", "background", "truth_h"}},
      {"geometry", {"views", "rays", "source_radius", "grid"}},
      {"noise", {"sigma", "sigma_percent"}},
      {"mesh", {"h_init", "h_min", "h_max", "alpha", "max_sweeps", "gradation"}},
      {"ias",
       {"eta", "vartheta_star", "hybrid", "threshold", "max_iterations", "max_cgls_iterations",
        "sensitivity_scaling", "sensitivity_rule"}},
      {"outer", {"inflation", "iterations", "early_exit"}},
      {"output", {"profile_start", "profile_end", "profile_points"}},
  };
  return keys;
}

template <class T>
T get(const pt::ptree& section, const std::string& name, const std::string& key, T fallback) {
  const auto child = section.get_child_optional(key);
  if (!child) return fallback;
  const std::string raw = child->get_value<std::string>();
  std::istringstream in(raw);
  T value{};
  if constexpr (std::is_same_v<T, bool>) {
    if (raw == "true" || raw == "on" || raw == "yes" || raw == "1") return true;
    if (raw == "false" || raw == "off" || raw == "no" || raw == "0") return false;
    throw ConfigError("[" + name + "] " + key + ": expected a boolean, got '" + raw + "'");
  } else {
    if (!(in >> value) || !(in >> std::ws).eof()) {
      throw ConfigError("[" + name + "] " + key + ": cannot parse '" + raw + "'");
    }
  }
  return value;
}

std::vector<double> numbers(const std::string& text, const std::string& where) {
  std::istringstream in(text);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (!(in >> std::ws).eof()) throw ConfigError(where + ": cannot parse '" + text + "'");
  return out;
}

mesh::Vec2 point(const std::string& text, const std::string& where) {
  const auto v = numbers(text, where);
  if (v.size() != 2) throw ConfigError(where + ": expected two numbers");
  return {v[0], v[1]};
}

phantom::Inclusion parse_inclusion(const std::string& text, const std::string& where) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  std::string rest;
  std::getline(in, rest);
  const auto v = numbers(rest, where);
  auto need = [&](std::size_t n) {
    if (v.size() != n) {
      throw ConfigError(where + ": " + kind + " takes " + std::to_string(n) + " numbers");
    }
  };
  if (kind == "disc") {
    need(4);
    return {phantom::Disc{{v[0], v[1]}, v[2]}, v[3]};
  }
  if (kind == "kite") {
    need(5);
    return {phantom::Kite{{v[0], v[1]}, v[2], v[3]}, v[4]};
  }
  if (kind == "rect") {
    need(5);
    return {phantom::rectangle({v[0], v[1]}, {v[2], v[3]}), v[4]};
  }
  if (kind == "polygon") {
    if (v.size() < 7 || v.size() % 2 == 0) {
      throw ConfigError(where + ": polygon takes a value and at least three x y pairs");
    }
    phantom::Polygon poly;
    for (std::size_t k = 1; k + 1 < v.size(); k += 2) poly.vertices.emplace_back(v[k], v[k + 1]);
    return {poly, v[0]};
  }
  throw ConfigError(where + ": unknown inclusion kind '" + kind + "'");
}

std::string format_inclusion(const phantom::Inclusion& inc) {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{
                 [&](const phantom::Disc& d) {
                   out << "disc " << d.center.x() << ' ' << d.center.y() << ' ' << d.radius;
                 },
                 [&](const phantom::Kite& k) {
                   out << "kite " << k.center.x() << ' ' << k.center.y() << ' ' << k.scale << ' '
                       << k.rotation;
                 },
                 [&](const phantom::Polygon& p) {
                   out << "polygon " << inc.value;
                   for (const auto& q : p.vertices) out << ' ' << q.x() << ' ' << q.y();
                 },
             },
             inc.shape);
  if (!std::holds_alternative<phantom::Polygon>(inc.shape)) out << ' ' << inc.value;
  return out.str();
}

}  // namespace

forward::ForwardSpec ExperimentConfig::forward_spec() const {
  return forward::ForwardSpec{problem, geometry, grid};
}

ExperimentConfig default_config(forward::Problem problem) {
  ExperimentConfig c;
  c.problem = problem;
  if (problem == forward::Problem::Darcy) {
    c.phantom = phantom::default_darcy_phantom();
    c.truth_h = 0.02;
    c.sigma = 3e-4;
    c.sigma_percent.reset();
    c.h_init = 0.05;
    c.h_min = 0.003;
    c.h_max = 0.05;
    c.sensitivity_scaling = true;
    c.sensitivity_rule = ias::SensitivityRule::Inverse;
    c.profile_start = {0.0, 1.0};
    c.profile_end = {1.0, 0.0};
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  try {
    c.geometry.validate();
  } catch (const Error& e) {
    fail(std::string("[geometry] ") + e.what());
  }
  if (c.grid < 1) fail("[geometry] grid must be >= 1");
  if (c.sigma.has_value() == c.sigma_percent.has_value()) {
    fail("[noise] set exactly one of sigma and sigma_percent");
  }
  if (c.sigma && !(*c.sigma >= 0.0)) fail("[noise] sigma must be >= 0");
  if (c.sigma_percent && !(*c.sigma_percent >= 0.0)) fail("[noise] sigma_percent must be >= 0");
  if (!(c.truth_h > 0.0)) fail("[phantom] truth_h must be positive");
  if (!(c.h_init > 0.0)) fail("[mesh] h_init must be positive");
  if (!(c.h_min > 0.0) || !(c.h_max > c.h_min)) fail("[mesh] need 0 < h_min < h_max");
  if (!(c.alpha >= 1.0)) fail("[mesh] alpha must be >= 1");
  if (c.max_sweeps < 1) fail("[mesh] max_sweeps must be >= 1");
  if (!(c.gradation >= 0.0)) fail("[mesh] gradation must be >= 0");
  if (!(c.truth_h < c.h_init)) fail("[phantom] truth_h must be finer than h_init");
  if (!(c.eta > 0.0)) fail("[ias] eta must be positive");
  if (!(c.vartheta_star > 0.0)) fail("[ias] vartheta_star must be positive");
  if (!(c.threshold > 0.0)) fail("[ias] threshold must be positive");
  if (c.max_ias_iterations < 1) fail("[ias] max_iterations must be >= 1");
  if (c.max_cgls_iterations < 1) fail("[ias] max_cgls_iterations must be >= 1");
  if (!(c.inflation >= 0.0)) fail("[outer] inflation must be >= 0");
  if (c.outer_iterations < 1) fail("[outer] iterations must be >= 1");
  if (!(c.early_exit >= 0.0)) fail("[outer] early_exit must be >= 0");
  if (c.profile_points < 2) fail("[output] profile_points must be >= 2");
  try {
    phantom::validate(c.phantom, forward::domain_of(c.problem));
  } catch (const Error& e) {
    fail(std::string("[phantom] ") + e.what());
  }
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [name, section] : tree) {
    if (!known_keys().contains(name)) throw ConfigError("config: unknown section [" + name + "]");
    for (const auto& [key, value] : section) {
      const bool inclusion = name == "phantom" && key.rfind("inclusion", 0) == 0;
      if (!inclusion && !known_keys().at(name).contains(key)) {
        throw ConfigError("config: unknown key '" + key + "' in [" + name + "]");
      }
    }
  }
  const pt::ptree empty;
  auto section = [&](const std::string& name) -> const pt::ptree& {
    const auto child = tree.get_child_optional(name);
    return child ? *child : empty;
  };

  const auto& exp = section("experiment");
  const std::string problem = get<std::string>(exp, "experiment", "problem", "tomography");
  if (problem != "tomography" && problem != "darcy") {
    throw ConfigError("[experiment] problem must be 'tomography' or 'darcy'");
  }
  ExperimentConfig c =
      default_config(problem == "darcy" ? forward::Problem::Darcy : forward::Problem::Tomography);
  c.seed = get<std::uint64_t>(exp, "experiment", "seed", c.seed);

  const auto& ph = section("phantom");
  const std::string preset = get<std::string>(ph, "phantom", "preset", "default");
  if (preset == "none") {
    c.phantom.inclusions.clear();
  } else if (preset != "default") {
    throw ConfigError("[phantom] preset must be 'default' or 'none'");
  }
  std::vector<std::pair<std::string, std::string>> incs;
  for (const auto& [key, value] : ph) {
    if (key.rfind("inclusion", 0) == 0) incs.emplace_back(key, value.get_value<std::string>());
  }
  if (!incs.empty()) {
    c.phantom.inclusions.clear();
    for (const auto& [key, text] : incs) c.phantom.inclusions.push_back(parse_inclusion(text, "[phantom] " + key));
  }
  c.phantom.background = get<double>(ph, "phantom", "background", c.phantom.background);
  c.truth_h = get<double>(ph, "phantom", "truth_h", c.truth_h);

  const auto& geo = section("geometry");
  c.geometry.views = get<int>(geo, "geometry", "views", c.geometry.views);
  c.geometry.rays = get<int>(geo, "geometry", "rays", c.geometry.rays);
  c.geometry.source_radius = get<double>(geo, "geometry", "source_radius", c.geometry.source_radius);
  c.grid = get<int>(geo, "geometry", "grid", c.grid);

  const auto& noise = section("noise");
  if (noise.get_child_optional("sigma") || noise.get_child_optional("sigma_percent")) {
    c.sigma.reset();
    c.sigma_percent.reset();
    if (noise.get_child_optional("sigma")) c.sigma = get<double>(noise, "noise", "sigma", 0.0);
    if (noise.get_child_optional("sigma_percent")) {
      c.sigma_percent = get<double>(noise, "noise", "sigma_percent", 0.0);
    }
  }

  const auto& m = section("mesh");
  c.h_init = get<double>(m, "mesh", "h_init", c.h_init);
  c.h_min = get<double>(m, "mesh", "h_min", c.h_min);
  c.h_max = get<double>(m, "mesh", "h_max", c.h_max);
  c.alpha = get<double>(m, "mesh", "alpha", c.alpha);
  c.max_sweeps = get<int>(m, "mesh", "max_sweeps", c.max_sweeps);
  c.gradation = get<double>(m, "mesh", "gradation", c.gradation);

  const auto& ias = section("ias");
  c.eta = get<double>(ias, "ias", "eta", c.eta);
  c.vartheta_star = get<double>(ias, "ias", "vartheta_star", c.vartheta_star);
  c.hybrid = get<bool>(ias, "ias", "hybrid", c.hybrid);
  c.threshold = get<double>(ias, "ias", "threshold", c.threshold);
  c.max_ias_iterations = get<int>(ias, "ias", "max_iterations", c.max_ias_iterations);
  c.max_cgls_iterations = get<int>(ias, "ias", "max_cgls_iterations", c.max_cgls_iterations);
  c.sensitivity_scaling = get<bool>(ias, "ias", "sensitivity_scaling", c.sensitivity_scaling);
  if (auto rule = ias.get_optional<std::string>("sensitivity_rule")) {
    if (*rule == "proportional") {
      c.sensitivity_rule = ias::SensitivityRule::Proportional;
    } else if (*rule == "inverse") {
      c.sensitivity_rule = ias::SensitivityRule::Inverse;
    } else {
      throw ConfigError("[ias] sensitivity_rule must be proportional or inverse, got '" + *rule + "'");
    }
  }

  const auto& outer = section("outer");
  c.inflation = get<double>(outer, "outer", "inflation", c.inflation);
  c.outer_iterations = get<int>(outer, "outer", "iterations", c.outer_iterations);
  c.early_exit = get<double>(outer, "outer", "early_exit", c.early_exit);

  const auto& out = section("output");
  if (out.get_child_optional("profile_start")) {
    c.profile_start = point(out.get<std::string>("profile_start"), "[output] profile_start");
  }
  if (out.get_child_optional("profile_end")) {
    c.profile_end = point(out.get<std::string>("profile_end"), "[output] profile_end");
  }
  c.profile_points = get<int>(out, "output", "profile_points", c.profile_points);

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
  const auto old = out.precision(17);
  out << "[experiment]\nproblem = " << forward::to_string(c.problem) << "\nseed = " << c.seed
      << "\n\n[phantom]\npreset = none\nbackground = " << c.phantom.background
      << "\ntruth_h = " << c.truth_h << '\n';
  for (std::size_t k = 0; k < c.phantom.inclusions.size(); ++k) {
    out << "inclusion" << k + 1 << " = " << format_inclusion(c.phantom.inclusions[k]) << '\n';
  }
  out << "\n[geometry]\nviews = " << c.geometry.views << "\nrays = " << c.geometry.rays
      << "\nsource_radius = " << c.geometry.source_radius << "\ngrid = " << c.grid << "\n\n[noise]\n";
  if (c.sigma) out << "sigma = " << *c.sigma << '\n';
  if (c.sigma_percent) out << "sigma_percent = " << *c.sigma_percent << '\n';
  out << "\n[mesh]\nh_init = " << c.h_init << "\nh_min = " << c.h_min << "\nh_max = " << c.h_max
      << "\nalpha = " << c.alpha << "\nmax_sweeps = " << c.max_sweeps << "\ngradation = " << c.gradation << "\n\n[ias]\neta = " << c.eta
      << "\nvartheta_star = " << c.vartheta_star << "\nhybrid = " << (c.hybrid ? "true" : "false")
      << "\nthreshold = " << c.threshold << "\nmax_iterations = " << c.max_ias_iterations
      << "\nmax_cgls_iterations = " << c.max_cgls_iterations
      << "\nsensitivity_scaling = " << (c.sensitivity_scaling ? "true" : "false")
      << "\nsensitivity_rule = "
      << (c.sensitivity_rule == ias::SensitivityRule::Inverse ? "inverse" : "proportional")
      << "\n\n[outer]\ninflation = " << c.inflation << "\niterations = " << c.outer_iterations
      << "\nearly_exit = " << c.early_exit << "\n\n[output]\nprofile_start = " << c.profile_start.x()
      << ' ' << c.profile_start.y() << "\nprofile_end = " << c.profile_end.x() << ' '
      << c.profile_end.y() << "\nprofile_points = " << c.profile_points << '\n';
  out.precision(old);
}

}  // namespace bamesh::config
