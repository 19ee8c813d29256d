#include "bamesh/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "bamesh/clement.hpp"
#include "bamesh/forward.hpp"
#include "bamesh/mesh_io.hpp"
#include "bamesh/metric.hpp"
#include "bamesh/whitney.hpp"

namespace bamesh::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string roman(int k) {
  static const char* names[] = {"I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X"};
  return k >= 1 && k <= 10 ? names[k - 1] : std::to_string(k);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

void check_written(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

double resolve_sigma(const ExperimentConfig& config, const Vector& clean) {
  if (config.sigma) return *config.sigma;
  const double peak = clean.size() > 0 ? clean.cwiseAbs().maxCoeff() : 0.0;
  return 0.01 * config.sigma_percent.value_or(0.0) * peak;
}

Dataset prepare_dataset(const ExperimentConfig& config) {
  config::validate(config);
  Dataset d;
  d.truth_mesh = mesh::generate_initial_mesh({forward::domain_of(config.problem), config.truth_h});
  d.truth = phantom::make_phantom(config.phantom, d.truth_mesh);
  const auto op = forward::build_forward(config.forward_spec(), d.truth_mesh);
  d.clean = op.a_all.apply(d.truth);
  d.sigma = resolve_sigma(config, d.clean);
  d.data = forward::add_noise(d.clean, d.sigma, config.seed);
  return d;
}

Whitened whiten(const LinearOperator& a, const Vector& b, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("whiten: sigma must be positive");
  return {a.scaled(1.0 / sigma), b / sigma};
}

double effective_sigma(double sigma, double inflation, double h, int outer) {
  return outer == 1 ? std::max(sigma, inflation * h) : sigma;
}

std::vector<double> extract_profile(const mesh::TriMesh& mesh, const Vector& u_all,
                                    const mesh::Vec2& p0, const mesh::Vec2& p1, int n) {
  if (n < 2) throw InvalidArgument("extract_profile: need at least 2 points");
  if (u_all.size() != mesh.num_vertices()) {
    throw InvalidArgument("extract_profile: field does not match the mesh");
  }
  const mesh::PointLocator locator(mesh);
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / (n - 1);
    out[k] = mesh::evaluate_p1(locator, {u_all.data(), static_cast<std::size_t>(u_all.size())},
                               (1.0 - s) * p0 + s * p1);
  }
  return out;
}

double relative_l2_error(const mesh::TriMesh& truth_mesh, const Vector& truth,
                         const mesh::TriMesh& mesh, const Vector& u_all) {
  const mesh::PointLocator locator(mesh);
  Vector weight = Vector::Zero(truth_mesh.num_vertices());
  for (int t = 0; t < truth_mesh.num_triangles(); ++t) {
    for (int v : truth_mesh.triangle(t)) weight(v) += truth_mesh.area(t) / 3.0;
  }
  double num = 0.0, den = 0.0;
  const std::span<const double> u{u_all.data(), static_cast<std::size_t>(u_all.size())};
  for (int v = 0; v < truth_mesh.num_vertices(); ++v) {
    const double diff = mesh::evaluate_p1(locator, u, truth_mesh.vertex(v)) - truth(v);
    num += weight(v) * diff * diff;
    den += weight(v) * truth(v) * truth(v);
  }
  if (!(den > 0.0)) throw InvalidArgument("relative_l2_error: truth field is zero");
  return std::sqrt(num / den);
}

RunResult run_outer_loop(const ExperimentConfig& config, const Dataset& dataset, const Logger& log) {
  config::validate(config);
  auto result = std::make_shared<RunResult>();
  result->config = config;
  result->sigma = dataset.sigma;
  result->truth_profile.resize(config.profile_points);
  for (int k = 0; k < config.profile_points; ++k) {
    const double s = static_cast<double>(k) / (config.profile_points - 1);
    result->truth_profile[k] =
        phantom::evaluate(config.phantom, (1.0 - s) * config.profile_start + s * config.profile_end);
  }
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };

  const auto domain = forward::domain_of(config.problem);
  mesh::TriMesh current = mesh::generate_initial_mesh({domain, config.h_init});

  ias::IasOptions ias_opts;
  ias_opts.eta = config.eta;
  ias_opts.vartheta_star = config.vartheta_star;
  ias_opts.hybrid = config.hybrid;
  ias_opts.threshold = config.threshold;
  ias_opts.max_iterations = config.max_ias_iterations;
  ias_opts.z.max_iterations = config.max_cgls_iterations;

  const metric::MetricParams metric_params{config.h_min, config.h_max, config.alpha};
  remesh::RemeshOptions remesh_opts;
  remesh_opts.h_min = config.h_min;
  remesh_opts.h_max = config.h_max;
  remesh_opts.domain = domain;
  remesh_opts.max_sweeps = config.max_sweeps;

  std::string stage;
  auto fail = [&](const std::exception& e, StageError::Cause cause) -> StageError {
    return StageError(stage, e.what(), cause, result);
  };

  for (int outer = 1; outer <= config.outer_iterations; ++outer) {
    try {
      IterationReport rep;
      rep.outer = outer;
      rep.n_t = current.num_triangles();
      rep.n_v = current.num_vertices();
      rep.n_e = static_cast<int>(current.interior_edges().size());
      Stopwatch clock;

      stage = "forward";
      const auto op = forward::build_forward(config.forward_spec(), current);
      rep.seconds.forward = clock.lap();

      stage = "ias";
      rep.sigma_eff = effective_sigma(dataset.sigma, config.inflation, config.h_init, outer);
      if (!(rep.sigma_eff > 0.0)) throw ConfigError("noise level must be positive for whitening");
      const auto w = whiten(op.a, dataset.data, rep.sigma_eff);
      const auto inc = whitney::assemble_incidence(current);
      Vector vartheta;
      if (config.sensitivity_scaling) {
        const linalg::ThinQR qr_l{linalg::SparseColMatrix(inc.interior)};
        vartheta = ias::sensitivity_scaling(w.a, qr_l, config.vartheta_star, config.sensitivity_rule);
      } else {
        vartheta = Vector::Constant(inc.interior.rows(), config.vartheta_star);
      }
      const auto sol = ias::ias_solve(w.a, inc.interior, w.b, vartheta, ias_opts);
      rep.history = sol.history;
      Vector u_all = whitney::expand_vertices(current, sol.u);
      rep.seconds.ias = clock.lap();

      stage = "report";
      rep.relative_error = relative_l2_error(dataset.truth_mesh, dataset.truth, current, u_all);
      rep.profile = extract_profile(current, u_all, config.profile_start, config.profile_end,
                                    config.profile_points);
      clock.lap();

      std::optional<mesh::TriMesh> next;
      if (outer < config.outer_iterations) {
        stage = "clement";
        const Vector z_full = inc.full * u_all;
        const auto grad = clement::clement_gradient_full(current, z_full);
        rep.seconds.clement = clock.lap();

        stage = "metric";
        const auto field = metric::build_metric(grad, metric_params);
        std::vector<metric::Mat2> tensors = field.tensors;
        for (auto& t : tensors) {
          t = metric::clamp_eigenvalues(t, 1.0 / (config.h_max * config.h_max),
                                        1.0 / (config.h_min * config.h_min));
        }
        if (config.gradation > 1.0) metric::gradate(current, tensors, config.gradation);
        // Interpolating clamped tensors in the log domain keeps the eigenvalues
        // inside the clamp bounds.
        const metric::MetricFunction g = metric::MetricInterpolator(current, tensors);
        rep.seconds.metric = clock.lap();
        rep.max_gradient = field.max_gradient;
        rep.anisotropic_fraction =
            std::count(field.anisotropic.begin(), field.anisotropic.end(), 1) /
            static_cast<double>(field.anisotropic.size());

        stage = "remesh";
        auto adapted = remesh::adapt_mesh(current, g, remesh_opts);
        rep.seconds.remesh = clock.lap();
        rep.remesh = adapted.report;
        rep.conformity_before = metric::metric_conformity(current, g);
        rep.conformity_after = metric::metric_conformity(adapted.mesh, g);
        rep.in_band_before = remesh::fraction_in_band(current, g);
        next = std::move(adapted.mesh);
      }

      std::ostringstream msg;
      msg << "iteration " << roman(outer) << ": n_t=" << rep.n_t << " sigma_eff=" << rep.sigma_eff
          << " ias_updates=" << rep.history.size() << " error=" << rep.relative_error
          << " solver_s=" << rep.seconds.solver();
      if (next) {
        msg << " max_grad=" << *rep.max_gradient << " aniso=" << *rep.anisotropic_fraction
            << " -> n_t=" << next->num_triangles();
      }
      say(msg.str());

      result->iterations.push_back(std::move(rep));
      result->meshes.push_back(current);
      result->fields.push_back(std::move(u_all));
      if (!next) break;

      const double change =
          std::abs(next->num_triangles() - current.num_triangles()) / double(current.num_triangles());
      current = std::move(*next);
      if (config.early_exit > 0.0 && outer >= 2 && change < config.early_exit) {
        result->stop_reason = "early-exit";
        say("element count changed by less than " + std::to_string(config.early_exit) +
            ", stopping");
        break;
      }
    } catch (const StageError&) {
      throw;
    } catch (const ConfigError& e) {
      throw fail(e, StageError::Cause::Config);
    } catch (const NumericalError& e) {
      throw fail(e, StageError::Cause::Numerical);
    } catch (const std::exception& e) {
      throw fail(e, StageError::Cause::Other);
    }
  }
  return *result;
}

RunResult run_outer_loop(const ExperimentConfig& config, const Logger& log) {
  Dataset d;
  try {
    d = prepare_dataset(config);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("data", e.what(),
                     dynamic_cast<const NumericalError*>(&e) != nullptr ? StageError::Cause::Numerical
                                                                        : StageError::Cause::Other,
                     std::make_shared<RunResult>());
  }
  if (log) {
    log("data: m=" + std::to_string(d.data.size()) + " sigma=" + std::to_string(d.sigma) +
        " truth n_t=" + std::to_string(d.truth_mesh.num_triangles()));
  }
  return run_outer_loop(config, d, log);
}

Comparison compare_anisotropy(const ExperimentConfig& config, const Logger& log) {
  const Dataset d = prepare_dataset(config);
  ExperimentConfig iso = config;
  iso.alpha = 1.0;
  Comparison cmp;
  if (log) log("anisotropic run (alpha=" + std::to_string(config.alpha) + ")");
  cmp.anisotropic = run_outer_loop(config, d, log);
  if (log) log("isotropic run (alpha=1)");
  cmp.isotropic = run_outer_loop(iso, d, log);
  return cmp;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

json to_json(const ias::IterationRecord& r) {
  return {{"phase", r.phase},
          {"iteration", r.iteration},
          {"cgls", r.cgls_iterations},
          {"stop", std::string(linalg::to_string(r.cgls_stop))},
          {"energy_before_theta", r.energy_before_theta},
          {"energy", r.energy},
          {"relative_change", r.relative_change},
          {"compatibility", r.compatibility}};
}

linalg::StopReason stop_from_string(const std::string& s) {
  for (auto r : {linalg::StopReason::Discrepancy, linalg::StopReason::ObjectiveIncrease,
                 linalg::StopReason::MaxIterations, linalg::StopReason::Stationary}) {
    if (linalg::to_string(r) == s) return r;
  }
  throw ParseError("unknown CGLS stop reason '" + s + "'", 0);
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

json to_json(const IterationReport& r) {
  json hist = json::array();
  for (const auto& h : r.history) hist.push_back(to_json(h));
  json j = {{"outer", r.outer},
            {"n_t", r.n_t},
            {"n_v", r.n_v},
            {"n_e", r.n_e},
            {"sigma_eff", r.sigma_eff},
            {"history", hist},
            {"seconds",
             {{"forward", r.seconds.forward},
              {"ias", r.seconds.ias},
              {"clement", r.seconds.clement},
              {"metric", r.seconds.metric},
              {"remesh", r.seconds.remesh}}},
            {"relative_error", r.relative_error},
            {"conformity_before", opt(r.conformity_before)},
            {"conformity_after", opt(r.conformity_after)},
            {"in_band_before", opt(r.in_band_before)},
            {"max_gradient", opt(r.max_gradient)},
            {"anisotropic_fraction", opt(r.anisotropic_fraction)},
            {"profile", r.profile}};
  if (r.remesh) {
    j["remesh"] = {{"sweeps", r.remesh->sweeps},       {"splits", r.remesh->splits},
                   {"collapses", r.remesh->collapses}, {"flips", r.remesh->flips},
                   {"moves", r.remesh->moves},         {"fraction_in_band", r.remesh->fraction_in_band},
                   {"converged", r.remesh->converged}, {"stalled", r.remesh->stalled}};
  } else {
    j["remesh"] = nullptr;
  }
  return j;
}

IterationReport iteration_from_json(const json& j) {
  IterationReport r;
  r.outer = j.at("outer");
  r.n_t = j.at("n_t");
  r.n_v = j.at("n_v");
  r.n_e = j.at("n_e");
  r.sigma_eff = j.at("sigma_eff");
  for (const auto& h : j.at("history")) {
    ias::IterationRecord rec;
    rec.phase = h.at("phase");
    rec.iteration = h.at("iteration");
    rec.cgls_iterations = h.at("cgls");
    rec.cgls_stop = stop_from_string(h.at("stop"));
    rec.energy_before_theta = h.at("energy_before_theta");
    rec.energy = h.at("energy");
    rec.relative_change = h.at("relative_change");
    rec.compatibility = h.at("compatibility");
    r.history.push_back(rec);
  }
  const auto& s = j.at("seconds");
  r.seconds = {s.at("forward"), s.at("ias"), s.at("clement"), s.at("metric"), s.at("remesh")};
  r.relative_error = j.at("relative_error");
  r.conformity_before = opt_from<double>(j.at("conformity_before"));
  r.conformity_after = opt_from<double>(j.at("conformity_after"));
  r.in_band_before = opt_from<double>(j.at("in_band_before"));
  r.max_gradient = opt_from<double>(j.at("max_gradient"));
  r.anisotropic_fraction = opt_from<double>(j.at("anisotropic_fraction"));
  r.profile = j.at("profile").get<std::vector<double>>();
  if (!j.at("remesh").is_null()) {
    const auto& m = j.at("remesh");
    remesh::RemeshReport rr;
    rr.sweeps = m.at("sweeps");
    rr.splits = m.at("splits");
    rr.collapses = m.at("collapses");
    rr.flips = m.at("flips");
    rr.moves = m.at("moves");
    rr.fraction_in_band = m.at("fraction_in_band");
    rr.converged = m.at("converged");
    rr.stalled = m.at("stalled");
    r.remesh = rr;
  }
  return r;
}

std::string csv_opt(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(17) << *v;
  return s.str();
}

}  // namespace

void write_tables(const RunResult& result, const fs::path& out_dir) {
  if (result.iterations.empty()) throw InvalidArgument("write_reports: no iterations to report");
  fs::create_directories(out_dir);

  const auto cg_path = out_dir / "cgls_counts.csv";
  auto cg = open_out(cg_path);
  cg << "outer,phase,iteration,cgls,stop\n";
  for (const auto& it : result.iterations)
    for (const auto& h : it.history)
      cg << it.outer << ',' << h.phase << ',' << h.iteration << ',' << h.cgls_iterations << ','
         << linalg::to_string(h.cgls_stop) << '\n';
  check_written(cg, cg_path);

  const auto ms_path = out_dir / "mesh_stats.csv";
  auto ms = open_out(ms_path);
  ms << "outer,n_t,n_v,n_e,sigma_eff,ias_updates,relative_error,seconds_forward,seconds_ias,"
        "seconds_clement,seconds_metric,seconds_remesh,seconds_solver,conformity_before,"
        "conformity_after,in_band_before,in_band_after\n";
  for (const auto& it : result.iterations) {
    ms << it.outer << ',' << it.n_t << ',' << it.n_v << ',' << it.n_e << ',' << it.sigma_eff << ','
       << it.history.size() << ',' << it.relative_error << ',' << it.seconds.forward << ','
       << it.seconds.ias << ',' << it.seconds.clement << ',' << it.seconds.metric << ','
       << it.seconds.remesh << ',' << it.seconds.solver() << ',' << csv_opt(it.conformity_before)
       << ',' << csv_opt(it.conformity_after) << ',' << csv_opt(it.in_band_before) << ','
       << csv_opt(it.remesh ? std::optional<double>(it.remesh->fraction_in_band) : std::nullopt)
       << '\n';
  }
  check_written(ms, ms_path);

  const auto en_path = out_dir / "energy.csv";
  auto en = open_out(en_path);
  en << "outer,phase,iteration,energy_before_theta,energy,relative_change,compatibility\n";
  for (const auto& it : result.iterations)
    for (const auto& h : it.history)
      en << it.outer << ',' << h.phase << ',' << h.iteration << ',' << h.energy_before_theta << ','
         << h.energy << ',' << h.relative_change << ',' << h.compatibility << '\n';
  check_written(en, en_path);

  const auto pr_path = out_dir / "profile.csv";
  auto pr = open_out(pr_path);
  const auto& c = result.config;
  pr << "s,x,y,truth";
  for (const auto& it : result.iterations) pr << ",iteration_" << it.outer;
  pr << '\n';
  const int n = static_cast<int>(result.truth_profile.size());
  for (int k = 0; k < n; ++k) {
    const double s = n > 1 ? static_cast<double>(k) / (n - 1) : 0.0;
    const mesh::Vec2 p = (1.0 - s) * c.profile_start + s * c.profile_end;
    pr << s << ',' << p.x() << ',' << p.y() << ',' << result.truth_profile[k];
    for (const auto& it : result.iterations) pr << ',' << it.profile.at(k);
    pr << '\n';
  }
  check_written(pr, pr_path);
}

void write_reports(const RunResult& result, const fs::path& out_dir) {
  write_tables(result, out_dir);

  json iters = json::array();
  for (const auto& it : result.iterations) iters.push_back(to_json(it));
  std::ostringstream cfg;
  config::write_config(cfg, result.config);
  const json doc = {{"problem", std::string(forward::to_string(result.config.problem))},
                    {"sigma", result.sigma},
                    {"stop_reason", result.stop_reason},
                    {"convergence_rule",
                     "fixed number of outer iterations with an early exit when the element count "
                     "changes by less than the configured fraction"},
                    {"config", cfg.str()},
                    {"truth_profile", result.truth_profile},
                    {"iterations", iters}};
  const auto js_path = out_dir / "reports.json";
  auto js = open_out(js_path);
  js << doc.dump(2) << '\n';
  check_written(js, js_path);

  const auto cfg_path = out_dir / "config.ini";
  auto cf = open_out(cfg_path);
  cf << cfg.str();
  check_written(cf, cfg_path);

  for (std::size_t k = 0; k < result.meshes.size(); ++k) {
    const std::string tag = "iteration_" + std::to_string(k + 1);
    mesh::write_mesh(result.meshes[k], out_dir / (tag + "_mesh.txt"));
    forward::write_vector_csv(out_dir / (tag + "_field.csv"), result.fields[k], "u");
    const Vector& u = result.fields[k];
    const mesh::VtkPointField f{"u", std::vector<double>(u.data(), u.data() + u.size()), 1};
    mesh::write_vtk(result.meshes[k], out_dir / (tag + ".vtk"), std::span(&f, 1));
  }
}

RunResult load_reports(const fs::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error("cannot open " + json_path.string());
  json doc;
  try {
    doc = json::parse(in);
    RunResult r;
    std::istringstream cfg(doc.at("config").get<std::string>());
    r.config = config::parse_config(cfg);
    r.sigma = doc.at("sigma");
    r.stop_reason = doc.at("stop_reason");
    r.truth_profile = doc.at("truth_profile").get<std::vector<double>>();
    for (const auto& j : doc.at("iterations")) r.iterations.push_back(iteration_from_json(j));
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("reports.json: ") + e.what(), 0);
  }
}

void write_comparison(const Comparison& cmp, const fs::path& out_dir) {
  write_reports(cmp.anisotropic, out_dir / "anisotropic");
  write_reports(cmp.isotropic, out_dir / "isotropic");
  const auto path = out_dir / "comparison.csv";
  auto out = open_out(path);
  out << "outer,n_t_anisotropic,n_t_isotropic,n_t_ratio,solver_seconds_anisotropic,"
         "solver_seconds_isotropic\n";
  const auto n = std::max(cmp.anisotropic.iterations.size(), cmp.isotropic.iterations.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto* a = k < cmp.anisotropic.iterations.size() ? &cmp.anisotropic.iterations[k] : nullptr;
    const auto* i = k < cmp.isotropic.iterations.size() ? &cmp.isotropic.iterations[k] : nullptr;
    out << k + 1 << ',' << (a ? std::to_string(a->n_t) : "") << ','
        << (i ? std::to_string(i->n_t) : "") << ',';
    if (a && i) out << double(a->n_t) / i->n_t;
    out << ',';
    if (a) out << a->seconds.solver();
    out << ',';
    if (i) out << i->seconds.solver();
    out << '\n';
  }
  check_written(out, path);
}

std::vector<CglsCount> read_cgls_counts(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw Error("cannot open " + csv.string());
  std::string line;
  std::getline(in, line);
  std::vector<CglsCount> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream s(line);
    CglsCount c;
    char comma;
    if (!(s >> c.outer >> comma >> c.phase >> comma >> c.iteration >> comma >> c.cgls >> comma) ||
        !std::getline(s, c.stop)) {
      throw ParseError("cgls_counts.csv: malformed row", lineno);
    }
    out.push_back(c);
  }
  return out;
}

std::string summary_table(const RunResult& result) {
  std::ostringstream out;
  out << std::left << std::setw(6) << "iter" << std::right << std::setw(8) << "n_t" << std::setw(8)
      << "n_v" << std::setw(10) << "sigma" << std::setw(8) << "ias" << std::setw(10) << "cgls"
      << std::setw(12) << "rel_err" << std::setw(10) << "solver_s" << '\n';
  for (const auto& it : result.iterations) {
    int cgls = 0;
    for (const auto& h : it.history) cgls += h.cgls_iterations;
    out << std::left << std::setw(6) << roman(it.outer) << std::right << std::setw(8) << it.n_t
        << std::setw(8) << it.n_v << std::setw(10) << std::setprecision(4) << it.sigma_eff
        << std::setw(8) << it.history.size() << std::setw(10) << cgls << std::setw(12)
        << std::setprecision(4) << it.relative_error << std::setw(10) << std::fixed
        << std::setprecision(2) << it.seconds.solver() << std::defaultfloat << '\n';
  }
  out << "stop: " << result.stop_reason << '\n';
  return out.str();
}

}  // namespace bamesh::pipeline
