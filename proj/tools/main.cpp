#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"

using namespace dcg;
using dcg::cli::CliConfig;

namespace {

enum Exit { kOk = 0, kCheckFailed = 2, kNumerical = 3, kConfig = 4 };

struct Overrides {
  std::string config;
  std::optional<int> m, n_theta, n_axial, n_square, max_iter;
  std::optional<double> zeta, b, gamma, c_bar, tol_h;
  std::optional<std::string> rho_reading, zeta_mode, out_dir, output;
  bool no_timings = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config, "TOML configuration file")->check(CLI::ExistingFile);
  sub->add_option("--m", o.m, "number of catenoidal necks per row")->check(CLI::Range(2, 64));
  sub->add_option("--zeta", o.zeta, "balancing parameter");
  sub->add_option("--b", o.b, "region constant (<= 0 picks the default)");
  sub->add_option("--gamma", o.gamma, "Hoelder exponent of the weighted norms");
  sub->add_option("--c-bar", o.c_bar, "bound on |zeta|");
  sub->add_option("--n-theta", o.n_theta, "angular resolution of the neck");
  sub->add_option("--n-axial", o.n_axial, "axial resolution of the neck");
  sub->add_option("--n-square", o.n_square, "resolution of the sheet squares");
  sub->add_option("--rho-reading", o.rho_reading, "neck weight scale: 2m or 2/m");
  sub->add_option("--out-dir", o.out_dir, "directory for relative output paths");
  sub->add_option("-o,--output", o.output, "JSON output path (default stdout)");
  sub->add_flag("--no-timings", o.no_timings, "omit wall-clock times from JSON");
}

CliConfig resolve(const Overrides& o) {
  CliConfig c = o.config.empty() ? CliConfig{} : cli::load_config(o.config);
  ConstructionConfig& cc = c.construction;
  if (o.m) cc.m = *o.m;
  if (o.zeta) cc.zeta = *o.zeta;
  if (o.b) cc.b = *o.b;
  if (o.gamma) cc.gamma = *o.gamma;
  if (o.c_bar) cc.c_bar = *o.c_bar;
  if (o.n_theta) cc.res.n_theta = *o.n_theta;
  if (o.n_axial) cc.res.n_axial = *o.n_axial;
  if (o.n_square) cc.res.n_square = *o.n_square;
  if (o.rho_reading) cc.reading = cli::parse_rho_reading(*o.rho_reading);
  if (o.max_iter) c.solve.max_iter = *o.max_iter;
  if (o.tol_h) c.solve.tol_H = *o.tol_h;
  if (o.zeta_mode) c.solve.zeta_mode = cli::parse_zeta_mode(*o.zeta_mode);
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.output) c.report = *o.output;
  if (o.no_timings) c.timings = false;
  if (cc.m < 2) throw ConfigError("m must be at least 2");
  if (!(cc.gamma > 0 && cc.gamma < 1)) throw ConfigError("gamma must lie in (0, 1)");
  return c;
}

std::string out_path(const CliConfig& c, const std::string& p) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  if (path.is_absolute() || c.out_dir.empty() || c.out_dir == ".") return p;
  std::filesystem::create_directories(c.out_dir);
  return (std::filesystem::path(c.out_dir) / path).string();
}

void emit(const CliConfig& c, const Json& j) {
  const std::string text = j.dump(2) + "\n";
  if (c.report.empty() || c.report == "-") {
    std::cout << text;
    return;
  }
  const std::string path = out_path(c, c.report);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

ObjProjection projection(const std::string& s) {
  if (s == "stereographic") return ObjProjection::Stereographic;
  if (s == "chart") return ObjProjection::Chart;
  throw ConfigError("projection must be stereographic or chart");
}

Json mesh_json(const SurfaceMesh& s) {
  const GenusReport g = genus_bookkeeping(s);
  return {{"vertices", s.mesh.num_vertices()},
          {"triangles", s.mesh.tri.size()},
          {"seam_error", s.seam_error},
          {"cell_chi", g.cell_chi},
          {"closed_chi", g.closed_chi},
          {"genus", g.genus},
          {"genus_ok", g.ok}};
}

int cmd_construct(const CliConfig& c, const std::string& obj, const std::string& csv, const std::string& proj) {
  const SurfaceMesh s = build_mesh(c.construction.derive());
  Json j;
  j["config"] = config_json(c.construction, c.solve);
  j["summary"] = Json::parse(construction_summary_json(s));
  j["mesh"] = mesh_json(s);
  if (!obj.empty()) write_obj(out_path(c, obj), s.mesh, s.mesh.X, projection(proj));
  if (!csv.empty()) write_mesh_csv(s, out_path(c, csv));
  emit(c, j);
  return kOk;
}

int cmd_check(const CliConfig& c, const std::vector<std::string>& suites) {
  ReportRequest req;
  req.suites = suites;
  req.cfg = c.construction;
  req.solve = c.solve;
  req.timings = c.timings;
  const Report r = run_report(req);
  emit(c, r.json);
  for (const CheckSection& s : r.sections) {
    std::fprintf(stderr, "%-13s %s", s.name.c_str(), s.passed() ? "PASS" : "FAIL");
    if (!s.error.empty()) std::fprintf(stderr, "  (%s)", s.error.c_str());
    std::fprintf(stderr, "\n");
  }
  return r.exit_code;
}

Gauge gauge(const std::string& s) {
  if (s == "h") return Gauge::H;
  if (s == "chi") return Gauge::Chi;
  if (s == "g") return Gauge::G;
  throw ConfigError("gauge must be h, chi or g");
}

int cmd_spectrum(const CliConfig& c, int k, double sigma, const std::string& g, const std::string& csv) {
  const SurfaceMesh s = build_mesh(c.construction.derive());
  const ShapeData d = shape_data(s, chart_shape(s));
  const DiscreteOperator op = assemble_operator(s.mesh, d, gauge(g));
  const SymBasis basis = sym_basis(s.mesh.group, s.mesh.num_vertices());
  const EigenResult e = eigen_low(op, k, basis, sigma);
  Json j;
  j["config"] = config_json(c.construction, c.solve);
  j["gauge"] = gauge_name(gauge(g));
  j["sigma"] = sigma;
  j["sym_dimension"] = basis.size();
  j["eigenvalues"] = e.values;
  j["residuals"] = e.residuals;
  j["count_abs_le_0.2"] = count_eigenvalues(op, basis, -0.2, 0.2);
  j["count_abs_le_0.5"] = count_eigenvalues(op, basis, -0.5, 0.5);
  if (!csv.empty()) write_spectrum_csv(out_path(c, csv), e.values);
  emit(c, j);
  return kOk;
}

int cmd_force(const CliConfig& c, const std::string& csv) {
  const SurfaceMesh s = build_mesh(c.construction.derive());
  const ForceReport f = force_report(s);
  Json j;
  j["config"] = config_json(c.construction, c.solve);
  j["force"] = force_json(f);
  j["zeta_update"] = zeta_update(f.F_interior, s.params);
  if (!csv.empty()) write_force_csv(out_path(c, csv), f);
  emit(c, j);
  return kOk;
}

int cmd_solve(const CliConfig& c, const std::string& history, const std::string& obj, const std::string& proj) {
  const SolveState st = run_newton(c.construction, c.solve);
  const EmbeddednessReport emb = embeddedness_check(st.surface, st.X);
  const GenusReport g = genus_bookkeeping(st.surface);
  Json j;
  j["config"] = config_json(c.construction, c.solve);
  j["solve"] = solve_json(st);
  j["embeddedness"] = {{"embedded", emb.embedded},         {"separation", emb.separation},
                       {"required", emb.required},         {"margin", emb.margin},
                       {"bridge_monotone", emb.bridge_monotone}, {"violations", emb.violations}};
  j["genus"] = {{"genus", g.genus}, {"ok", g.ok}};
  if (!history.empty()) write_history_csv(out_path(c, history), st);
  if (!obj.empty()) write_obj(out_path(c, obj), st.surface.mesh, st.X, projection(proj));
  emit(c, j);
  switch (st.status) {
    case SolveStatus::Converged:
      return kOk;
    case SolveStatus::NumericalFailure:
      return kNumerical;
    default:
      return kCheckFailed;
  }
}

int cmd_export(const CliConfig& c, const std::string& obj, const std::string& csv, const std::string& proj) {
  if (obj.empty() && csv.empty()) throw ConfigError("export needs --obj or --csv");
  const SurfaceMesh s = build_mesh(c.construction.derive());
  if (!obj.empty()) write_obj(out_path(c, obj), s.mesh, s.mesh.X, projection(proj));
  if (!csv.empty()) write_mesh_csv(s, out_path(c, csv));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doubled Clifford torus gluing: construction, checks and solver"};
  app.require_subcommand(1);
  Overrides o;
  std::string obj, csv, history, proj = "stereographic", g = "h";
  std::vector<std::string> suites;
  int k = 6;
  double sigma = 0.0;

  auto* construct = app.add_subcommand("construct", "build the initial surface and print its summary");
  add_common(construct, o);
  construct->add_option("--obj", obj, "OBJ mesh path");
  construct->add_option("--csv", csv, "per-vertex CSV path");
  construct->add_option("--projection", proj, "stereographic or chart");

  auto* check = app.add_subcommand("check", "run check suites and write a JSON report");
  add_common(check, o);
  check->add_option("suites", suites, "suites to run (default all)");
  check->add_option("--max-iter", o.max_iter, "Newton iteration cap");
  check->add_option("--tol-h", o.tol_h, "residual tolerance of the solve");
  check->add_option("--zeta-mode", o.zeta_mode, "coupled or jacobi");

  auto* spectrum = app.add_subcommand("spectrum", "low symmetric eigenvalues of the linearized operator");
  add_common(spectrum, o);
  spectrum->add_option("--k", k, "number of eigenvalues")->check(CLI::Range(1, 64));
  spectrum->add_option("--sigma", sigma, "shift");
  spectrum->add_option("--gauge", g, "h, chi or g");
  spectrum->add_option("--csv", csv, "eigenvalue CSV path");

  auto* force = app.add_subcommand("force", "boundary and interior force of the initial surface");
  add_common(force, o);
  force->add_option("--csv", csv, "per-piece CSV path");

  auto* solve = app.add_subcommand("solve", "Newton iteration for the minimal surface");
  add_common(solve, o);
  solve->add_option("--max-iter", o.max_iter, "Newton iteration cap");
  solve->add_option("--tol-h", o.tol_h, "residual tolerance");
  solve->add_option("--zeta-mode", o.zeta_mode, "coupled or jacobi");
  solve->add_option("--history", history, "iteration history CSV path");
  solve->add_option("--obj", obj, "OBJ path of the solved surface");
  solve->add_option("--projection", proj, "stereographic or chart");

  auto* exp = app.add_subcommand("export", "write the initial mesh as OBJ and/or CSV");
  add_common(exp, o);
  exp->add_option("--obj", obj, "OBJ mesh path");
  exp->add_option("--csv", csv, "per-vertex CSV path");
  exp->add_option("--projection", proj, "stereographic or chart");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    const CliConfig c = resolve(o);
    if (*construct) return cmd_construct(c, obj, csv, proj);
    if (*check) return cmd_check(c, suites);
    if (*spectrum) return cmd_spectrum(c, k, sigma, g, csv);
    if (*force) return cmd_force(c, csv);
    if (*solve) return cmd_solve(c, history, obj, proj);
    if (*exp) return cmd_export(c, obj, csv, proj);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const ConstructionError& e) {
    std::fprintf(stderr, "construction error: %s\n", e.what());
    return kConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumerical;
  }
  return kOk;
}
