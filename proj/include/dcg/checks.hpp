#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcg/driver.hpp"
#include "json.hpp"

namespace dcg {

using Json = nlohmann::ordered_json;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CheckItem {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string target;  // the bound the value is held to
};

struct CheckSection {
  std::string name;
  std::vector<CheckItem> items;
  Json data = Json::object();
  std::string error;          // set when a module error cut the section short
  bool numerical_error = false;
  double seconds = 0.0;

  bool passed() const;
  void add(std::string item, bool ok, double value, std::string target);
  const CheckItem* find(const std::string& item) const;
  Json to_json(bool timings) const;
};

// Ambient identities at `samples` random points each: pulled-back metric, frame against
// finite differences, Christoffel symbols, frame determinant, Killing field forms, Killing isometry,
// equivariance of the symmetry group.
CheckSection check_ambient(int samples = 1000, std::uint64_t seed = 1);

// Scale identities over m in [m_lo, m_hi] and the given zeta values.
CheckSection check_construction(int m_lo = 4, int m_hi = 16, const std::vector<double>& zetas = {-1.0, 0.0, 1.0});

// Chart against discrete mean curvature at the configured resolution and at twice n_theta;
// closed-form parallel torus.
CheckSection check_curvature(const ConstructionConfig& cfg);

// Remainder of the discrete linearization for random symmetric fields on the Clifford torus
// and on the initial surface.
CheckSection check_linearization(const ConstructionConfig& cfg, int fields = 3, std::uint64_t seed = 2024);

// Weighted quadratic remainder over sizes 1e-4 .. 1e-7.
CheckSection check_quadratic(const ConstructionConfig& cfg);

// sup f_tilde^-1 |rho^-2 H| / tau across m.
CheckSection check_estimates(const ConstructionConfig& cfg, const std::vector<int>& ms = {6, 10, 14});

// Low sym spectrum of -L_h, the approximate kernel on S_5[1], and the model problems.
CheckSection check_spectrum(const ConstructionConfig& cfg);

// Flat cylinder Dirichlet eigenvalue and the harmonic decay on the neck.
CheckSection check_neck(const ConstructionConfig& cfg);

// Force identity on a fine mesh, waist piece, zeta derivative and balance ratio.
CheckSection check_force(const ConstructionConfig& cfg, const std::vector<int>& ms = {8, 10}, int fine_n_theta = 384,
                         const std::vector<int>& ratio_ms = {8, 10, 12});

// Newton solve; with `repeat` a second run must reproduce the first bit for bit.
CheckSection check_solve(const ConstructionConfig& cfg, const SolveOptions& opt, bool repeat = true);

// Suite names accepted by run_report, in report order.
const std::vector<std::string>& suite_names();

struct ReportRequest {
  std::vector<std::string> suites;  // empty = all
  ConstructionConfig cfg;
  SolveOptions solve;
  bool timings = true;
};

struct Report {
  Json json;
  std::vector<CheckSection> sections;
  bool passed = false;
  int exit_code = 0;  // 0 pass, 2 check failure, 3 numerical error
};

// Runs each suite with the configured construction; suites tied to several m keep their own lists.
Report run_report(const ReportRequest& req);

Json config_json(const ConstructionConfig& cfg, const SolveOptions& opt);
Json solve_json(const SolveState& st);
Json force_json(const ForceReport& f);

// Wavefront OBJ in R^3: stereographic projection from (0,0,0,-1), or chart coordinates (x, y, z).
enum class ObjProjection { Stereographic, Chart };
void write_obj(const std::string& path, const TriMesh& topo, const std::vector<Vec4>& X,
               ObjProjection proj = ObjProjection::Stereographic);
void write_history_csv(const std::string& path, const SolveState& st);
void write_force_csv(const std::string& path, const ForceReport& f);
void write_spectrum_csv(const std::string& path, const std::vector<double>& values);

}  // namespace dcg
