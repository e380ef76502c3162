#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcg/trimesh.hpp"

namespace dcg {

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Target of the weight rho outside r = 2/m.
enum class RhoReading { TwoM, TwoOverM };

struct Resolution {
  int n_theta = 64;   // multiple of 8
  int n_axial = 0;    // intervals on each half of the bridge; 0 picks a near-equilateral default
  int n_square = 0;   // intervals from r = 1/m to the square; 0 picks a default
  double band_boost = 3.0;     // extra ring density over 1/m < r < 2/m
  double corner_round = 0.5;   // rounding of interior rings near the square corners
};

struct ConstructionParams {
  int m = 6;
  double zeta = 0.0;
  double b = 0.0;
  double gamma = 0.5;
  double c_bar = 10.0;
  int n_theta = 64;
  int n_axial = 0;
  int n_square = 0;
  double band_boost = 3.0;
  double corner_round = 0.5;
  RhoReading rho_reading = RhoReading::TwoM;
  // derived
  double tau_bar = 0.0;
  double tau = 0.0;
  double a = 0.0;
  double a_bar = 0.0;
  double d = 0.0;          // half side of the square cell
  double ea_residual = 0;  // a + zeta - m^2/4pi - log 2
  bool ea_ok = false;
};

// Quintic profile with Psi - 1/2 odd, clamped outside [-1, 1].
double profile_Psi(double s);
double profile_Psi_d1(double s);
double profile_Psi_d2(double s);

// psi[a,b](s) = Psi(L(s)), L(a) = -3, L(b) = 3.
double cutoff_psi(double a, double b, double s);
double cutoff_psi_d1(double a, double b, double s);
double cutoff_psi_d2(double a, double b, double s);

double default_region_constant(double a_bar);

// b <= 0 selects the default region constant.
ConstructionParams derive_params(int m, double zeta, double b, double gamma, const Resolution& res,
                                 double c_bar = 10.0, RhoReading reading = RhoReading::TwoM);

struct Profile {
  double phi_cat = 0.0;
  double phi_glued = 0.0;
  double d1 = 0.0;  // derivative of the glued profile
  double d2 = 0.0;
};

Profile profile_phi(double r, const ConstructionParams& p);

double weight_rho_at(double r, const ConstructionParams& p);

enum class Region { S0, S1Upper, S1Lower, LambdaUpper, LambdaLower };
const char* region_name(Region r);

struct RegionLabel {
  Region region = Region::S0;
  double x_under = 0.0;  // t_under - b - x
  double x_over = 0.0;   // a_bar - b - y - t_under
  double x_min = 0.0;
};

bool regions_admissible(const ConstructionParams& p, double b, double x, double y);

// t_under is signed; the lower half mirrors the upper half.
RegionLabel region_label(double t_under, const ConstructionParams& p, double b, double x = 0.0, double y = 0.0);

struct NeckLengths {
  double ell_under = 0.0;
  double ell = 0.0;
  double eellm_residual = 0.0;  // ell + 2b + zeta - m^2/4pi
  bool eellm_ok = false;
};

NeckLengths neck_lengths(const ConstructionParams& p, double b, double x = 0.0, double y = 0.0);

enum class ChartKind { Catenoid, Sheet };

struct VertexInfo {
  ChartKind chart = ChartKind::Catenoid;
  int ring = 0;
  int idx = 0;
  double theta = 0.0;
  double t = 0.0;      // catenoid parameter (extended onto the sheets by arccosh(r/tau))
  double r = 0.0;
  int sheet = 1;       // +1 upper half, -1 lower half
  double t_under = 0.0;
  double rho = 0.0;
  double w = 0.0;      // substitute kernel cutoff
  RegionLabel label;
  double f_tilde = 1.0;
};

struct SurfaceMesh {
  ConstructionParams params;
  TriMesh mesh;
  std::vector<VertexInfo> info;
  int n_theta = 0;
  int n_axial = 0;
  int n_square = 0;
  int rings = 0;       // number of rings (K + 1)
  int waist_ring = 0;
  double seam_error = 0.0;  // max R^4 mismatch of catenoid and sheet charts on the seam ring

  int vid(int ring, int i) const;
  // Chart point of a vertex re-evaluated from its chart coordinates.
  DomainPoint chart_point(int v) const;
};

SurfaceMesh build_mesh(const ConstructionParams& p);

// Expected vertex and triangle counts for the given resolution.
int expected_vertex_count(const ConstructionParams& p);

struct WeightReport {
  std::vector<double> f_tilde;
  std::vector<double> chi_factor;  // rho^2
  double min_f = 0.0;
  double max_rho_f = 0.0;
  double lower_bound = 0.0;   // tau_bar^(8 gamma/9 + 1/9)
  double upper_bound = 0.0;   // tau_bar^(8 gamma/9 - 1)
  bool lower_ok = false;
  bool upper_ok = false;
};

WeightReport field_weights(const SurfaceMesh& s, double gamma);

struct ModelMaps {
  std::vector<std::array<double, 2>> varpi;  // torus-chart vertices (NaN elsewhere)
  std::vector<std::array<double, 3>> gauss;  // flat-model unit normal on the bridge (NaN elsewhere)
  double R_check = 0.0;   // 1/cosh[(b+x)a/a_bar]
  double R_tilde = 0.0;   // (m/sqrt2) r at t = a - (b+x)a/a_bar
  double R_tilde_model = 0.0;  // 2^{-1/2} exp(-(b+x)a/a_bar)
};

ModelMaps model_maps(const SurfaceMesh& s, double x = 0.0);

// Exports.
void write_obj(const TriMesh& m, const std::string& path, const std::string& comment = "");
void write_mesh_csv(const SurfaceMesh& s, const std::string& path);
std::string construction_summary_json(const SurfaceMesh& s, int indent = 2);

}  // namespace dcg
