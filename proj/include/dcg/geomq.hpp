#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcg/initsurf.hpp"
#include "dcg/trimesh.hpp"

namespace dcg {

struct MeshQualityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PerturbationTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Symmetric 2x2 stored as (11, 12, 22).
using Sym2 = std::array<double, 3>;

struct ShapeEntry {
  Sym2 first{};   // g_ab in chart coordinates
  Sym2 second{};  // A_ab = <nabla_a d_b, nu>
  Vec4 normal;
  double H = 0.0;
  double A2 = 0.0;
};

// Chart data in (x, y, z): point, first and second derivatives in chart parameters (u, v).
struct ChartJet {
  DomainPoint p;
  std::array<double, 3> pu{}, pv{};
  std::array<double, 3> puu{}, puv{}, pvv{};
};

// Intrinsic shape from a chart jet; the normal is the one making (pu, pv, nu) positively oriented.
// With `euclidean` the flat metric of R^3 replaces the pulled-back sphere metric (normal left empty).
ShapeEntry shape_from_jet(const ChartJet& j, bool euclidean = false);

ChartJet catenoid_jet(double tau, double t, double theta);
// Graph z = sheet * phi(r) over (x, y).
ChartJet sheet_jet(const ConstructionParams& p, double x, double y, int sheet);
// Constant height graph z = c over (x, y).
ChartJet level_jet(double x, double y, double c);

ChartJet vertex_jet(const SurfaceMesh& s, int v);
ShapeEntry chart_shape(const SurfaceMesh& s, int v);
std::vector<ShapeEntry> chart_shape(const SurfaceMesh& s);

// Discrete curvature on a triangle mesh in S^3.
struct DiscreteShape {
  std::vector<double> H;
  std::vector<double> area;  // barycentric, this cell only
  std::vector<Vec4> normal;
  std::vector<Vec4> lap;     // (L X)_i / A_i
};

DiscreteShape discrete_shape(const TriMesh& m);

// X_phi = cos(phi) X + sin(phi) nu.
struct PerturbedMesh {
  const TriMesh* base = nullptr;
  std::vector<Vec4> normal;  // normal field used for the perturbation
  std::vector<double> phi;
  std::vector<Vec4> X;

  // X_phi[j] - X_phi[i] without cancellation.
  Vec4 edge(int i, int j) const;
};

PerturbedMesh perturb_normal(const TriMesh& base, const std::vector<Vec4>& normal, const std::vector<double>& phi);
DiscreteShape discrete_shape(const PerturbedMesh& pm);

// Derivative of the discrete mean curvature of X_{phi + s*dphi} at s = 0.
std::vector<double> discrete_tangent(const TriMesh& base, const std::vector<Vec4>& normal,
                                     const std::vector<double>& phi, const std::vector<double>& dphi);

std::vector<Vec4> chart_normals(const SurfaceMesh& s);

// Vertices at least `collar` edges away from the lateral boundary.
std::vector<char> interior_mask(const TriMesh& m, int collar);

struct LinearizationReport {
  std::vector<double> eps;
  std::vector<double> remainder;
  double slope = 0.0;
  bool ok = false;   // slope in [1.5, 2.5]
  bool tight = false;  // slope within 2 +- 0.1
};

LinearizationReport linearization_check(const TriMesh& base, const std::vector<Vec4>& normal,
                                        const std::vector<double>& phi, const std::vector<double>& eps,
                                        int collar = 2);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Mesh-weighted L2 norm: sqrt(sum A_i f_i^2).
double mesh_l2(const std::vector<double>& f, const std::vector<double>& area);

struct EstimateReport {
  int m = 0;
  double H_weighted = 0.0;        // sup |rho^-2 H| / ((tau + rho^-2)(|z| + tau))
  double A2_deviation = 0.0;      // sup ||A|^2 - 2 tau^2 rho^4| / (1 + tau rho^2)
  double rho_grad = 0.0;          // sup chi-gradient of rho / rho
  double rho_inv_grad = 0.0;      // sup chi-gradient of 1/rho * rho
  double z_grad = 0.0;            // sup chi-gradient of z / (|z| + tau)
  double H_grad = 0.0;            // sup chi-gradient of rho^-2 H over its weight
  double A2_grad = 0.0;
  double EH = 0.0;                // sup f_tilde^-1 |rho^-2 H| / tau
  double h_vs_gauss = 0.0;        // sup on S_0[0] of |h - nu_hat^* g| / tau
  double h_vs_varpi = 0.0;        // sup on S_0[1] of |h - varpi^* g| * m^2
  double chi_vs_hat = 0.0;        // sup on Lambda of |chi - chi_hat| / (m^2 tau)
  double lambda_A2 = 0.0;         // sup on Lambda of rho^-2 |A|^2 e^{3 x/2} / e^{-3b/2}
  double lambda_m2 = 0.0;         // sup on Lambda of rho^-2 m^2 e^{3 x/2} / e^{-3b/2}
  bool regions_ok = true;
};

EstimateReport verify_estimates(const SurfaceMesh& s, const std::vector<ShapeEntry>& shape);

// Model meshes.
// Parallel torus z = c over the full period, staggered rows, closed.
TriMesh parallel_torus_mesh(double c, int nx, int ny);
// Level cell z = c over [-d, d]^2, crossed grid, lateral faces tagged with mirrors.
// The crossed stencil is only consistent where the metric is isotropic, i.e. c = 0.
TriMesh level_cell_mesh(double c, double d, int n);
// Great sphere {v3 = 0}, subdivided octahedron projected to the sphere.
TriMesh great_sphere_mesh(int level);
// Flat cylinder (cos theta, sin theta, t, 0), t in [0, len]; group theta -> -theta, pi - theta
// when n_theta is even.
TriMesh flat_cylinder_mesh(double len, int n_theta, int n_t);

}  // namespace dcg
