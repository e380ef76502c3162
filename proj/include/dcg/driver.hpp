#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcg/balance.hpp"
#include "dcg/geomq.hpp"
#include "dcg/initsurf.hpp"
#include "dcg/specsolve.hpp"

namespace dcg {

// User-facing construction inputs; derived quantities follow from derive_params.
struct ConstructionConfig {
  int m = 6;
  double zeta = 0.0;
  double b = 0.0;  // <= 0 picks the default region constant
  double gamma = 0.5;
  double c_bar = 10.0;
  RhoReading reading = RhoReading::TwoM;
  Resolution res;

  ConstructionParams derive() const { return derive_at(zeta); }
  ConstructionParams derive_at(double z) const { return derive_params(m, z, b, gamma, res, c_bar, reading); }
  // Same grid counts as derive(), so meshes at different zeta share their connectivity.
  ConstructionConfig frozen_grid() const;
};

enum class SolveStatus { Converged, MaxIterations, Diverged, ZetaEscaped, PerturbationTooLarge, NumericalFailure };
const char* status_name(SolveStatus s);

// Coupled: Newton in (phi, zeta) with GMRES on the exact discrete tangent.
// Jacobi: one modified-kernel step in phi, then zeta <- zeta_update(F).
enum class ZetaMode { Coupled, Jacobi };
const char* zeta_mode_name(ZetaMode z);

struct SolveOptions {
  double tol_H = 1e-8;
  double tol_F = 1e-12;
  int max_iter = 10;
  double max_zeta_step = 0.5;
  double zeta_fd = 1e-4;  // step of the zeta sensitivity
  double gmres_tol = 1e-10;
  int gmres_max = 80;
  ZetaMode zeta_mode = ZetaMode::Coupled;
};

struct IterationRecord {
  int iteration = 0;
  double residual_H = 0.0;
  double F = 0.0;           // interior form
  double F_boundary = 0.0;
  double zeta = 0.0;
  double mu = 0.0;
  double mu_prime = 0.0;
  double phi_norm = 0.0;    // |phi|_{0,gamma} / tau
  double step = 1.0;        // damping applied to the update
  int krylov = 0;           // GMRES iterations of the residual solve
  double sym_drift = 0.0;   // |phi - P_sym phi|_inf before projection
};

struct SolveState {
  int iteration = 0;
  double zeta = 0.0;
  std::vector<double> phi;
  double residual_H = 0.0;
  double residual_initial = 0.0;
  double F = 0.0;
  double F_boundary = 0.0;
  double mu = 0.0;
  double mu_prime = 0.0;
  double phi_norm = 0.0;
  SolveStatus status = SolveStatus::MaxIterations;
  std::string message;
  std::vector<IterationRecord> history;
  SurfaceMesh surface;
  std::vector<Vec4> X;  // perturbed positions

  double reduction() const { return residual_H > 0 ? residual_initial / residual_H : 0.0; }
};

// rho^-2 H of the surface perturbed by phi along the chart normals.
std::vector<double> weighted_mean_curvature(const SurfaceMesh& s, const std::vector<double>& phi);

// mu' = -F / sum over the upper half of A rho^2 w <nu, K>.
double multiplier_from_force(const SurfaceMesh& s, const PerturbedMesh& pm, const DiscreteShape& shape, double F);

// Starts from phi0 on the mesh of cfg.derive() (zero when empty).
SolveState run_newton(const ConstructionConfig& cfg, const SolveOptions& opt, const std::vector<double>& phi0 = {});

struct EmbeddednessReport {
  bool embedded = false;
  double separation = 0.0;  // min upper-sheet height minus max lower-sheet height beyond r = 2/m
  double required = 0.0;    // a tau / 2
  double margin = 0.0;      // separation - required
  bool bridge_monotone = false;
  int violations = 0;       // non-monotone steps along the bridge meridians
  double min_radial_step = 0.0;
};

// Heights and radii read back through the inverse chart of the positions.
EmbeddednessReport embeddedness_check(const SurfaceMesh& s, const std::vector<Vec4>& X);

// Chart coordinates of a point of S^3 with the cell centred at x = y = 0.
DomainPoint chart_inverse(const Vec4& X);

struct GenusReport {
  int cells = 0;
  double cell_chi = 0.0;  // Euler characteristic of one cell with shared faces weighted
  long closed_chi = 0;
  long genus = 0;
  bool ok = false;  // genus == m^2 + 1
};

// Closed surface assembled from m^2 copies of the cell: lateral edges count 1/2,
// face vertices 1/2 and corner vertices 1/4.
GenusReport genus_bookkeeping(const SurfaceMesh& s);

}  // namespace dcg
