#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcg/geomq.hpp"
#include "dcg/initsurf.hpp"
#include "dcg/trimesh.hpp"

namespace dcg {

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  NumericalError(const std::string& what, std::vector<double> trace = {})
      : std::runtime_error(what), trace(std::move(trace)) {}
  std::vector<double> trace;
};

using SpMat = Eigen::SparseMatrix<double>;

enum class Gauge { G, Chi, H };
const char* gauge_name(Gauge g);

enum class SymClass { Sym, NeckS, None };

struct ScalarField {
  std::vector<double> values;
  SymClass symmetry = SymClass::None;
  const TriMesh* mesh = nullptr;
};

// Per-vertex inputs of the linearized operator.
struct ShapeData {
  std::vector<double> A2;
  std::vector<double> rho;
  double m = 0.0;
};

ShapeData shape_data(const SurfaceMesh& s, const std::vector<ShapeEntry>& shape);

// Weak form of L = Delta + |A|^2 + 2 in a conformal gauge:
// mass * (L u) = -(stiffness - potential_mass) u.
struct DiscreteOperator {
  SpMat stiffness;
  SpMat potential_mass;
  SpMat mass;
  Gauge gauge = Gauge::G;

  int size() const { return static_cast<int>(stiffness.rows()); }
  // stiffness - potential_mass, the matrix of -L
  SpMat energy() const { return stiffness - potential_mass; }
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  std::vector<double> apply(const std::vector<double>& u) const;
};

// Cotangent Dirichlet form of the piecewise-linear mesh in R^4.
SpMat cotan_stiffness(const TriMesh& m);
// Lumped (barycentric) vertex areas.
std::vector<double> lumped_area(const TriMesh& m);

DiscreteOperator assemble_operator(const TriMesh& m, const ShapeData& d, Gauge gauge);
// Delta_g alone.
DiscreteOperator laplace_operator(const TriMesh& m);

// Functions constant on group orbits; vertices with orbit -1 are held at zero.
struct SymBasis {
  std::vector<int> orbit;
  int count = 0;

  int size() const { return count; }
  Eigen::VectorXd restrict(const std::vector<double>& f) const;  // P^T f
  std::vector<double> expand(const Eigen::VectorXd& c) const;    // P c
  SpMat restrict(const SpMat& A) const;                          // P^T A P
};

SymBasis sym_basis(const std::vector<std::vector<int>>& group, int n);
SymBasis full_basis(int n);
// Drop the vertices with keep[v] == 0.
SymBasis masked(const SymBasis& b, const std::vector<char>& keep);

// Group elements that keep each sheet in place (reflections in x and y).
std::vector<std::vector<int>> lateral_subgroup(const SurfaceMesh& s);

// Average over the mesh group.
std::vector<double> symmetry_project(const TriMesh& m, const std::vector<double>& f);
ScalarField symmetry_project(const ScalarField& f);

struct EigenResult {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // per vertex, mass-normalized
  std::vector<double> residuals;
  std::string method;
  int iterations = 0;
};

// k eigenpairs of -L closest to sigma on the subspace, sorted by value.
// Dense below `dense_limit` unknowns, shift-invert subspace iteration otherwise.
EigenResult eigen_low(const DiscreteOperator& op, int k, const SymBasis& basis, double sigma = 0.0,
                      int dense_limit = 3000);

// Eigenvalues of -L in [lo, hi] on the subspace, counted from LDLT inertia.
int count_eigenvalues(const DiscreteOperator& op, const SymBasis& basis, double lo, double hi);

// Rings of a cylinder-like region, ordered along the axis, with axial positions in the chi metric.
struct CylinderLayout {
  std::vector<std::vector<int>> rings;
  std::vector<double> position;
  double length() const { return position.back() - position.front(); }
};

// Flat cylinder from flat_cylinder_mesh.
CylinderLayout cylinder_layout(const TriMesh& m, int n_theta);
// Upper neck Lambda between the circles t_under = b + x and a_bar - b - y, closed by the
// nearest rings outside.
CylinderLayout neck_layout(const SurfaceMesh& s, double b, double x = 0.0, double y = 0.0);

// Lowest Dirichlet eigenvalue of -L on the interior rings of the layout.
double dirichlet_eig(const DiscreteOperator& op, const CylinderLayout& layout, const SymBasis& basis);

struct NeckEigReport {
  double lambda = 0.0;
  double ell = 0.0;     // chi length of Lambda
  double scaled = 0.0;  // lambda * ell^2
};

NeckEigReport neck_dirichlet_eig(const SurfaceMesh& s, const ShapeData& d, double b, double x = 0.0, double y = 0.0);

struct DecayReport {
  double rate = 0.0;
  std::vector<double> position;   // distance from the data circle
  std::vector<double> amplitude;  // ring sup |V|
  std::vector<double> solution;   // per vertex, zero off the layout
};

// Solve L V = 0 with V = data on the first ring and 0 on the last; fit the exponential decay
// of ring-wise sup |V| over the first `fit_fraction` of the length.
// `group` is the neck symmetry the data must respect.
DecayReport harmonic_decay(const DiscreteOperator& op, const CylinderLayout& layout, const std::vector<double>& data,
                           const std::vector<std::vector<int>>& group, double fit_fraction = 0.5);

DecayReport neck_harmonic_decay(const SurfaceMesh& s, const ShapeData& d, double b, const std::vector<double>& data,
                                double fit_fraction = 0.5);

// w = psi[1/m, 2/m](r).
ScalarField substitute_w(const SurfaceMesh& s);

struct ModKernelSolution {
  std::vector<double> u;
  double mu = 0.0;
  double residual = 0.0;       // relative, of L_chi u = E + mu w
  double orthogonality = 0.0;  // |<u, f0>_h| / (|u|_h |f0|_h)
  double multiplier = 0.0;     // bordering multiplier, zero in exact arithmetic
};

// Factorized bordered system for repeated right-hand sides E.
class ModKernelSolver {
 public:
  ModKernelSolver(const DiscreteOperator& op_chi, const DiscreteOperator& op_h, const SymBasis& basis,
                  std::vector<double> f0, std::vector<double> w, double gap, double min_gap = 1e-3);
  ModKernelSolution solve(const std::vector<double>& E) const;
  const std::vector<double>& substitute() const { return w_; }

 private:
  SymBasis basis_;
  std::vector<double> f0_, w_;
  Eigen::VectorXd mchi_, mh_;
  double f0w_ = 0.0;
  SpMat K_;
  Eigen::SparseLU<SpMat> lu_;
};

// L_chi u = E + mu w with <E + mu w, f0>_chi-mass = 0 and <u, f0>_h = 0.
// `gap` is the distance from the f0 eigenvalue to the rest of the spectrum; below `min_gap` the
// kernel cannot be separated and NumericalError is thrown.
ModKernelSolution solve_mod_kernel(const DiscreteOperator& op_chi, const DiscreteOperator& op_h, const SymBasis& basis,
                                   const std::vector<double>& E, const std::vector<double>& f0,
                                   const std::vector<double>& w, double gap, double min_gap = 1e-3);

// Discrete weighted norm: max over vertices of (|u| + |grad_chi u| + |hess_chi u|) / f_tilde,
// derivatives included up to `order`. The Holder seminorm is omitted.
double weighted_norm(const SurfaceMesh& s, const std::vector<double>& u, int order, double gamma);

struct QuadraticReport {
  std::vector<double> size;       // weighted order-2 norm of phi
  std::vector<double> remainder;  // weighted order-0 norm of the quadratic remainder
  double slope = 0.0;
  bool ok = false;  // slope within 2 +- 0.15
};

// rho^-2 H_phi - rho^-2 H - L_chi phi, with L_chi the exact derivative of the discrete rho^-2 H,
// for phi = s * dir / |dir|_{2,gamma}.
QuadraticReport quadratic_check(const SurfaceMesh& s, const std::vector<Vec4>& normal, const std::vector<double>& dir,
                                const std::vector<double>& sizes, double gamma);

}  // namespace dcg
