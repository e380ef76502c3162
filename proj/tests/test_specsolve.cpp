#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dcg/specsolve.hpp"

using namespace dcg;

namespace {

struct Fixture {
  SurfaceMesh s;
  std::vector<ShapeEntry> shape;
  ShapeData data;
};

Fixture make(int m, int n_theta = 64, double b = 0.0) {
  Resolution r;
  r.n_theta = n_theta;
  Fixture f{build_mesh(derive_params(m, 0.0, b, 0.5, r)), {}, {}};
  f.shape = chart_shape(f.s);
  f.data = shape_data(f.s, f.shape);
  return f;
}

std::vector<double> random_sym(const TriMesh& m, std::mt19937& gen) {
  std::normal_distribution<double> nd;
  std::vector<double> f(m.num_vertices());
  for (double& x : f) x = nd(gen);
  return symmetry_project(m, f);
}

double max_abs(const std::vector<double>& f) {
  double r = 0;
  for (double x : f) r = std::max(r, std::abs(x));
  return r;
}

bool symmetric(const SpMat& A) { return (SpMat(A.transpose()) - A).norm() <= 1e-12 * A.norm(); }

}  // namespace

TEST_CASE("assembled matrices are symmetric with positive lumped mass") {
  const Fixture f = make(6, 32);
  for (Gauge g : {Gauge::G, Gauge::Chi, Gauge::H}) {
    const DiscreteOperator op = assemble_operator(f.s.mesh, f.data, g);
    CHECK(op.gauge == g);
    CHECK(symmetric(op.stiffness));
    CHECK(symmetric(op.potential_mass));
    CHECK(symmetric(op.mass));
    Eigen::SimplicialLLT<SpMat> llt(op.mass);
    CHECK(llt.info() == Eigen::Success);
    const Eigen::VectorXd row = op.stiffness * Eigen::VectorXd::Ones(op.size());
    CHECK(row.cwiseAbs().maxCoeff() < 1e-9 * op.stiffness.diagonal().cwiseAbs().maxCoeff());
  }
  ShapeData no_curv = f.data;
  no_curv.A2.clear();
  CHECK_THROWS_AS(assemble_operator(f.s.mesh, no_curv, Gauge::H), PreconditionError);
}

TEST_CASE("Clifford torus: L 1 = 4") {
  const TriMesh T = parallel_torus_mesh(0.0, 32, 32);
  ShapeData d;
  d.A2.assign(T.num_vertices(), 2.0);
  const DiscreteOperator op = assemble_operator(T, d, Gauge::G);
  for (double v : op.apply(std::vector<double>(T.num_vertices(), 1.0))) CHECK(v == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("gauge consistency of the conformal rescalings") {
  const Fixture f = make(6, 32);
  const DiscreteOperator g = assemble_operator(f.s.mesh, f.data, Gauge::G);
  const DiscreteOperator chi = assemble_operator(f.s.mesh, f.data, Gauge::Chi);
  const DiscreteOperator h = assemble_operator(f.s.mesh, f.data, Gauge::H);
  std::mt19937 gen(3);
  const double m2 = f.data.m * f.data.m;
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = random_sym(f.s.mesh, gen);
    const auto Lg = g.apply(u), Lc = chi.apply(u), Lh = h.apply(u);
    const double scale = max_abs(Lg);
    double e_chi = 0, e_h = 0;
    for (std::size_t v = 0; v < u.size(); ++v) {
      const double r2 = f.data.rho[v] * f.data.rho[v];
      e_chi = std::max(e_chi, std::abs(r2 * Lc[v] - Lg[v]));
      e_h = std::max(e_h, std::abs(0.5 * (f.data.A2[v] + m2) * Lh[v] - Lg[v]));
    }
    CHECK(e_chi <= 1e-8 * scale);
    CHECK(e_h <= 1e-8 * scale);
  }
}

TEST_CASE("chi stiffness on the bridge is the flat cylinder Dirichlet form") {
  const Fixture f = make(10);
  const SurfaceMesh& s = f.s;
  // u = t clamped at the ring nearest t = 2
  const double step = s.params.a / s.n_axial;
  const double T = step * std::round(2.0 / step);
  std::vector<double> u(s.mesh.num_vertices());
  for (int v = 0; v < s.mesh.num_vertices(); ++v) u[v] = std::clamp(s.info[v].t, -T, T);
  const SpMat S = cotan_stiffness(s.mesh);
  const Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<Eigen::Index>(u.size()));
  const double energy = uv.dot(S * uv);
  CHECK(energy == doctest::Approx(2 * kPi * 2 * T).epsilon(1e-2));
}

TEST_CASE("symmetry projection") {
  const Fixture f = make(6, 32);
  const TriMesh& m = f.s.mesh;
  const int n = m.num_vertices();
  for (double v : symmetry_project(m, std::vector<double>(n, 2.5))) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
  std::vector<double> first(n);
  for (int v = 0; v < n; ++v) first[v] = std::cos(f.s.info[v].theta);
  CHECK(max_abs(symmetry_project(m, first)) < 1e-12);

  std::mt19937 gen(9);
  std::normal_distribution<double> nd;
  const DiscreteOperator op = assemble_operator(m, f.data, Gauge::Chi);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> u(n);
    for (double& x : u) x = nd(gen);
    const auto p1 = symmetry_project(m, u);
    const auto p2 = symmetry_project(m, p1);
    double d = 0;
    for (int v = 0; v < n; ++v) d = std::max(d, std::abs(p1[v] - p2[v]));
    CHECK(d < 1e-12);
    const auto a = symmetry_project(m, op.apply(u));
    const auto b = op.apply(p1);
    double c = 0;
    for (int v = 0; v < n; ++v) c = std::max(c, std::abs(a[v] - b[v]));
    CHECK(c < 1e-10 * max_abs(a));
  }
  const ScalarField sf = symmetry_project(ScalarField{first, SymClass::None, &m});
  CHECK(sf.symmetry == SymClass::Sym);
  CHECK_THROWS_AS(symmetry_project(ScalarField{first, SymClass::None, nullptr}), PreconditionError);
}

TEST_CASE("Neumann square: lowest sym eigenvalue is 0 with constant eigenfunction") {
  const TriMesh sq = level_cell_mesh(0.0, kPi / (kSqrt2 * 6), 16);
  const DiscreteOperator op = laplace_operator(sq);
  const SymBasis b = sym_basis(sq.group, sq.num_vertices());
  for (int dense_limit : {3000, 0}) {
    const EigenResult e = eigen_low(op, 2, b, -0.5, dense_limit);
    CHECK(std::abs(e.values[0]) < 1e-9);
    CHECK(e.values[1] > 1.0);
    const auto& f0 = e.vectors[0];
    const auto [lo, hi] = std::minmax_element(f0.begin(), f0.end());
    CHECK(std::abs(*hi - *lo) < 1e-8 * std::abs(*hi));
  }
}

TEST_CASE("great sphere: Delta + 2 has no sym eigenvalue in [-1, 1]") {
  const TriMesh S = great_sphere_mesh(8);
  ShapeData d;
  d.A2.assign(S.num_vertices(), 0.0);
  const DiscreteOperator op = assemble_operator(S, d, Gauge::G);
  const SymBasis sym = sym_basis(S.group, S.num_vertices());
  CHECK(count_eigenvalues(op, sym, -1.0, 1.0) == 0);
  // the full space has the three first harmonics near 0
  CHECK(count_eigenvalues(op, full_basis(S.num_vertices()), -1.0, 1.0) == 3);
  const EigenResult e = eigen_low(op, 2, sym, 0.0);
  CHECK(e.values[0] == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(e.values[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("sym spectrum sits inside the full spectrum; iterative and dense solvers agree") {
  const Fixture f = make(6, 16);
  const DiscreteOperator op = assemble_operator(f.s.mesh, f.data, Gauge::H);
  const int n = f.s.mesh.num_vertices();
  const SymBasis sym = sym_basis(f.s.mesh.group, n);
  const EigenResult es = eigen_low(op, 6, sym, 0.0);
  const EigenResult ef = eigen_low(op, 40, full_basis(n), 0.0);
  for (double lam : es.values) {
    double best = 1e300;
    for (double mu : ef.values) best = std::min(best, std::abs(lam - mu));
    CHECK(best < 1e-8 * (1 + std::abs(lam)));
  }
  const EigenResult ei = eigen_low(op, 6, sym, 0.0, 0);
  CHECK(ei.method == "shift-invert");
  CHECK(es.method == "dense");
  for (int j = 0; j < 6; ++j) CHECK(ei.values[j] == doctest::Approx(es.values[j]).epsilon(1e-9));
  int inside = 0;
  for (double lam : es.values) inside += (lam >= -1.0 && lam < 1.0);
  CHECK(count_eigenvalues(op, sym, -1.0, 1.0) == inside);
}

TEST_CASE("flat cylinder: Dirichlet eigenvalue and harmonic decay") {
  const double len = 2 * kPi;
  const TriMesh C = flat_cylinder_mesh(len, 128, 200);
  const DiscreteOperator lap = laplace_operator(C);
  const double lam = dirichlet_eig(lap, cylinder_layout(C, 128), sym_basis(C.group, C.num_vertices()));
  CHECK(lam == doctest::Approx(std::pow(kPi / len, 2)).epsilon(1e-2));

  const TriMesh C2 = flat_cylinder_mesh(10.0, 112, 200);
  const CylinderLayout L2 = cylinder_layout(C2, 112);
  std::vector<double> u2(112), u1(112), u0(112, 1.0);
  for (int i = 0; i < 112; ++i) {
    u2[i] = std::cos(2 * 2 * kPi * i / 112);
    u1[i] = std::cos(2 * kPi * i / 112);
  }
  const DecayReport dr = harmonic_decay(laplace_operator(C2), L2, u2, C2.group);
  CHECK(dr.rate == doctest::Approx(2.0).epsilon(5e-3));
  CHECK_THROWS_AS(harmonic_decay(laplace_operator(C2), L2, u1, C2.group), PreconditionError);
  CHECK_THROWS_AS(harmonic_decay(laplace_operator(C2), L2, u0, C2.group), PreconditionError);
}

TEST_CASE("neck diagnostics") {
  for (int m : {14, 16}) {
    const Fixture f = make(m, 64, 2.0);
    const NeckEigReport ne = neck_dirichlet_eig(f.s, f.data, 2.0);
    CHECK(ne.lambda > 0.0);
    CHECK(ne.scaled > kPi * kPi / 2);
    CHECK(ne.scaled < kPi * kPi * 2);
    if (m == 14) {
      const CylinderLayout l = neck_layout(f.s, 2.0);
      std::vector<double> data;
      for (int v : l.rings.front()) data.push_back(std::cos(2 * f.s.info[v].theta));
      const DecayReport dr = neck_harmonic_decay(f.s, f.data, 2.0, data);
      CHECK(dr.rate >= 1.5);
      CHECK(dr.rate <= 2.2);
    }
  }
  const Fixture small = make(6, 32);
  CHECK_THROWS_AS(neck_layout(small.s, 5.0), PreconditionError);
}

TEST_CASE("substitute kernel") {
  std::vector<double> worst;
  for (int m : {10, 14}) {
    const Fixture f = make(m);
    const ScalarField w = substitute_w(f.s);
    CHECK(w.symmetry == SymClass::Sym);
    double c = 0;
    for (int v = 0; v < f.s.mesh.num_vertices(); ++v) {
      const VertexInfo& vi = f.s.info[v];
      if (vi.ring == f.s.waist_ring) CHECK(w.values[v] == 0.0);
      if (vi.r >= 2.0 / m) CHECK(w.values[v] == 1.0);
      if (w.values[v] > 0) {
        const double q = 2 * vi.rho * vi.rho / (f.data.A2[v] + double(m) * m);
        c = std::max({c, q, 1 / q});
      }
    }
    const auto proj = symmetry_project(f.s.mesh, w.values);
    for (int v = 0; v < f.s.mesh.num_vertices(); ++v) CHECK(std::abs(proj[v] - w.values[v]) < 1e-12);
    worst.push_back(c);
  }
  CHECK(worst[0] < 20);
  CHECK(worst[1] < 20);
  CHECK(std::max(worst[0], worst[1]) / std::min(worst[0], worst[1]) < 2);
}

TEST_CASE("solve modulo the approximate kernel") {
  const Fixture f = make(14);
  const int n = f.s.mesh.num_vertices();
  const DiscreteOperator oh = assemble_operator(f.s.mesh, f.data, Gauge::H);
  const DiscreteOperator oc = assemble_operator(f.s.mesh, f.data, Gauge::Chi);
  const SymBasis b = sym_basis(f.s.mesh.group, n);
  const EigenResult e = eigen_low(oh, 3, b, 0.0);
  const auto& f0 = e.vectors[1];
  const double gap = std::min(e.values[2] - e.values[1], e.values[1] - e.values[0]);
  const auto w = substitute_w(f.s).values;

  std::vector<double> cw(n);
  for (int v = 0; v < n; ++v) cw[v] = -1.75 * w[v];
  const ModKernelSolution trivial = solve_mod_kernel(oc, oh, b, cw, f0, w, gap);
  CHECK(trivial.mu == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(max_abs(trivial.u) < 1e-10);

  std::vector<double> E(n);
  for (int v = 0; v < n; ++v) E[v] = f.shape[v].H / (f.data.rho[v] * f.data.rho[v]);
  const ModKernelSolution sol = solve_mod_kernel(oc, oh, b, E, f0, w, gap);
  CHECK(sol.residual < 1e-10);
  CHECK(sol.orthogonality < 1e-10);
  const auto Lu = oc.apply(sol.u);
  double pde = 0, scale = 0;
  for (int v = 0; v < n; ++v) {
    pde = std::max(pde, std::abs(Lu[v] - E[v] - sol.mu * w[v]));
    scale = std::max(scale, std::abs(E[v] + sol.mu * w[v]));
  }
  CHECK(pde < 1e-8 * scale);
  const double ratio = weighted_norm(f.s, sol.u, 0, 0.5) / weighted_norm(f.s, E, 0, 0.5);

  const Fixture fine = make(14, 96);
  const int nf = fine.s.mesh.num_vertices();
  const DiscreteOperator fh = assemble_operator(fine.s.mesh, fine.data, Gauge::H);
  const DiscreteOperator fc = assemble_operator(fine.s.mesh, fine.data, Gauge::Chi);
  const SymBasis fb = sym_basis(fine.s.mesh.group, nf);
  const EigenResult fe = eigen_low(fh, 3, fb, 0.0);
  std::vector<double> Ef(nf);
  for (int v = 0; v < nf; ++v) Ef[v] = fine.shape[v].H / (fine.data.rho[v] * fine.data.rho[v]);
  const ModKernelSolution fs =
      solve_mod_kernel(fc, fh, fb, Ef, fe.vectors[1], substitute_w(fine.s).values, fe.values[2] - fe.values[1]);
  const double ratio_fine = weighted_norm(fine.s, fs.u, 0, 0.5) / weighted_norm(fine.s, Ef, 0, 0.5);
  CHECK(ratio_fine == doctest::Approx(ratio).epsilon(0.1));

  CHECK_THROWS_AS(solve_mod_kernel(oc, oh, b, E, f0, w, 1e-6), NumericalError);
  CHECK_THROWS_AS(solve_mod_kernel(oh, oc, b, E, f0, w, gap), PreconditionError);
}

TEST_CASE("weighted norms") {
  const Fixture f = make(10);
  const SurfaceMesh& s = f.s;
  const int n = s.mesh.num_vertices();
  const double gamma = 0.5;
  const std::vector<double> one(n, 1.0);
  const double expect = std::exp(gamma * (s.params.a_bar - 2 * s.params.b));
  CHECK(weighted_norm(s, one, 0, gamma) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(weighted_norm(s, one, 2, gamma) == doctest::Approx(expect).epsilon(1e-12));
  const WeightReport wr = field_weights(s, gamma);
  CHECK(weighted_norm(s, wr.f_tilde, 0, gamma) == doctest::Approx(1.0).epsilon(1e-14));

  std::vector<double> scaled;
  for (int m : {10, 14}) {
    const Fixture g = m == 10 ? f : make(m);
    std::vector<double> E(g.s.mesh.num_vertices());
    for (std::size_t v = 0; v < E.size(); ++v) E[v] = g.shape[v].H / (g.data.rho[v] * g.data.rho[v]);
    scaled.push_back(weighted_norm(g.s, E, 0, gamma) / g.s.params.tau);
  }
  CHECK(std::max(scaled[0], scaled[1]) / std::min(scaled[0], scaled[1]) < 2);
}

TEST_CASE("quadratic remainder at m = 6") {
  const Fixture f = make(6);
  const SurfaceMesh& s = f.s;
  const int n = s.mesh.num_vertices();
  const WeightReport wr = field_weights(s, 0.5);
  std::vector<double> dir(n);
  for (int v = 0; v < n; ++v) {
    const Vec4& X = s.mesh.X[v];
    dir[v] = (0.3 + X[0] * X[2] - 0.7 * X[1] * X[1] + X[3]) * wr.f_tilde[v];
  }
  dir = symmetry_project(s.mesh, dir);
  const QuadraticReport q = quadratic_check(s, chart_normals(s), dir, {1e-4, 1e-5, 1e-6, 1e-7}, 0.5);
  CHECK(q.ok);
  CHECK(q.slope == doctest::Approx(2.0).epsilon(0.05));
}
