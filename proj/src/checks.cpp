#include "dcg/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace dcg {

bool CheckSection::passed() const {
  if (!error.empty() || items.empty()) return false;
  return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.passed; });
}

void CheckSection::add(std::string item, bool ok, double value, std::string target) {
  items.push_back({std::move(item), ok, value, std::move(target)});
}

const CheckItem* CheckSection::find(const std::string& item) const {
  for (const CheckItem& i : items)
    if (i.name == item) return &i;
  return nullptr;
}

namespace {

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json CheckSection::to_json(bool timings) const {
  Json j;
  j["passed"] = passed();
  Json list = Json::array();
  for (const CheckItem& i : items)
    list.push_back({{"name", i.name}, {"passed", i.passed}, {"value", number(i.value)}, {"target", i.target}});
  j["checks"] = list;
  j["data"] = data;
  if (!error.empty()) j["error"] = error;
  if (timings) j["seconds"] = seconds;
  return j;
}

namespace {

std::string sci(double x) {
  std::ostringstream s;
  s << std::setprecision(3) << x;
  return s.str();
}

std::string at_most(double x) { return "<= " + sci(x); }

DomainPoint shifted(DomainPoint p, int c, double h) {
  (c == 0 ? p.x : c == 1 ? p.y : p.z) += h;
  return p;
}

// Fourth-order central difference of phi_map along coordinate c, from cancellation-free differences.
Vec4 frame_fd(const DomainPoint& p, int c, double h) {
  const Vec4 a = phi_diff(p, shifted(p, c, -2 * h)), b = phi_diff(p, shifted(p, c, -h));
  const Vec4 d = phi_diff(p, shifted(p, c, h)), e = phi_diff(p, shifted(p, c, 2 * h));
  return (a - b * 8.0 + d * 8.0 - e) / (12.0 * h);
}

double metric_form(double z, const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const AmbientMetric g = ambient_metric(z);
  return g.g[0] * a[0] * b[0] + g.g[1] * a[1] * b[1] + g.g[2] * a[2] * b[2];
}

DomainPoint killing_flow(DomainPoint p, double s) {
  const int steps = 4;
  const double h = s / steps;
  auto shift = [](const DomainPoint& a, const std::array<double, 3>& k, double c) {
    return DomainPoint{a.x + c * k[0], a.y + c * k[1], a.z + c * k[2]};
  };
  for (int n = 0; n < steps; ++n) {
    const auto k1 = killing_coords(p);
    const auto k2 = killing_coords(shift(p, k1, h / 2));
    const auto k3 = killing_coords(shift(p, k2, h / 2));
    const auto k4 = killing_coords(shift(p, k3, h));
    p.x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    p.y += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    p.z += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
  }
  return p;
}

ConstructionConfig with_m(ConstructionConfig c, int m) {
  c.m = m;
  c.res.n_axial = 0;
  c.res.n_square = 0;
  return c;
}

ConstructionConfig with_n_theta(ConstructionConfig c, int n_theta) {
  c.res.n_theta = n_theta;
  c.res.n_axial = 0;
  c.res.n_square = 0;
  return c;
}

// Group average of a random quadratic in the ambient coordinates, optionally weighted per vertex.
std::vector<double> random_field(const TriMesh& m, std::mt19937& gen, const std::vector<double>& scale) {
  std::normal_distribution<double> nd;
  double q[4][4], l[4];
  for (auto& row : q)
    for (auto& x : row) x = nd(gen);
  for (auto& x : l) x = nd(gen);
  std::vector<double> f(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) {
    double s = 0;
    for (int i = 0; i < 4; ++i) {
      s += l[i] * m.X[v][i];
      for (int j = 0; j < 4; ++j) s += q[i][j] * m.X[v][i] * m.X[v][j];
    }
    f[v] = s * (scale.empty() ? 1.0 : scale[v]);
  }
  return m.group.empty() ? f : group_average(m.group, f);
}

double chart_discrete_gap(const SurfaceMesh& s) {
  const auto cs = chart_shape(s);
  const auto ds = discrete_shape(s.mesh);
  std::vector<double> hc(cs.size()), diff(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    hc[i] = cs[i].H;
    diff[i] = ds.H[i] - cs[i].H;
  }
  return mesh_l2(diff, ds.area) / mesh_l2(hc, ds.area);
}

}  // namespace

CheckSection check_ambient(int samples, std::uint64_t seed) {
  CheckSection c;
  c.name = "ambient";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0), w(-0.7, 0.7), uc(-2.0, 2.0), us(0.0, 1e-3);
  auto point = [&] { return DomainPoint{u(rng), u(rng), w(rng)}; };
  const double h = 1e-3;

  double metric = 0, frame = 0, chris = 0, det = 0, killing = 0, isometry = 0, equiv = 0;
  for (int k = 0; k < samples; ++k) {
    const DomainPoint p = point();
    const Frame f = coordinate_frame(p);
    const AmbientMetric g = ambient_metric(p.z);
    const Vec4 X = phi_map(p);
    const Vec4 d[3] = {f.dx, f.dy, f.dz};
    metric = std::max(metric, std::abs(norm(X) - 1.0));
    for (int i = 0; i < 3; ++i) {
      metric = std::max(metric, std::abs(dot(X, d[i])));
      for (int j = 0; j < 3; ++j) metric = std::max(metric, std::abs(dot(d[i], d[j]) - (i == j ? g.g[i] : 0.0)));
      frame = std::max(frame, norm(frame_fd(p, i, h) - d[i]));
    }
    det = std::max({det, std::abs(det4(X, f.dx, f.dy, f.dz) - std::cos(2 * p.z)), std::abs(g.det - std::cos(2 * p.z))});

    // Christoffel symbols against difference quotients of the diagonal metric, which depends on z only.
    const AmbientMetric gm2 = ambient_metric(p.z - 2 * h), gm1 = ambient_metric(p.z - h);
    const AmbientMetric gp1 = ambient_metric(p.z + h), gp2 = ambient_metric(p.z + 2 * h);
    std::array<double, 3> dg;
    for (int i = 0; i < 3; ++i) dg[i] = (gm2.g[i] - 8 * gm1.g[i] + 8 * gp1.g[i] - gp2.g[i]) / (12 * h);
    auto dmetric = [&](int k2, int i, int j) { return (k2 == 2 && i == j) ? dg[i] : 0.0; };
    for (int k2 = 0; k2 < 3; ++k2)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double fd = 0.5 / g.g[k2] * (dmetric(i, j, k2) + dmetric(j, i, k2) - dmetric(k2, i, j));
          chris = std::max(chris, std::abs(fd - g.gamma(k2, i, j)));
        }

    killing = std::max(killing, norm(killing_pushforward(p) - killing_ambient(X)));

    // Killing flow preserves the metric.
    DomainPoint q = p;
    q.z *= 0.8;
    const double s = us(rng), hf = 1e-6;
    const DomainPoint F = killing_flow(q, s);
    std::array<std::array<double, 3>, 3> J;
    for (int cc = 0; cc < 3; ++cc) {
      const DomainPoint Fa = killing_flow(shifted(q, cc, hf), s), Fb = killing_flow(shifted(q, cc, -hf), s);
      J[cc] = {(Fa.x - Fb.x) / (2 * hf), (Fa.y - Fb.y) / (2 * hf), (Fa.z - Fb.z) / (2 * hf)};
    }
    const AmbientMetric gq = ambient_metric(q.z);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        isometry = std::max(isometry, std::abs(metric_form(F.z, J[i], J[j]) - (i == j ? gq.g[i] : 0.0)));

    static const SymKind kinds[] = {SymKind::TranslateX, SymKind::TranslateY, SymKind::ReflectX, SymKind::ReflectY,
                                    SymKind::ReflectZ};
    const SymmetryElement e{kinds[k % 5], uc(rng)};
    const DomainPoint b = point();
    equiv = std::max(equiv, norm(phi_map(e.apply(p)) - e.apply(X)));
    equiv = std::max(equiv, std::abs(dot(e.apply(X), e.apply(phi_map(b))) - dot(X, phi_map(b))));
  }
  c.add("pulled-back metric", metric <= 1e-12, metric, at_most(1e-12));
  c.add("frame against finite differences", frame <= 1e-8, frame, at_most(1e-8));
  c.add("Christoffel symbols against finite differences", chris <= 1e-8, chris, at_most(1e-8));
  c.add("frame determinant cos 2z", det <= 1e-12, det, at_most(1e-12));
  c.add("Killing field coordinate and ambient forms", killing <= 1e-12, killing, at_most(1e-12));
  c.add("Killing flow isometry", isometry <= 1e-8, isometry, at_most(1e-8));
  c.add("symmetry equivariance", equiv <= 1e-12, equiv, at_most(1e-12));
  c.data = {{"samples", samples}, {"seed", seed}};
  return c;
}

CheckSection check_construction(int m_lo, int m_hi, const std::vector<double>& zetas) {
  CheckSection c;
  c.name = "construction";
  int scale_fail = 0, neck_fail = 0;
  double scale_worst = 0.0, neck_worst = 0.0;
  Json rows = Json::array();
  for (int m = m_lo; m <= m_hi; ++m)
    for (double z : zetas) {
      const ConstructionParams p = derive_params(m, z, 0.0, 0.5, Resolution{});
      const double scale = p.a + z - m * static_cast<double>(m) / (4 * kPi) - std::log(2.0);
      const bool scale_ok = std::abs(scale) < p.tau_bar;
      const NeckLengths nl = neck_lengths(p, p.b);
      scale_fail += !scale_ok;
      neck_fail += !nl.eellm_ok;
      scale_worst = std::max(scale_worst, std::abs(scale) / p.tau_bar);
      neck_worst = std::max(neck_worst, std::abs(nl.eellm_residual));
      rows.push_back({{"m", m},
                      {"zeta", z},
                      {"tau_bar", p.tau_bar},
                      {"tau", p.tau},
                      {"a", p.a},
                      {"scale_residual", scale},
                      {"scale_ok", scale_ok},
                      {"neck_residual", nl.eellm_residual},
                      {"neck_ok", nl.eellm_ok}});
    }
  c.add("log scale identity |a + zeta - m^2/4pi - log 2| < tau_bar (failing pairs)", scale_fail == 0, scale_fail,
        "0 failures");
  c.add("neck length identity |l + 2b + zeta - m^2/4pi| < 10 (failing pairs)", neck_fail == 0, neck_fail, "0 failures");
  c.data = {{"worst_scale_over_tau_bar", scale_worst}, {"worst_neck_residual", neck_worst}, {"table", rows}};
  return c;
}

CheckSection check_curvature(const ConstructionConfig& cfg) {
  CheckSection c;
  c.name = "curvature";
  const int n0 = cfg.res.n_theta;
  const double coarse = chart_discrete_gap(build_mesh(with_n_theta(cfg, n0).derive()));
  const double fine = chart_discrete_gap(build_mesh(with_n_theta(cfg, 2 * n0).derive()));
  c.add("chart vs discrete H, relative mesh L2", coarse <= 0.05, coarse, at_most(0.05));
  c.add("discrepancy decreases under refinement", fine < coarse, fine, "< coarse");
  double torus = 0.0;
  for (double z : {-0.6, -0.3, 0.0, 0.1, kPi / 8, 0.5, 0.7}) {
    const ShapeEntry e = shape_from_jet(level_jet(0.31, -0.17, z));
    torus = std::max(torus, std::abs(e.H - 2 * std::tan(2 * z)) / (1 + std::abs(2 * std::tan(2 * z))));
  }
  c.add("parallel torus H = 2 tan 2c", torus <= 1e-10, torus, at_most(1e-10));
  c.data = {{"m", cfg.m}, {"n_theta", n0}, {"gap", coarse}, {"gap_refined", fine}};
  return c;
}

CheckSection check_linearization(const ConstructionConfig& cfg, int fields, std::uint64_t seed) {
  CheckSection c;
  c.name = "linearization";
  const std::vector<double> eps{1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  std::mt19937 gen(static_cast<std::uint32_t>(seed));
  Json slopes = Json::object();
  auto run = [&](const std::string& label, const TriMesh& m, const std::vector<Vec4>& nu, const std::vector<double>& w) {
    double worst = 0.0;
    Json list = Json::array();
    for (int k = 0; k < fields; ++k) {
      const LinearizationReport r = linearization_check(m, nu, random_field(m, gen, w), eps);
      worst = std::max(worst, std::abs(r.slope - 2.0));
      list.push_back(r.slope);
    }
    slopes[label] = list;
    c.add(label + ": |slope - 2|", worst <= 0.1, worst, at_most(0.1));
  };
  const TriMesh T = parallel_torus_mesh(0.0, 64, 64);
  run("Clifford torus", T, discrete_shape(T).normal, {});
  const SurfaceMesh s = build_mesh(cfg.derive());
  std::vector<double> inv_rho(s.info.size());
  for (std::size_t v = 0; v < inv_rho.size(); ++v) inv_rho[v] = 1.0 / s.info[v].rho;
  run("initial surface", s.mesh, chart_normals(s), inv_rho);
  c.data = {{"m", cfg.m}, {"eps", eps}, {"slopes", slopes}};
  return c;
}

CheckSection check_quadratic(const ConstructionConfig& cfg) {
  CheckSection c;
  c.name = "quadratic";
  const SurfaceMesh s = build_mesh(cfg.derive());
  const int n = s.mesh.num_vertices();
  const WeightReport wr = field_weights(s, cfg.gamma);
  std::vector<double> dir(n);
  for (int v = 0; v < n; ++v) {
    const Vec4& X = s.mesh.X[v];
    dir[v] = (0.3 + X[0] * X[2] - 0.7 * X[1] * X[1] + X[3]) * wr.f_tilde[v];
  }
  dir = symmetry_project(s.mesh, dir);
  const std::vector<double> sizes{1e-4, 1e-5, 1e-6, 1e-7};
  const QuadraticReport q = quadratic_check(s, chart_normals(s), dir, sizes, cfg.gamma);
  c.add("remainder slope", std::abs(q.slope - 2.0) <= 0.15, q.slope, "2 +- 0.15");
  c.data = {{"m", cfg.m}, {"size", q.size}, {"remainder", q.remainder}};
  return c;
}

CheckSection check_estimates(const ConstructionConfig& cfg, const std::vector<int>& ms) {
  CheckSection c;
  c.name = "estimates";
  Json rows = Json::array();
  std::vector<double> eh;
  for (int m : ms) {
    const SurfaceMesh s = build_mesh(with_m(cfg, m).derive());
    const EstimateReport r = verify_estimates(s, chart_shape(s));
    eh.push_back(r.EH);
    rows.push_back({{"m", m},
                    {"EH", r.EH},
                    {"H_weighted", r.H_weighted},
                    {"A2_deviation", r.A2_deviation},
                    {"rho_grad", r.rho_grad},
                    {"z_grad", r.z_grad},
                    {"h_vs_gauss", r.h_vs_gauss},
                    {"h_vs_varpi", r.h_vs_varpi},
                    {"chi_vs_hat", r.chi_vs_hat},
                    {"regions_ok", r.regions_ok}});
  }
  const auto [lo, hi] = std::minmax_element(eh.begin(), eh.end());
  const double ratio = *hi / *lo;
  c.add("weighted mean curvature constant, max/min across m", ratio < 2.0, ratio, "< 2");
  c.data = {{"rows", rows}};
  return c;
}

CheckSection check_spectrum(const ConstructionConfig& cfg) {
  CheckSection c;
  c.name = "spectrum";
  const SurfaceMesh s = build_mesh(cfg.derive());
  const ShapeData d = shape_data(s, chart_shape(s));
  const DiscreteOperator oh = assemble_operator(s.mesh, d, Gauge::H);
  const int n = s.mesh.num_vertices();
  const SymBasis b = sym_basis(s.mesh.group, n);
  const EigenResult e = eigen_low(oh, 4, b, 0.0);
  const int near = count_eigenvalues(oh, b, -0.2, 0.2);
  const int wide = count_eigenvalues(oh, b, -0.5, 0.5);
  c.add("sym eigenvalues of -L_h in [-0.2, 0.2]", near == 1, near, "== 1");
  c.add("sym eigenvalues of -L_h in [-0.5, 0.5]", wide == 1, wide, "== 1");

  // Kernel eigenfunction against a constant on the torus side {|t_under| >= a_bar - b - x}:
  // best relative sup deviation over rescalings, (max - min) / (max + min).
  int k0 = 0;
  for (int k = 1; k < static_cast<int>(e.values.size()); ++k)
    if (std::abs(e.values[k]) < std::abs(e.values[k0])) k0 = k;
  const auto& f0 = e.vectors[k0];
  Json dev = Json::object();
  double dev5 = 0.0;
  for (double x : {5.0, 2.0, 0.0}) {
    const double thr = s.params.a_bar - s.params.b - x;
    double lo = 1e300, hi = -1e300;
    for (int v = 0; v < n; ++v)
      if (std::abs(s.info[v].t_under) >= thr) {
        lo = std::min(lo, f0[v]);
        hi = std::max(hi, f0[v]);
      }
    if (hi <= 0) {
      const double t = lo;
      lo = -hi;
      hi = -t;
    }
    const double dv = lo > 0 ? (hi - lo) / (hi + lo) : 1.0;
    dev[sci(x)] = dv;
    if (x == 5.0) dev5 = dv;
  }
  c.add("kernel eigenfunction within 0.2 of a constant on the torus side (x = 5)", dev5 <= 0.2, dev5, at_most(0.2));

  // Model problems.
  const TriMesh sq = level_cell_mesh(0.0, kPi / (kSqrt2 * 6), 16);
  const DiscreteOperator lap = laplace_operator(sq);
  const EigenResult en = eigen_low(lap, 2, sym_basis(sq.group, sq.num_vertices()), -0.5);
  const auto [flo, fhi] = std::minmax_element(en.vectors[0].begin(), en.vectors[0].end());
  c.add("Neumann square: lowest sym eigenvalue", std::abs(en.values[0]) < 1e-9, en.values[0], "|.| < 1e-9");
  const double spread = std::abs(*fhi - *flo) / std::max(std::abs(*fhi), std::abs(*flo));
  c.add("Neumann square: eigenfunction constant", spread < 1e-8, spread, "< 1e-8");
  const TriMesh S = great_sphere_mesh(8);
  ShapeData ds;
  ds.A2.assign(S.num_vertices(), 0.0);
  const int sphere = count_eigenvalues(assemble_operator(S, ds, Gauge::G), sym_basis(S.group, S.num_vertices()), -1.0, 1.0);
  c.add("great sphere: sym eigenvalues of -(Delta + 2) in [-1, 1]", sphere == 0, sphere, "== 0");

  c.data = {{"m", cfg.m},
            {"eigenvalues", e.values},
            {"method", e.method},
            {"kernel_index", k0},
            {"kernel_deviation_by_x", dev}};
  return c;
}

CheckSection check_neck(const ConstructionConfig& cfg) {
  CheckSection c;
  c.name = "neck";
  const double len = 2 * kPi;
  const TriMesh C = flat_cylinder_mesh(len, 128, 200);
  const double lam = dirichlet_eig(laplace_operator(C), cylinder_layout(C, 128), sym_basis(C.group, C.num_vertices()));
  const double exact = std::pow(kPi / len, 2);
  const double rel = std::abs(lam - exact) / exact;
  c.add("flat cylinder Dirichlet eigenvalue (pi/l)^2, relative error", rel <= 1e-2, rel, at_most(1e-2));

  const SurfaceMesh s = build_mesh(cfg.derive());
  const ShapeData d = shape_data(s, chart_shape(s));
  const double b = s.params.b;
  const NeckEigReport ne = neck_dirichlet_eig(s, d, b);
  const CylinderLayout l = neck_layout(s, b);
  std::vector<double> data;
  for (int v : l.rings.front()) data.push_back(std::cos(2 * s.info[v].theta));
  const DecayReport dr = neck_harmonic_decay(s, d, b, data);
  c.add("neck decay rate for cos 2 theta data", dr.rate >= 1.5 && dr.rate <= 2.2, dr.rate, "in [1.5, 2.2]");
  c.data = {{"m", cfg.m},
            {"b", b},
            {"cylinder_lambda", lam},
            {"neck_lambda", ne.lambda},
            {"neck_length", ne.ell},
            {"neck_lambda_l2", ne.scaled},
            {"decay_rate", dr.rate}};
  return c;
}

CheckSection check_force(const ConstructionConfig& cfg, const std::vector<int>& ms, int fine_n_theta,
                         const std::vector<int>& ratio_ms) {
  CheckSection c;
  c.name = "force";
  Json rows = Json::array();
  for (int m : ms) {
    const ConstructionConfig fine = with_n_theta(with_m(cfg, m), fine_n_theta);
    const SurfaceMesh s = build_mesh(fine.derive());
    const ForceReport f = force_report(s);
    const double agree = std::abs(f.F_interior - f.F_boundary) / std::abs(f.F_boundary);
    const double waist = std::abs(f.piece[PieceWaist] + 2 * kPi * f.tau) / (2 * kPi * f.tau);
    c.add("interior vs boundary force, m = " + std::to_string(m), agree <= 1e-3, agree, at_most(1e-3));
    c.add("waist piece vs -2 pi tau, m = " + std::to_string(m), waist <= 1e-2, waist, at_most(1e-2));

    // Centered difference over zeta = +-1/2 against -8 pi^2 tau / m^2.
    const ConstructionConfig coarse = with_n_theta(with_m(cfg, m), 128);
    const double Fp = force_report(build_mesh(coarse.derive_at(0.5))).F_boundary;
    const double Fm = force_report(build_mesh(coarse.derive_at(-0.5))).F_boundary;
    const double tau0 = coarse.derive_at(0.0).tau;
    const double lead = -8 * kPi * kPi * tau0 / (m * static_cast<double>(m));
    const double slope = (Fp - Fm) / lead;
    c.add("dF/dzeta over -8 pi^2 tau / m^2, m = " + std::to_string(m), std::abs(slope - 1.0) <= 0.3, slope,
          "1 +- 0.3");
    Json row = force_json(f);
    row["n_theta"] = fine_n_theta;
    row["agreement"] = agree;
    row["dF_dzeta"] = Fp - Fm;
    row["dF_dzeta_lead"] = lead;
    rows.push_back(row);
  }
  std::vector<double> ratio;
  Json rj = Json::array();
  for (int m : ratio_ms) {
    const double r = force_report(build_mesh(with_n_theta(with_m(cfg, m), 128).derive_at(0.0))).balance_ratio;
    ratio.push_back(r);
    rj.push_back({{"m", m}, {"balance_ratio", r}});
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  c.add("balance ratio spread across m", *hi - *lo < 0.1, *hi - *lo, "< 0.1");
  c.data = {{"rows", rows}, {"balance_ratio", rj}};
  return c;
}

CheckSection check_solve(const ConstructionConfig& cfg, const SolveOptions& opt, bool repeat) {
  CheckSection c;
  c.name = "solve";
  const SolveState st = run_newton(cfg, opt);
  c.add("residual reduction", st.reduction() >= 1e3 && st.iteration <= opt.max_iter, st.reduction(), ">= 1e3");
  c.add("final |zeta|", std::abs(st.zeta) <= 10.0, std::abs(st.zeta), at_most(10.0));
  const EmbeddednessReport e = embeddedness_check(st.surface, st.X);
  c.add("embedded: sheet separation margin", e.embedded, e.margin, ">= 0 with a monotone bridge");
  const double mu_sum = std::abs(st.mu + st.mu_prime);
  c.add("|mu + mu'| at the last iterate", st.status == SolveStatus::Converged && mu_sum <= 10 * opt.tol_H, mu_sum,
        at_most(10 * opt.tol_H) + " and converged");
  const GenusReport g = genus_bookkeeping(st.surface);
  c.add("genus of the assembled surface", g.ok, static_cast<double>(g.genus), "m^2 + 1");
  if (repeat) {
    const SolveState again = run_newton(cfg, opt);
    const bool same = again.phi == st.phi && again.zeta == st.zeta && again.residual_H == st.residual_H &&
                      again.history.size() == st.history.size();
    c.add("repeated run is bit-identical", same, same ? 0.0 : 1.0, "identical");
  }
  c.data = solve_json(st);
  c.data["embeddedness"] = {{"separation", e.separation},
                            {"required", e.required},
                            {"bridge_monotone", e.bridge_monotone},
                            {"violations", e.violations}};
  c.data["genus"] = {{"cell_chi", g.cell_chi}, {"closed_chi", g.closed_chi}, {"genus", g.genus}};
  return c;
}

Json force_json(const ForceReport& f) {
  Json pieces = Json::object();
  for (int p = 0; p < kPieces; ++p) pieces[piece_name(p)] = f.piece[p];
  return {{"m", f.m},
          {"zeta", f.zeta},
          {"tau", f.tau},
          {"F_boundary", f.F_boundary},
          {"F_interior", f.F_interior},
          {"pieces", pieces},
          {"balance_ratio", f.balance_ratio}};
}

Json solve_json(const SolveState& st) {
  Json h = Json::array();
  for (const IterationRecord& r : st.history)
    h.push_back({{"iteration", r.iteration},
                 {"residual_H", r.residual_H},
                 {"F", r.F},
                 {"F_boundary", r.F_boundary},
                 {"zeta", r.zeta},
                 {"mu", r.mu},
                 {"mu_prime", r.mu_prime},
                 {"phi_norm_over_tau", r.phi_norm},
                 {"step", r.step},
                 {"krylov", r.krylov},
                 {"sym_drift", r.sym_drift}});
  return {{"status", status_name(st.status)},
          {"message", st.message},
          {"iterations", st.iteration},
          {"zeta", st.zeta},
          {"tau", st.surface.params.tau},
          {"residual_initial", st.residual_initial},
          {"residual_H", st.residual_H},
          {"reduction", st.reduction()},
          {"F", st.F},
          {"F_boundary", st.F_boundary},
          {"mu", st.mu},
          {"mu_prime", st.mu_prime},
          {"phi_norm_over_tau", st.phi_norm},
          {"history", h}};
}

Json config_json(const ConstructionConfig& cfg, const SolveOptions& opt) {
  const ConstructionParams p = cfg.derive();
  return {{"construction",
           {{"m", cfg.m},
            {"zeta", cfg.zeta},
            {"b", p.b},
            {"gamma", cfg.gamma},
            {"c_bar", cfg.c_bar},
            {"rho_reading", cfg.reading == RhoReading::TwoM ? "2m" : "2/m"},
            {"n_theta", p.n_theta},
            {"n_axial", p.n_axial},
            {"n_square", p.n_square},
            {"band_boost", p.band_boost},
            {"corner_round", p.corner_round},
            {"tau_bar", p.tau_bar},
            {"tau", p.tau},
            {"a", p.a},
            {"a_bar", p.a_bar}}},
          {"solve",
           {{"tol_H", opt.tol_H},
            {"tol_F", opt.tol_F},
            {"max_iter", opt.max_iter},
            {"max_zeta_step", opt.max_zeta_step},
            {"zeta_fd", opt.zeta_fd},
            {"gmres_tol", opt.gmres_tol},
            {"gmres_max", opt.gmres_max},
            {"zeta_mode", zeta_mode_name(opt.zeta_mode)}}}};
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"ambient",  "construction", "curvature", "linearization",
                                              "quadratic", "estimates",   "spectrum",  "neck",
                                              "force",    "solve"};
  return names;
}

Report run_report(const ReportRequest& req) {
  const std::vector<std::string>& all = suite_names();
  const std::vector<std::string> chosen = req.suites.empty() ? all : req.suites;
  for (const std::string& s : chosen)
    if (std::find(all.begin(), all.end(), s) == all.end()) throw ConfigError("unknown check suite '" + s + "'");

  const ConstructionConfig& cfg = req.cfg;
  const std::map<std::string, std::function<CheckSection()>> run{
      {"ambient", [] { return check_ambient(); }},
      {"construction", [] { return check_construction(); }},
      {"curvature", [&] { return check_curvature(cfg); }},
      {"linearization", [&] { return check_linearization(cfg); }},
      {"quadratic", [&] { return check_quadratic(cfg); }},
      {"estimates", [&] { return check_estimates(cfg); }},
      {"spectrum", [&] { return check_spectrum(cfg); }},
      {"neck", [&] { return check_neck(cfg); }},
      {"force", [&] { return check_force(cfg); }},
      {"solve", [&] { return check_solve(cfg, req.solve, false); }},
  };

  Report r;
  r.json["schema_version"] = 1;
  r.json["config"] = config_json(cfg, req.solve);
  Json sections = Json::object();
  bool numerical = false;
  r.passed = true;
  for (const std::string& name : all) {
    if (std::find(chosen.begin(), chosen.end(), name) == chosen.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CheckSection sec;
    try {
      sec = run.at(name)();
    } catch (const NumericalError& e) {
      sec.error = e.what();
      sec.numerical_error = true;
    } catch (const std::exception& e) {
      sec.error = e.what();
    }
    sec.name = name;
    sec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    numerical = numerical || sec.numerical_error;
    r.passed = r.passed && sec.passed();
    sections[name] = sec.to_json(req.timings);
    r.sections.push_back(std::move(sec));
  }
  r.json["sections"] = sections;
  r.json["passed"] = r.passed;
  r.exit_code = numerical ? 3 : r.passed ? 0 : 2;
  return r;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_obj(const std::string& path, const TriMesh& topo, const std::vector<Vec4>& X, ObjProjection proj) {
  std::ofstream out = open_out(path);
  for (const Vec4& v : X) {
    if (proj == ObjProjection::Chart) {
      const DomainPoint q = chart_inverse(v);
      out << "v " << q.x << ' ' << q.y << ' ' << q.z << '\n';
    } else {
      const double s = 1.0 / (1.0 + v[3]);
      out << "v " << v[0] * s << ' ' << v[1] * s << ' ' << v[2] * s << '\n';
    }
  }
  for (const auto& t : topo.tri) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_history_csv(const std::string& path, const SolveState& st) {
  std::ofstream out = open_out(path);
  out << "iteration,residual_H,F,F_boundary,zeta,mu,mu_prime,phi_norm_over_tau,step,krylov,sym_drift\n";
  for (const IterationRecord& r : st.history)
    out << r.iteration << ',' << r.residual_H << ',' << r.F << ',' << r.F_boundary << ',' << r.zeta << ',' << r.mu
        << ',' << r.mu_prime << ',' << r.phi_norm << ',' << r.step << ',' << r.krylov << ',' << r.sym_drift << '\n';
}

void write_force_csv(const std::string& path, const ForceReport& f) {
  std::ofstream out = open_out(path);
  out << "piece,value\n";
  for (int p = 0; p < kPieces; ++p) out << piece_name(p) << ',' << f.piece[p] << '\n';
  out << "boundary," << f.F_boundary << '\n' << "interior," << f.F_interior << '\n';
}

void write_spectrum_csv(const std::string& path, const std::vector<double>& values) {
  std::ofstream out = open_out(path);
  out << "index,eigenvalue\n";
  for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << values[i] << '\n';
}

}  // namespace dcg
