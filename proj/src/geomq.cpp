#include "dcg/geomq.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <tuple>

namespace dcg {

namespace {

using A3 = std::array<double, 3>;

A3 cross3(const A3& a, const A3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Inverse of a symmetric 2x2.
Sym2 inv2(const Sym2& s) {
  const double det = s[0] * s[2] - s[1] * s[1];
  return {s[2] / det, -s[1] / det, s[0] / det};
}

// Eigenvalues of G^{-1} B for symmetric positive G.
std::array<double, 2> rel_eigs(const Sym2& G, const Sym2& B) {
  const Sym2 Gi = inv2(G);
  // M = Gi * B (not symmetric in general, but similar to a symmetric matrix)
  const double m11 = Gi[0] * B[0] + Gi[1] * B[1];
  const double m12 = Gi[0] * B[1] + Gi[1] * B[2];
  const double m21 = Gi[1] * B[0] + Gi[2] * B[1];
  const double m22 = Gi[1] * B[1] + Gi[2] * B[2];
  const double tr = m11 + m22, det = m11 * m22 - m12 * m21;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  return {0.5 * tr - disc, 0.5 * tr + disc};
}

}  // namespace

ShapeEntry shape_from_jet(const ChartJet& j, bool euclidean) {
  const AmbientMetric g =
      euclidean ? AmbientMetric{{1.0, 1.0, 1.0}, 0.0, 0.0, 0.0, 0.0, 1.0} : ambient_metric(j.p.z);
  auto gdot = [&](const A3& a, const A3& b) { return g.g[0] * a[0] * b[0] + g.g[1] * a[1] * b[1] + g.g[2] * a[2] * b[2]; };
  ShapeEntry e;
  e.first = {gdot(j.pu, j.pu), gdot(j.pu, j.pv), gdot(j.pv, j.pv)};
  const A3 n = cross3(j.pu, j.pv);
  A3 N{n[0] / g.g[0], n[1] / g.g[1], n[2] / g.g[2]};
  const double len = std::sqrt(n[0] * N[0] + n[1] * N[1] + n[2] * N[2]);
  for (double& c : N) c /= len;
  auto second = [&](const A3& pa, const A3& pb, const A3& pab) {
    double s = 0.0;
    for (int l = 0; l < 3; ++l) {
      double acc = pab[l];
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) acc += g.gamma(l, i, k) * pa[i] * pb[k];
      s += g.g[l] * N[l] * acc;
    }
    return s;
  };
  e.second = {second(j.pu, j.pu, j.puu), second(j.pu, j.pv, j.puv), second(j.pv, j.pv, j.pvv)};
  const Sym2 gi = inv2(e.first);
  const Sym2& A = e.second;
  e.H = gi[0] * A[0] + 2.0 * gi[1] * A[1] + gi[2] * A[2];
  // |A|^2 = tr(gi A gi A)
  const double m11 = gi[0] * A[0] + gi[1] * A[1], m12 = gi[0] * A[1] + gi[1] * A[2];
  const double m21 = gi[1] * A[0] + gi[2] * A[1], m22 = gi[1] * A[1] + gi[2] * A[2];
  e.A2 = m11 * m11 + 2.0 * m12 * m21 + m22 * m22;
  if (euclidean) return e;
  const Frame f = coordinate_frame(j.p);
  e.normal = f.dx * N[0] + f.dy * N[1] + f.dz * N[2];
  return e;
}

ChartJet catenoid_jet(double tau, double t, double theta) {
  const double ch = std::cosh(t), sh = std::sinh(t), c = std::cos(theta), s = std::sin(theta);
  ChartJet j;
  j.p = {tau * ch * c, tau * ch * s, tau * t};
  j.pu = {tau * sh * c, tau * sh * s, tau};
  j.pv = {-tau * ch * s, tau * ch * c, 0.0};
  j.puu = {tau * ch * c, tau * ch * s, 0.0};
  j.puv = {-tau * sh * s, tau * sh * c, 0.0};
  j.pvv = {-tau * ch * c, -tau * ch * s, 0.0};
  return j;
}

ChartJet sheet_jet(const ConstructionParams& p, double x, double y, int sheet) {
  const double r = std::hypot(x, y);
  const Profile pr = profile_phi(r, p);
  const double sg = sheet >= 0 ? 1.0 : -1.0;
  const double d1 = sg * pr.d1, d2 = sg * pr.d2;
  const double ux = x / r, uy = y / r;
  const double fx = d1 * ux, fy = d1 * uy;
  const double fxx = d2 * ux * ux + d1 * (1.0 - ux * ux) / r;
  const double fyy = d2 * uy * uy + d1 * (1.0 - uy * uy) / r;
  const double fxy = (d2 - d1 / r) * ux * uy;
  ChartJet j;
  j.p = {x, y, sg * pr.phi_glued};
  const A3 px{1.0, 0.0, fx}, py{0.0, 1.0, fy};
  if (sheet >= 0) {
    j.pu = px;
    j.pv = py;
    j.puu = {0, 0, fxx};
    j.pvv = {0, 0, fyy};
  } else {
    j.pu = py;
    j.pv = px;
    j.puu = {0, 0, fyy};
    j.pvv = {0, 0, fxx};
  }
  j.puv = {0, 0, fxy};
  return j;
}

ChartJet level_jet(double x, double y, double c) {
  ChartJet j;
  j.p = {x, y, c};
  j.pu = {1, 0, 0};
  j.pv = {0, 1, 0};
  return j;
}

ChartJet vertex_jet(const SurfaceMesh& s, int v) {
  const VertexInfo& vi = s.info[v];
  if (vi.chart == ChartKind::Catenoid) return catenoid_jet(s.params.tau, vi.t, vi.theta);
  const DomainPoint& q = s.mesh.dom[v];
  return sheet_jet(s.params, q.x, q.y, vi.sheet);
}

ShapeEntry chart_shape(const SurfaceMesh& s, int v) { return shape_from_jet(vertex_jet(s, v)); }

std::vector<ShapeEntry> chart_shape(const SurfaceMesh& s) {
  std::vector<ShapeEntry> out(s.info.size());
  for (int v = 0; v < static_cast<int>(out.size()); ++v) out[v] = chart_shape(s, v);
  return out;
}

std::vector<Vec4> chart_normals(const SurfaceMesh& s) {
  std::vector<Vec4> n(s.info.size());
  for (int v = 0; v < static_cast<int>(n.size()); ++v) n[v] = chart_shape(s, v).normal;
  return n;
}

namespace {

template <class T>
struct Core {
  std::vector<T> H;
  std::vector<V4<T>> normal, lap;
  std::vector<T> area;
};

template <class T>
V4<T> apply_P(const std::array<double, 16>& P, const V4<T>& v) {
  V4<T> r;
  for (int i = 0; i < 4; ++i) r[i] = T(P[i * 4]) * v[0] + T(P[i * 4 + 1]) * v[1] + T(P[i * 4 + 2]) * v[2] + T(P[i * 4 + 3]) * v[3];
  return r;
}

// te[t] = {X[v1] - X[v0], X[v2] - X[v0]} for triangle t = (v0, v1, v2).
template <class T>
Core<T> discrete_core(const TriMesh& m, const std::vector<V4<T>>& X, const std::vector<std::array<V4<T>, 2>>& te) {
  using std::sqrt;
  const int n = m.num_vertices();
  Core<T> c;
  c.H.assign(n, T(0.0));
  c.normal.assign(n, V4<T>());
  c.lap.assign(n, V4<T>());
  c.area.assign(n, T(0.0));
  const T half(0.5);
  for (int t = 0; t < static_cast<int>(m.tri.size()); ++t) {
    const auto& tr = m.tri[t];
    const V4<T>& a = te[t][0];
    const V4<T>& b = te[t][1];
    const V4<T> e = b - a;
    const T aa = dot(a, a), bb = dot(b, b), ab = dot(a, b), ee = dot(e, e);
    const T area2 = sqrt(aa * bb - ab * ab);
    const double scale = std::max({value(aa), value(bb), value(ee)});
    if (!(value(area2) * 0.5 >= 1e-14 * scale) || !(scale > 0.0))
      throw MeshQualityError("degenerate triangle " + std::to_string(t));
    const T cot0 = ab / area2;
    const T cot1 = -dot(a, e) / area2;
    const T cot2 = dot(b, e) / area2;
    c.lap[tr[0]] += (a * cot2 + b * cot1) * half;
    c.lap[tr[1]] += (e * cot0 - a * cot2) * half;
    c.lap[tr[2]] += (-(b * cot1) - e * cot0) * half;
    c.normal[tr[0]] += cross4(X[tr[0]], a, b);
    c.normal[tr[1]] += cross4(X[tr[1]], e, -a);
    c.normal[tr[2]] += cross4(X[tr[2]], -b, -e);
    const T ar = area2 / T(6.0);
    for (int k = 0; k < 3; ++k) c.area[tr[k]] += ar;
  }
  for (int i = 0; i < n; ++i) {
    V4<T> nv = c.normal[i];
    V4<T> lp = c.lap[i] / c.area[i];
    if (!m.vface.empty() && m.vface[i]) {
      const auto P = m.mirror_average(i);
      nv = apply_P(P, nv);
      lp = apply_P(P, lp);
    }
    nv = nv / norm(nv);
    c.normal[i] = nv;
    c.lap[i] = lp;
    c.H[i] = dot(lp + X[i] * T(2.0), nv);
  }
  return c;
}

template <class T>
T cos_minus(const T& pj, const T& pi) {
  using std::sin;
  return T(-2.0) * sin((pj + pi) * T(0.5)) * sin((pj - pi) * T(0.5));
}

template <class T>
T sin_minus(const T& pj, const T& pi) {
  using std::cos;
  using std::sin;
  return T(2.0) * cos((pj + pi) * T(0.5)) * sin((pj - pi) * T(0.5));
}

template <class T>
V4<T> lift(const Vec4& v) {
  return to_dual_vec<T>(v);
}

template <class T>
void perturbed_geometry(const TriMesh& base, const std::vector<Vec4>& nu, const std::vector<T>& phi,
                        std::vector<V4<T>>& X, std::vector<std::array<V4<T>, 2>>& te) {
  using std::cos;
  using std::sin;
  const int n = base.num_vertices();
  X.resize(n);
  for (int i = 0; i < n; ++i) X[i] = lift<T>(base.X[i]) * cos(phi[i]) + lift<T>(nu[i]) * sin(phi[i]);
  auto edge = [&](int i, int j) {
    const V4<T> D = lift<T>(base.edge(i, j));
    return D * cos(phi[j]) + lift<T>(base.X[i]) * cos_minus(phi[j], phi[i]) + lift<T>(nu[j] - nu[i]) * sin(phi[j]) +
           lift<T>(nu[i]) * sin_minus(phi[j], phi[i]);
  };
  te.resize(base.tri.size());
  for (std::size_t t = 0; t < base.tri.size(); ++t) {
    const auto& tr = base.tri[t];
    te[t] = {edge(tr[0], tr[1]), edge(tr[0], tr[2])};
  }
}

DiscreteShape to_shape(Core<double>&& c) {
  DiscreteShape s;
  s.H = std::move(c.H);
  s.area = std::move(c.area);
  s.normal = std::move(c.normal);
  s.lap = std::move(c.lap);
  return s;
}

}  // namespace

DiscreteShape discrete_shape(const TriMesh& m) {
  std::vector<std::array<Vec4, 2>> te(m.tri.size());
  for (std::size_t t = 0; t < m.tri.size(); ++t) {
    const auto& tr = m.tri[t];
    te[t] = {m.edge(tr[0], tr[1]), m.edge(tr[0], tr[2])};
  }
  return to_shape(discrete_core<double>(m, m.X, te));
}

Vec4 PerturbedMesh::edge(int i, int j) const {
  const Vec4 D = base->edge(i, j);
  return D * std::cos(phi[j]) + base->X[i] * cos_minus(phi[j], phi[i]) + (normal[j] - normal[i]) * std::sin(phi[j]) +
         normal[i] * sin_minus(phi[j], phi[i]);
}

PerturbedMesh perturb_normal(const TriMesh& base, const std::vector<Vec4>& normal, const std::vector<double>& phi) {
  const int n = base.num_vertices();
  if (static_cast<int>(normal.size()) != n || static_cast<int>(phi.size()) != n)
    throw std::invalid_argument("perturb_normal: field size mismatch");
  PerturbedMesh pm;
  pm.base = &base;
  pm.normal = normal;
  pm.phi = phi;
  std::vector<std::array<Vec4, 2>> te;
  perturbed_geometry<double>(base, normal, phi, pm.X, te);
  for (std::size_t t = 0; t < base.tri.size(); ++t) {
    const auto& tr = base.tri[t];
    const Vec4 n0 = cross4(base.X[tr[0]], base.edge(tr[0], tr[1]), base.edge(tr[0], tr[2]));
    const Vec4 n1 = cross4(pm.X[tr[0]], te[t][0], te[t][1]);
    if (!(dot(n0, n1) > 0.0)) throw PerturbationTooLarge("triangle " + std::to_string(t) + " flips under the perturbation");
  }
  return pm;
}

DiscreteShape discrete_shape(const PerturbedMesh& pm) {
  std::vector<Vec4> X;
  std::vector<std::array<Vec4, 2>> te;
  perturbed_geometry<double>(*pm.base, pm.normal, pm.phi, X, te);
  return to_shape(discrete_core<double>(*pm.base, X, te));
}

std::vector<double> discrete_tangent(const TriMesh& base, const std::vector<Vec4>& normal,
                                     const std::vector<double>& phi, const std::vector<double>& dphi) {
  const int n = base.num_vertices();
  std::vector<Dual> p(n);
  for (int i = 0; i < n; ++i) p[i] = Dual(phi[i], dphi[i]);
  std::vector<V4<Dual>> X;
  std::vector<std::array<V4<Dual>, 2>> te;
  perturbed_geometry<Dual>(base, normal, p, X, te);
  const Core<Dual> c = discrete_core<Dual>(base, X, te);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = c.H[i].d;
  return out;
}

std::vector<char> interior_mask(const TriMesh& m, int collar) {
  const int n = m.num_vertices();
  std::vector<int> dist(n, std::numeric_limits<int>::max());
  std::deque<int> q;
  for (const auto& be : m.boundary)
    for (int v : {be.a, be.b})
      if (dist[v] != 0) {
        dist[v] = 0;
        q.push_back(v);
      }
  std::vector<std::vector<int>> nb(n);
  for (const auto& t : m.tri)
    for (int k = 0; k < 3; ++k) {
      nb[t[k]].push_back(t[(k + 1) % 3]);
      nb[t[(k + 1) % 3]].push_back(t[k]);
    }
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    for (int w : nb[v])
      if (dist[w] > dist[v] + 1) {
        dist[w] = dist[v] + 1;
        q.push_back(w);
      }
  }
  std::vector<char> mask(n);
  for (int i = 0; i < n; ++i) mask[i] = dist[i] > collar;
  return mask;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double mesh_l2(const std::vector<double>& f, const std::vector<double>& area) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += area[i] * f[i] * f[i];
  return std::sqrt(s);
}

LinearizationReport linearization_check(const TriMesh& base, const std::vector<Vec4>& normal,
                                        const std::vector<double>& phi, const std::vector<double>& eps, int collar) {
  const int n = base.num_vertices();
  const std::vector<double> zero(n, 0.0);
  const DiscreteShape s0 = discrete_shape(perturb_normal(base, normal, zero));
  const std::vector<double> Lphi = discrete_tangent(base, normal, zero, phi);
  const std::vector<char> mask = interior_mask(base, collar);
  LinearizationReport r;
  r.eps = eps;
  for (double e : eps) {
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = e * phi[i];
    const DiscreteShape s = discrete_shape(perturb_normal(base, normal, p));
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask[i]) worst = std::max(worst, std::abs(s.H[i] - s0.H[i] - e * Lphi[i]));
    r.remainder.push_back(worst);
  }
  const bool positive = std::all_of(r.remainder.begin(), r.remainder.end(), [](double v) { return v > 0.0; });
  r.slope = positive ? loglog_slope(r.eps, r.remainder) : std::numeric_limits<double>::quiet_NaN();
  r.ok = r.slope >= 1.5 && r.slope <= 2.5;
  r.tight = std::abs(r.slope - 2.0) <= 0.1;
  return r;
}

namespace {

std::vector<std::pair<int, int>> unique_edges(const TriMesh& m) {
  std::set<std::pair<int, int>> s;
  for (const auto& t : m.tri)
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      s.insert({a, b});
    }
  return {s.begin(), s.end()};
}

// sup over edges of |u_j - u_i| / (chi length) / weight.
double chi_gradient_sup(const SurfaceMesh& s, const std::vector<std::pair<int, int>>& edges,
                        const std::vector<double>& u, const std::vector<double>& w) {
  double best = 0.0;
  for (const auto& [i, j] : edges) {
    const double len = 0.5 * (s.info[i].rho + s.info[j].rho) * norm(s.mesh.edge(i, j));
    const double wt = 0.5 * (w[i] + w[j]);
    if (len > 0.0 && wt > 0.0) best = std::max(best, std::abs(u[j] - u[i]) / len / wt);
  }
  return best;
}

}  // namespace

EstimateReport verify_estimates(const SurfaceMesh& s, const std::vector<ShapeEntry>& shape) {
  const ConstructionParams& p = s.params;
  const int n = s.mesh.num_vertices();
  const double tau = p.tau, m = p.m, b = p.b;
  EstimateReport r;
  r.m = p.m;
  r.regions_ok = regions_admissible(p, b, 0, 0);
  std::vector<double> rho(n), rinv(n), z(n), zw(n), Hs(n), Hw(n), Ad(n), Aw(n);
  const WeightReport wr = field_weights(s, p.gamma);
  for (int v = 0; v < n; ++v) {
    const VertexInfo& vi = s.info[v];
    const ShapeEntry& e = shape[v];
    const double rr = vi.rho, r2 = rr * rr;
    rho[v] = rr;
    rinv[v] = 1.0 / rr;
    z[v] = s.mesh.dom[v].z;
    zw[v] = std::abs(z[v]) + tau;
    Hs[v] = e.H / r2;
    Hw[v] = (tau + 1.0 / r2) * zw[v];
    Ad[v] = e.A2 - 2.0 * tau * tau * r2 * r2;
    Aw[v] = 1.0 + tau * r2;
    r.H_weighted = std::max(r.H_weighted, std::abs(Hs[v]) / Hw[v]);
    r.A2_deviation = std::max(r.A2_deviation, std::abs(Ad[v]) / Aw[v]);
    r.EH = std::max(r.EH, std::abs(Hs[v]) / wr.f_tilde[v] / tau);

    if (vi.chart != ChartKind::Catenoid && vi.label.region == Region::S0) r.regions_ok = false;
    const Sym2 hm{0.5 * (e.A2 + m * m) * e.first[0], 0.5 * (e.A2 + m * m) * e.first[1],
                  0.5 * (e.A2 + m * m) * e.first[2]};
    const Region reg = vi.label.region;
    if (reg == Region::S0 && vi.chart == ChartKind::Catenoid) {
      const double sech2 = 1.0 / (std::cosh(vi.t) * std::cosh(vi.t));
      const auto ev = rel_eigs({sech2, 0.0, sech2}, hm);
      r.h_vs_gauss = std::max(r.h_vs_gauss, std::max(std::abs(ev[0] - 1), std::abs(ev[1] - 1)) / tau);
    }
    if (reg == Region::S1Upper || reg == Region::S1Lower) {
      const ChartJet j = vertex_jet(s, v);
      const double k = 0.5 * m * m;
      const Sym2 W{k * (j.pu[0] * j.pu[0] + j.pu[1] * j.pu[1]), k * (j.pu[0] * j.pv[0] + j.pu[1] * j.pv[1]),
                   k * (j.pv[0] * j.pv[0] + j.pv[1] * j.pv[1])};
      const auto ev = rel_eigs(W, hm);
      r.h_vs_varpi = std::max(r.h_vs_varpi, std::max(std::abs(ev[0] - 1), std::abs(ev[1] - 1)) * m * m);
    }
    if (reg == Region::LambdaUpper || reg == Region::LambdaLower) {
      const auto ev = rel_eigs({1.0, 0.0, 1.0}, {r2 * e.first[0], r2 * e.first[1], r2 * e.first[2]});
      r.chi_vs_hat = std::max(r.chi_vs_hat, std::max(std::abs(ev[0] - 1), std::abs(ev[1] - 1)) / (m * m * tau));
      const double wexp = std::exp(1.5 * vi.label.x_min) / std::exp(-1.5 * b);
      r.lambda_A2 = std::max(r.lambda_A2, e.A2 / r2 * wexp);
      r.lambda_m2 = std::max(r.lambda_m2, m * m / r2 * wexp);
    }
  }
  const auto edges = unique_edges(s.mesh);
  r.rho_grad = chi_gradient_sup(s, edges, rho, rho);
  r.rho_inv_grad = chi_gradient_sup(s, edges, rinv, rinv);
  r.z_grad = chi_gradient_sup(s, edges, z, zw);
  r.H_grad = chi_gradient_sup(s, edges, Hs, Hw);
  r.A2_grad = chi_gradient_sup(s, edges, Ad, Aw);
  return r;
}

namespace {

// Permutation of vertices induced by an ambient map, matched on rounded coordinates.
std::vector<int> match_perm(const std::vector<Vec4>& X, const std::function<Vec4(const Vec4&)>& f) {
  auto key = [](const Vec4& v) {
    return std::make_tuple(std::llround(v[0] * 1e8), std::llround(v[1] * 1e8), std::llround(v[2] * 1e8),
                           std::llround(v[3] * 1e8));
  };
  std::map<std::tuple<long long, long long, long long, long long>, int> idx;
  for (int i = 0; i < static_cast<int>(X.size()); ++i) idx[key(X[i])] = i;
  std::vector<int> g(X.size());
  for (int i = 0; i < static_cast<int>(X.size()); ++i) {
    auto it = idx.find(key(f(X[i])));
    if (it == idx.end()) throw std::logic_error("model mesh is not symmetric");
    g[i] = it->second;
  }
  return g;
}

// Triangles of a staggered strip between rings k and k1 with the lattice convention.
void staggered_strip(int k, int k1, int n, std::vector<std::array<int, 3>>& tri) {
  auto id = [n](int ring, int i) { return ring * n + ((i % n) + n) % n; };
  for (int i = 0; i < n; ++i) {
    if (k % 2 == 0) {
      tri.push_back({id(k, i), id(k, i + 1), id(k1, i)});
      tri.push_back({id(k1, i), id(k, i + 1), id(k1, i + 1)});
    } else {
      tri.push_back({id(k, i), id(k, i + 1), id(k1, i + 1)});
      tri.push_back({id(k1, i), id(k, i), id(k1, i + 1)});
    }
  }
}

}  // namespace

TriMesh parallel_torus_mesh(double c, int nx, int ny) {
  if (ny % 2 != 0) throw std::invalid_argument("parallel_torus_mesh: ny must be even");
  TriMesh m;
  const double L = kSqrt2 * kPi;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const DomainPoint q{L * (i + 0.5 * (j % 2)) / nx, L * j / ny, c};
      m.dom.push_back(q);
      m.X.push_back(phi_map(q));
    }
  std::vector<std::array<int, 3>> tri;
  // Strips run ccw in (ring, position) = (y, x), which gives nu = +d_z.
  for (int j = 0; j < ny; ++j) staggered_strip(j, (j + 1) % ny, nx, tri);
  m.tri = std::move(tri);
  m.build_incidence();
  return m;
}

TriMesh level_cell_mesh(double c, double d, int n) {
  TriMesh m;
  auto add = [&](double x, double y) {
    const DomainPoint q{x, y, c};
    m.dom.push_back(q);
    m.X.push_back(phi_map(q));
    std::uint8_t f = 0;
    if (x == d) f |= FaceXPlus;
    if (x == -d) f |= FaceXMinus;
    if (y == d) f |= FaceYPlus;
    if (y == -d) f |= FaceYMinus;
    m.vface.push_back(f);
    return static_cast<int>(m.X.size()) - 1;
  };
  auto coord = [&](int i) { return i == 0 ? -d : i == n ? d : -d + 2.0 * d * i / n; };
  std::vector<int> node((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) node[j * (n + 1) + i] = add(coord(i), coord(j));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int c00 = node[j * (n + 1) + i], c10 = node[j * (n + 1) + i + 1];
      const int c01 = node[(j + 1) * (n + 1) + i], c11 = node[(j + 1) * (n + 1) + i + 1];
      const int ctr = add(-d + 2.0 * d * (i + 0.5) / n, -d + 2.0 * d * (j + 0.5) / n);
      const int t0 = static_cast<int>(m.tri.size());
      m.tri.push_back({c00, c10, ctr});
      m.tri.push_back({c10, c11, ctr});
      m.tri.push_back({c11, c01, ctr});
      m.tri.push_back({c01, c00, ctr});
      if (j == 0) m.boundary.push_back({c00, c10, t0, FaceYMinus});
      if (i == n - 1) m.boundary.push_back({c10, c11, t0 + 1, FaceXPlus});
      if (j == n - 1) m.boundary.push_back({c11, c01, t0 + 2, FaceYPlus});
      if (i == 0) m.boundary.push_back({c01, c00, t0 + 3, FaceXMinus});
    }
  const AffineSym rxp{false, -1, 1, 2 * d, 0}, rxm{false, -1, 1, -2 * d, 0};
  const AffineSym ryp{false, 1, -1, 0, 2 * d}, rym{false, 1, -1, 0, -2 * d};
  m.mirror = {rxp.matrix(), rxm.matrix(), ryp.matrix(), rym.matrix()};
  const AffineSym sx{false, -1, 1, 0, 0}, sy{false, 1, -1, 0, 0};
  m.group = close_group({match_perm(m.X, [&](const Vec4& v) { return sx.apply(v); }),
                         match_perm(m.X, [&](const Vec4& v) { return sy.apply(v); })});
  m.build_incidence();
  return m;
}

TriMesh great_sphere_mesh(int level) {
  if (level < 1) throw std::invalid_argument("great_sphere_mesh: level >= 1");
  TriMesh m;
  const std::array<std::array<double, 3>, 6> V = {{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  // Outward-oriented octahedron faces.
  const std::array<std::array<int, 3>, 8> F = {
      {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}}};
  std::map<std::tuple<long long, long long, long long>, int> idx;
  auto vertex = [&](std::array<double, 3> p) {
    const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    for (double& c : p) c /= r;
    const auto key = std::make_tuple(std::llround(p[0] * 1e9), std::llround(p[1] * 1e9), std::llround(p[2] * 1e9));
    auto it = idx.find(key);
    if (it != idx.end()) return it->second;
    m.X.push_back(Vec4(p[0], p[1], p[2], 0.0));
    const int id = static_cast<int>(m.X.size()) - 1;
    idx[key] = id;
    return id;
  };
  for (const auto& f : F) {
    std::vector<std::vector<int>> grid(level + 1);
    for (int i = 0; i <= level; ++i)
      for (int j = 0; j <= level - i; ++j) {
        const double a = static_cast<double>(level - i - j) / level, b = static_cast<double>(i) / level,
                     c = static_cast<double>(j) / level;
        std::array<double, 3> p;
        for (int k = 0; k < 3; ++k) p[k] = a * V[f[0]][k] + b * V[f[1]][k] + c * V[f[2]][k];
        grid[i].push_back(vertex(p));
      }
    for (int i = 0; i < level; ++i)
      for (int j = 0; j < level - i; ++j) {
        m.tri.push_back({grid[i][j], grid[i + 1][j], grid[i][j + 1]});
        if (j + 1 < level - i) m.tri.push_back({grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]});
      }
  }
  m.group = close_group({match_perm(m.X, [](const Vec4& v) { return Vec4(-v[0], v[1], v[2], v[3]); }),
                         match_perm(m.X, [](const Vec4& v) { return Vec4(v[0], -v[1], v[2], v[3]); }),
                         match_perm(m.X, [](const Vec4& v) { return Vec4(v[1], v[0], -v[2], v[3]); })});
  m.build_incidence();
  return m;
}

TriMesh flat_cylinder_mesh(double len, int n_theta, int n_t) {
  TriMesh m;
  for (int k = 0; k <= n_t; ++k)
    for (int i = 0; i < n_theta; ++i) {
      const double th = 2.0 * kPi * (i + 0.5 * (k % 2)) / n_theta;
      m.X.push_back(Vec4(std::cos(th), std::sin(th), len * k / n_t, 0.0));
    }
  for (int k = 0; k < n_t; ++k) staggered_strip(k, k + 1, n_theta, m.tri);
  for (int i = 0; i < n_theta; ++i) {
    m.boundary.push_back({i, (i + 1) % n_theta, -1, 0});
    m.boundary.push_back({n_t * n_theta + i, n_t * n_theta + (i + 1) % n_theta, -1, 0});
  }
  if (n_theta % 2 == 0)
    m.group = close_group({match_perm(m.X, [](const Vec4& v) { return Vec4(v[0], -v[1], v[2], v[3]); }),
                           match_perm(m.X, [](const Vec4& v) { return Vec4(-v[0], v[1], v[2], v[3]); })});
  m.build_incidence();
  return m;
}

}  // namespace dcg
