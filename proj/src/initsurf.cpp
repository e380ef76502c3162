#include "dcg/initsurf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace dcg {

double profile_Psi(double s) {
  if (s <= -1.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double s2 = s * s;
  return 0.5 + s * (15.0 - 10.0 * s2 + 3.0 * s2 * s2) / 16.0;
}

double profile_Psi_d1(double s) {
  if (s <= -1.0 || s >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  return 15.0 * u * u / 16.0;
}

double profile_Psi_d2(double s) {
  if (s <= -1.0 || s >= 1.0) return 0.0;
  return -60.0 * s * (1.0 - s * s) / 16.0;
}

namespace {

void require_distinct(double a, double b) {
  if (a == b) throw std::invalid_argument("cutoff requires a != b");
}

double affine_L(double a, double b, double s) { return -3.0 + 6.0 * (s - a) / (b - a); }

}  // namespace

double cutoff_psi(double a, double b, double s) {
  require_distinct(a, b);
  return profile_Psi(affine_L(a, b, s));
}

double cutoff_psi_d1(double a, double b, double s) {
  require_distinct(a, b);
  return profile_Psi_d1(affine_L(a, b, s)) * 6.0 / (b - a);
}

double cutoff_psi_d2(double a, double b, double s) {
  require_distinct(a, b);
  const double k = 6.0 / (b - a);
  return profile_Psi_d2(affine_L(a, b, s)) * k * k;
}

double default_region_constant(double a_bar) { return std::min(2.0, a_bar / 4.0); }

namespace {

double solve_a(double m, double tau) {
  const double x = 1.0 / (m * tau);
  if (!(x > 1.0)) throw ConstructionError("m * tau >= 1: bridge does not fit the cell");
  double a = std::acosh(x);
  // Newton polish on tau cosh a = 1/m.
  for (int it = 0; it < 3; ++it) {
    const double f = std::cosh(a) - x;
    const double df = std::sinh(a);
    if (df == 0.0) break;
    a -= f / df;
  }
  return a;
}

}  // namespace

ConstructionParams derive_params(int m, double zeta, double b, double gamma, const Resolution& res, double c_bar,
                                 RhoReading reading) {
  if (m < 3) throw ConstructionError("lattice size m must be at least 3");
  if (std::abs(zeta) > c_bar) throw ConstructionError("|zeta| exceeds the configured bound");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConstructionError("gamma must lie in (0,1)");
  if (res.n_theta < 8 || res.n_theta % 8 != 0) throw ConstructionError("n_theta must be a positive multiple of 8");
  ConstructionParams p;
  p.m = m;
  p.zeta = zeta;
  p.gamma = gamma;
  p.c_bar = c_bar;
  p.rho_reading = reading;
  const double md = m;
  p.tau_bar = std::exp(-md * md / (4.0 * kPi)) / md;
  p.tau = std::exp(zeta) * p.tau_bar;
  p.a = solve_a(md, p.tau);
  p.a_bar = solve_a(md, p.tau_bar);
  p.d = kPi / (kSqrt2 * md);
  p.b = b > 0.0 ? b : default_region_constant(p.a_bar);
  p.ea_residual = p.a + zeta - md * md / (4.0 * kPi) - std::log(2.0);
  p.ea_ok = std::abs(p.ea_residual) < p.tau_bar;
  p.n_theta = res.n_theta;
  const double step = 0.5 * std::sqrt(3.0) * 2.0 * kPi / res.n_theta;
  p.n_axial = res.n_axial > 0 ? res.n_axial : static_cast<int>(std::ceil(p.a_bar / step));
  if (res.band_boost < 0.0 || res.corner_round <= 0.0) throw ConstructionError("invalid ring grading");
  p.band_boost = res.band_boost;
  p.corner_round = res.corner_round;
  p.n_square = res.n_square > 0 ? res.n_square
                                : static_cast<int>(std::ceil((std::log(kPi) + p.band_boost * std::log(2.0)) / step));
  return p;
}

Profile profile_phi(double r, const ConstructionParams& p) {
  const double tau = p.tau;
  if (r < tau) throw DomainError("profile requires r >= tau");
  const double m = p.m;
  Profile out;
  const double q = tau / r;
  out.phi_cat = tau * (std::log(r) - std::log(tau) + std::log1p(std::sqrt(std::max(0.0, 1.0 - q * q))));
  const double top = p.tau * p.a;
  const double lo = 1.0 / m, hi = 2.0 / m;
  const double psi = cutoff_psi(lo, hi, r);
  const double dpsi = cutoff_psi_d1(lo, hi, r);
  const double ddpsi = cutoff_psi_d2(lo, hi, r);
  const double s = std::sqrt(std::max(0.0, r * r - tau * tau));
  const double c1 = s > 0.0 ? tau / s : std::numeric_limits<double>::infinity();
  const double c2 = s > 0.0 ? -tau * r / (s * s * s) : -std::numeric_limits<double>::infinity();
  if (r >= hi) {
    out.phi_glued = top;
    out.d1 = 0.0;
    out.d2 = 0.0;
    return out;
  }
  out.phi_glued = out.phi_cat + psi * (top - out.phi_cat);
  out.d1 = c1 * (1.0 - psi) + dpsi * (top - out.phi_cat);
  out.d2 = c2 * (1.0 - psi) - 2.0 * dpsi * c1 + ddpsi * (top - out.phi_cat);
  return out;
}

double weight_rho_at(double r, const ConstructionParams& p) {
  const double m = p.m;
  const double target = p.rho_reading == RhoReading::TwoM ? 2.0 * m : 2.0 / m;
  return 1.0 / r + cutoff_psi(1.0 / m, 2.0 / m, r) * (target - 1.0 / r);
}

const char* region_name(Region r) {
  switch (r) {
    case Region::S0: return "S0";
    case Region::S1Upper: return "S1-upper";
    case Region::S1Lower: return "S1-lower";
    case Region::LambdaUpper: return "Lambda-upper";
    case Region::LambdaLower: return "Lambda-lower";
  }
  return "?";
}

bool regions_admissible(const ConstructionParams& p, double b, double x, double y) {
  return b > 0.0 && x >= 0.0 && y >= 0.0 && b + std::max(x, y) < p.a_bar / 3.0;
}

RegionLabel region_label(double t_under, const ConstructionParams& p, double b, double x, double y) {
  RegionLabel l;
  const double t = std::abs(t_under);
  const bool upper = t_under >= 0.0;
  l.x_under = t - b - x;
  l.x_over = p.a_bar - b - y - t;
  l.x_min = std::min(l.x_under, l.x_over);
  if (t <= b + x) l.region = Region::S0;
  else if (t >= p.a_bar - b - x) l.region = upper ? Region::S1Upper : Region::S1Lower;
  else l.region = upper ? Region::LambdaUpper : Region::LambdaLower;
  return l;
}

NeckLengths neck_lengths(const ConstructionParams& p, double b, double x, double y) {
  NeckLengths n;
  n.ell_under = p.a_bar - 2.0 * b - x - y;
  n.ell = p.a - (2.0 * b + x + y) * p.a / p.a_bar;
  n.eellm_residual = n.ell + 2.0 * b + p.zeta - p.m * static_cast<double>(p.m) / (4.0 * kPi);
  n.eellm_ok = std::abs(n.eellm_residual) < 10.0;
  return n;
}

int SurfaceMesh::vid(int ring, int i) const {
  const int n = n_theta;
  return ring * n + ((i % n) + n) % n;
}

namespace {

double ring_offset(int ring) { return (ring % 2) * 0.5; }

// Radius where the ray at angle theta leaves the square of half side d.
double square_exit(double d, double theta) {
  return d / std::max(std::abs(std::cos(theta)), std::abs(std::sin(theta)));
}

// Superellipse of exponent p inscribed in that square; p = inf gives the square.
double rounded_exit(double d, double theta, double p) {
  const double c = std::abs(std::cos(theta)), s = std::abs(std::sin(theta));
  const double hi = std::max(c, s), lo = std::min(c, s);
  if (!std::isfinite(p)) return d / hi;
  return d / (hi * std::pow(1.0 + std::pow(lo / hi, p), 1.0 / p));
}

// Sheet ring radius. Rings are equally spaced in
// s = log(r m) + boost log2 Psi(2 r m - 3), which packs extra rings where the
// glued profile bends, and interior rings follow rounded squares.
double sheet_ring_radius(const ConstructionParams& p, int j, double theta) {
  const double m = p.m;
  const double frac = static_cast<double>(j) / p.n_square;
  const double pe = j == p.n_square ? std::numeric_limits<double>::infinity()
                                    : 2.0 + p.corner_round / (1.0 - frac);
  const double top = std::log(rounded_exit(p.d, theta, pe) * m);
  const double boost = p.band_boost * std::log(2.0);
  auto s_of = [&](double u) { return u + boost * profile_Psi(2.0 * std::exp(u) - 3.0); };
  auto ds_of = [&](double u) { return 1.0 + boost * profile_Psi_d1(2.0 * std::exp(u) - 3.0) * 2.0 * std::exp(u); };
  const double target = frac * s_of(top);
  double lo = 0.0, hi = top, u = frac * top;
  for (int it = 0; it < 100; ++it) {
    const double f = s_of(u) - target;
    if (std::abs(f) < 1e-15) break;
    if (f > 0) hi = u;
    else lo = u;
    double next = u - f / ds_of(u);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
  }
  return std::exp(u) / m;
}

}  // namespace

DomainPoint SurfaceMesh::chart_point(int v) const {
  const VertexInfo& vi = info[v];
  const ConstructionParams& p = params;
  if (vi.chart == ChartKind::Catenoid) {
    const double ch = p.tau * std::cosh(vi.t);
    return {ch * std::cos(vi.theta), ch * std::sin(vi.theta), p.tau * vi.t};
  }
  return mesh.dom[v];
}

int expected_vertex_count(const ConstructionParams& p) {
  return p.n_theta * (2 * (p.n_axial + p.n_square) + 1);
}

SurfaceMesh build_mesh(const ConstructionParams& p) {
  SurfaceMesh s;
  s.params = p;
  const int n = p.n_theta;
  s.n_theta = n;
  s.n_axial = p.n_axial;
  s.n_square = p.n_square;
  const int half = p.n_axial + p.n_square;
  s.rings = 2 * half + 1;
  s.waist_ring = half;
  // Across the waist the circumference is 2 pi tau; require enough samples.
  if (n < 8) throw ConstructionError("fewer than 8 vertices across the waist");
  if (p.n_axial < 2 || p.n_square < 1) throw ConstructionError("resolution too coarse");

  const double m = p.m;
  const double r_in = 1.0 / m;
  const int nv = n * s.rings;
  s.info.resize(nv);
  s.mesh.X.resize(nv);
  s.mesh.dom.resize(nv);
  s.mesh.vface.assign(nv, 0);

  for (int k = 0; k < s.rings; ++k) {
    const int sidx = k - half;
    const int sign = sidx >= 0 ? 1 : -1;
    const int j_abs = std::abs(sidx);
    for (int i = 0; i < n; ++i) {
      const int v = k * n + i;
      VertexInfo& vi = s.info[v];
      vi.ring = k;
      vi.idx = i;
      vi.sheet = sign;
      const double theta = 2.0 * kPi * (i + ring_offset(k)) / n;
      vi.theta = theta;
      DomainPoint q;
      if (j_abs <= p.n_axial) {
        vi.chart = ChartKind::Catenoid;
        vi.t = sign * p.a * static_cast<double>(j_abs) / p.n_axial;
        vi.r = p.tau * std::cosh(vi.t);
        q = {vi.r * std::cos(theta), vi.r * std::sin(theta), p.tau * vi.t};
      } else {
        vi.chart = ChartKind::Sheet;
        const int j = j_abs - p.n_axial;
        const double R = square_exit(p.d, theta);
        const bool outer = (j == p.n_square);
        vi.r = outer ? R : sheet_ring_radius(p, j, theta);
        double x = vi.r * std::cos(theta), y = vi.r * std::sin(theta);
        if (outer) {
          const double c = std::cos(theta), sn = std::sin(theta);
          const bool corner = (8 * i) % n == 0 && ((8 * i) / n) % 2 == 1;
          std::uint8_t bits = 0;
          if (corner || std::abs(c) > std::abs(sn)) {
            x = c > 0 ? p.d : -p.d;
            bits |= c > 0 ? FaceXPlus : FaceXMinus;
          }
          if (corner || std::abs(sn) > std::abs(c)) {
            y = sn > 0 ? p.d : -p.d;
            bits |= sn > 0 ? FaceYPlus : FaceYMinus;
          }
          s.mesh.vface[v] = bits;
          vi.r = std::hypot(x, y);
        }
        vi.t = sign * std::acosh(vi.r / p.tau);
        q = {x, y, sign * profile_phi(vi.r, p).phi_glued};
      }
      vi.t_under = vi.t * p.a_bar / p.a;
      vi.rho = weight_rho_at(vi.r, p);
      vi.w = cutoff_psi(1.0 / m, 2.0 / m, vi.r);
      vi.label = region_label(vi.t_under, p, p.b);
      s.mesh.dom[v] = q;
      s.mesh.X[v] = phi_map(q);
    }
  }

  // Seam: the outermost catenoid rings against the sheet chart at r = 1/m.
  for (int sign : {-1, 1}) {
    const int k = half + sign * p.n_axial;
    for (int i = 0; i < n; ++i) {
      const int v = k * n + i;
      const double th = s.info[v].theta;
      const DomainPoint q{r_in * std::cos(th), r_in * std::sin(th), sign * profile_phi(r_in, p).phi_glued};
      s.seam_error = std::max(s.seam_error, norm(phi_map(q) - s.mesh.X[v]));
    }
  }

  // Triangles: staggered strips, counter-clockwise in (ring, theta).
  auto pos = [&](int k, int i) { return static_cast<double>(i) + ring_offset(k); };
  for (int k = 0; k + 1 < s.rings; ++k) {
    for (int i = 0; i < n; ++i) {
      std::array<std::array<int, 2>, 6> c;  // (ring, unwrapped index)
      if (k % 2 == 0) {
        c = {{{k, i}, {k, i + 1}, {k + 1, i}, {k + 1, i}, {k, i + 1}, {k + 1, i + 1}}};
      } else {
        c = {{{k, i}, {k, i + 1}, {k + 1, i + 1}, {k + 1, i}, {k, i}, {k + 1, i + 1}}};
      }
      for (int t = 0; t < 2; ++t) {
        auto A = c[3 * t], B = c[3 * t + 1], C = c[3 * t + 2];
        const double area = (B[0] - A[0]) * (pos(C[0], C[1]) - pos(A[0], A[1])) -
                            (pos(B[0], B[1]) - pos(A[0], A[1])) * (C[0] - A[0]);
        if (area < 0) std::swap(B, C);
        s.mesh.tri.push_back({s.vid(A[0], A[1]), s.vid(B[0], B[1]), s.vid(C[0], C[1])});
      }
    }
  }

  // Boundary edges on the outer rings.
  const int ntri_per_strip = 2 * n;
  for (int k : {0, s.rings - 1}) {
    for (int i = 0; i < n; ++i) {
      const int a = s.vid(k, i), b = s.vid(k, i + 1);
      const double mid = 2.0 * kPi * (i + 0.5) / n;
      const double c = std::cos(mid), sn = std::sin(mid);
      std::uint8_t face;
      if (std::abs(c) >= std::abs(sn)) face = c > 0 ? FaceXPlus : FaceXMinus;
      else face = sn > 0 ? FaceYPlus : FaceYMinus;
      const int strip = (k == 0) ? 0 : s.rings - 2;
      int owner = -1;
      for (int t = strip * ntri_per_strip; t < (strip + 1) * ntri_per_strip; ++t) {
        const auto& tr = s.mesh.tri[t];
        const bool ha = tr[0] == a || tr[1] == a || tr[2] == a;
        const bool hb = tr[0] == b || tr[1] == b || tr[2] == b;
        if (ha && hb) {
          owner = t;
          break;
        }
      }
      s.mesh.boundary.push_back({a, b, owner, face});
    }
  }

  AffineSym rx_plus{false, -1, 1, 2.0 * p.d, 0.0};
  AffineSym rx_minus{false, -1, 1, -2.0 * p.d, 0.0};
  AffineSym ry_plus{false, 1, -1, 0.0, 2.0 * p.d};
  AffineSym ry_minus{false, 1, -1, 0.0, -2.0 * p.d};
  s.mesh.mirror = {rx_plus.matrix(), rx_minus.matrix(), ry_plus.matrix(), ry_minus.matrix()};

  // Symmetry generators by index arithmetic on half-step positions P = 2i + offset.
  const int K = s.rings - 1;
  auto perm_from = [&](auto fn) {
    std::vector<int> g(nv);
    for (int k = 0; k < s.rings; ++k)
      for (int i = 0; i < n; ++i) {
        const int P = 2 * i + (k % 2);
        auto [k2, P2] = fn(k, P);
        P2 = ((P2 % (2 * n)) + 2 * n) % (2 * n);
        g[k * n + i] = k2 * n + (P2 - (k2 % 2)) / 2;
      }
    return g;
  };
  const auto gy = perm_from([&](int k, int P) { return std::pair<int, int>{k, -P}; });
  const auto gx = perm_from([&](int k, int P) { return std::pair<int, int>{k, n - P}; });
  const auto gz = perm_from([&](int k, int P) { return std::pair<int, int>{K - k, n / 2 - P}; });
  s.mesh.group = close_group({gx, gy, gz});

  s.mesh.build_incidence();
  const WeightReport wr = field_weights(s, p.gamma);
  for (int v = 0; v < nv; ++v) s.info[v].f_tilde = wr.f_tilde[v];
  return s;
}

WeightReport field_weights(const SurfaceMesh& s, double gamma) {
  const ConstructionParams& p = s.params;
  WeightReport w;
  const int nv = static_cast<int>(s.info.size());
  w.f_tilde.resize(nv);
  w.chi_factor.resize(nv);
  w.min_f = std::numeric_limits<double>::infinity();
  w.max_rho_f = 0.0;
  const double f0 = std::exp(-gamma * (p.a_bar - 2.0 * p.b));
  for (int v = 0; v < nv; ++v) {
    const VertexInfo& vi = s.info[v];
    double f = 1.0;
    switch (vi.label.region) {
      case Region::S0: f = f0; break;
      case Region::S1Upper:
      case Region::S1Lower: f = 1.0; break;
      default: f = std::exp(-gamma * vi.label.x_over); break;
    }
    w.f_tilde[v] = f;
    w.chi_factor[v] = vi.rho * vi.rho;
    w.min_f = std::min(w.min_f, f);
    w.max_rho_f = std::max(w.max_rho_f, vi.rho * f);
  }
  w.lower_bound = std::pow(p.tau_bar, 8.0 * gamma / 9.0 + 1.0 / 9.0);
  w.upper_bound = std::pow(p.tau_bar, 8.0 * gamma / 9.0 - 1.0);
  w.lower_ok = w.min_f >= w.lower_bound;
  w.upper_ok = w.max_rho_f <= w.upper_bound;
  return w;
}

ModelMaps model_maps(const SurfaceMesh& s, double x) {
  const ConstructionParams& p = s.params;
  ModelMaps mm;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const int nv = static_cast<int>(s.info.size());
  mm.varpi.assign(nv, {nan, nan});
  mm.gauss.assign(nv, {nan, nan, nan});
  const double k = p.m / kSqrt2;
  for (int v = 0; v < nv; ++v) {
    const VertexInfo& vi = s.info[v];
    const DomainPoint& q = s.mesh.dom[v];
    if (vi.chart == ChartKind::Sheet) {
      mm.varpi[v] = {k * q.x, k * q.y};
    } else {
      const double ch = std::cosh(vi.t);
      mm.gauss[v] = {-std::cos(vi.theta) / ch, -std::sin(vi.theta) / ch, std::sinh(vi.t) / ch};
    }
  }
  const double arg = (p.b + x) * p.a / p.a_bar;
  mm.R_check = 1.0 / std::cosh(arg);
  mm.R_tilde = k * p.tau * std::cosh(p.a - arg);
  mm.R_tilde_model = std::exp(-arg) / kSqrt2;
  return mm;
}

void write_obj(const TriMesh& m, const std::string& path, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# stereographic projection of S^3 from the pole -e2 = (0,0,-1,0): "
         "(v0, v1, v3) / (1 + v2)\n";
  if (!comment.empty()) out << "# " << comment << "\n";
  out.precision(12);
  for (const Vec4& v : m.X) {
    const double den = 1.0 + v[2];
    out << "v " << v[0] / den << " " << v[1] / den << " " << v[3] / den << "\n";
  }
  for (const auto& t : m.tri) out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

void write_mesh_csv(const SurfaceMesh& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << "id,v0,v1,v2,v3,region,t_under,rho,f_tilde\n";
  for (int v = 0; v < static_cast<int>(s.info.size()); ++v) {
    const Vec4& X = s.mesh.X[v];
    const VertexInfo& vi = s.info[v];
    out << v << "," << X[0] << "," << X[1] << "," << X[2] << "," << X[3] << "," << region_name(vi.label.region) << ","
        << vi.t_under << "," << vi.rho << "," << vi.f_tilde << "\n";
  }
}

std::string construction_summary_json(const SurfaceMesh& s, int indent) {
  const ConstructionParams& p = s.params;
  nlohmann::json j;
  j["m"] = p.m;
  j["zeta"] = p.zeta;
  j["b"] = p.b;
  j["gamma"] = p.gamma;
  j["tau_bar"] = p.tau_bar;
  j["tau"] = p.tau;
  j["a"] = p.a;
  j["a_bar"] = p.a_bar;
  j["ea_residual"] = p.ea_residual;
  j["ea_ok"] = p.ea_ok;
  j["rho_reading"] = p.rho_reading == RhoReading::TwoM ? "2m" : "2/m";
  j["resolution"] = {{"n_theta", p.n_theta}, {"n_axial", p.n_axial}, {"n_square", p.n_square}};
  j["vertices"] = s.mesh.num_vertices();
  j["triangles"] = s.mesh.tri.size();
  j["seam_error"] = s.seam_error;
  const NeckLengths nl = neck_lengths(p, p.b);
  j["neck"] = {{"ell_under", nl.ell_under}, {"ell", nl.ell}, {"eellm_residual", nl.eellm_residual},
               {"eellm_ok", nl.eellm_ok}};
  const WeightReport w = field_weights(s, p.gamma);
  j["weights"] = {{"min_f", w.min_f},         {"max_rho_f", w.max_rho_f}, {"lower_bound", w.lower_bound},
                  {"upper_bound", w.upper_bound}, {"lower_ok", w.lower_ok},   {"upper_ok", w.upper_ok}};
  return j.dump(indent);
}

}  // namespace dcg
