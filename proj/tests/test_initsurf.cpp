#include <cmath>
#include <map>
#include <random>

#include "dcg/initsurf.hpp"
#include "doctest.h"

using namespace dcg;

namespace {

// Independent long-double evaluation of the scale and bridge length.
struct ScaleOracle {
  long double tau_bar, a;
};

ScaleOracle scale_oracle(int m, long double zeta) {
  const long double pi = 3.141592653589793238462643383279502884L;
  ScaleOracle o;
  o.tau_bar = std::exp(-(long double)m * m / (4 * pi)) / m;
  const long double tau = std::exp(zeta) * o.tau_bar;
  long double lo = 0, hi = 60;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (tau * std::cosh(mid) < 1.0L / m) lo = mid;
    else hi = mid;
  }
  o.a = 0.5L * (lo + hi);
  return o;
}

ConstructionParams params(int m, double zeta = 0.0, int n_theta = 32) {
  Resolution r;
  r.n_theta = n_theta;
  return derive_params(m, zeta, 0.0, 0.5, r);
}

}  // namespace

TEST_CASE("cutoff function") {
  CHECK(cutoff_psi(0, 1, 0) == 0.0);
  CHECK(cutoff_psi(0, 1, 1) == 1.0);
  CHECK(cutoff_psi(0, 1, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  // Flat near both ends.
  CHECK(cutoff_psi(0, 1, 0.3) == 0.0);
  CHECK(cutoff_psi(0, 1, 0.7) == 1.0);
  CHECK_THROWS(cutoff_psi(1, 1, 0.5));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int k = 0; k < 1000; ++k) {
    const double s = u(rng);
    CHECK(std::abs(cutoff_psi(0, 1, s) + cutoff_psi(1, 0, s) - 1.0) < 1e-15);
  }
  double prev = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double v = cutoff_psi(0, 1, k / 1000.0);
    CHECK(v >= prev);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
  // Derivatives against central differences.
  const double h = 1e-6;
  for (double s : {0.34, 0.41, 0.5, 0.6, 0.66}) {
    const double d1 = (cutoff_psi(0.2, 0.9, s + h) - cutoff_psi(0.2, 0.9, s - h)) / (2 * h);
    const double d2 = (cutoff_psi_d1(0.2, 0.9, s + h) - cutoff_psi_d1(0.2, 0.9, s - h)) / (2 * h);
    CHECK(cutoff_psi_d1(0.2, 0.9, s) == doctest::Approx(d1).epsilon(1e-7));
    CHECK(cutoff_psi_d2(0.2, 0.9, s) == doctest::Approx(d2).epsilon(1e-6));
  }
}

TEST_CASE("derived scales") {
  const ConstructionParams p4 = params(4);
  const ScaleOracle o4 = scale_oracle(4, 0);
  // Frozen from a 30-digit evaluation.
  CHECK(p4.tau_bar == doctest::Approx(0.0699808318003476313667).epsilon(1e-14));
  CHECK(p4.a == doctest::Approx(1.94619542586015673617).epsilon(1e-14));
  CHECK(p4.ea_residual == doctest::Approx(-0.0201912994349512594).epsilon(1e-11));
  CHECK(std::abs(p4.a - (double)o4.a) < 1e-14 * p4.a);
  CHECK(std::abs(p4.tau_bar - (double)o4.tau_bar) < 1e-15);
  CHECK(p4.ea_ok);
  CHECK(p4.a == p4.a_bar);

  const ConstructionParams p10 = params(10);
  CHECK(p10.tau_bar == doctest::Approx(3.49940592152533580913e-5).epsilon(1e-14));
  CHECK(p10.a == doctest::Approx(8.65089430454010618296).epsilon(1e-14));

  const ConstructionParams q = params(6, -0.7);
  const ScaleOracle oq = scale_oracle(6, -0.7L);
  CHECK(q.tau == doctest::Approx(std::exp(-0.7) * q.tau_bar).epsilon(1e-15));
  CHECK(std::abs(q.a - (double)oq.a) < 1e-14 * q.a);
  CHECK(q.a_bar == doctest::Approx(3.55712305314917893927).epsilon(1e-14));

  CHECK_THROWS_AS(params(3, 1.0), ConstructionError);
  CHECK_THROWS_AS(params(6, 11.0), ConstructionError);
  CHECK_THROWS_AS(params(2), ConstructionError);
  Resolution bad;
  bad.n_theta = 12;
  CHECK_THROWS_AS(derive_params(6, 0, 0, 0.5, bad), ConstructionError);
}

TEST_CASE("scale identities over the desk range") {
  for (int m = 4; m <= 16; ++m)
    for (double zeta : {-1.0, 0.0, 1.0}) {
      const ConstructionParams p = params(m, zeta);
      const NeckLengths nl = neck_lengths(p, p.b);
      CHECK(nl.eellm_ok);
      // The logarithmic identity holds up to the cosh correction (m tau)^2 / 4.
      const double mt = m * p.tau;
      CHECK(std::abs(p.ea_residual + mt * mt / 4) < mt * mt * mt * mt / 4 + 1e-14);
      if (m >= 6) CHECK(p.ea_ok);
    }
  // Known exceptions at the small end.
  CHECK_FALSE(params(4, 1.0).ea_ok);
  CHECK_FALSE(params(5, 1.0).ea_ok);
}

TEST_CASE("profile") {
  const ConstructionParams p = params(6);
  const double m = p.m;
  CHECK(profile_phi(p.tau, p).phi_cat == 0.0);
  CHECK(profile_phi(1 / m, p).phi_glued == doctest::Approx(p.tau * p.a).epsilon(1e-14));
  CHECK(profile_phi(1 / m, p).phi_cat == doctest::Approx(p.tau * p.a).epsilon(1e-14));
  CHECK(profile_phi(2 / m, p).phi_glued == p.tau * p.a);
  CHECK(profile_phi(3 / m, p).phi_glued == p.tau * p.a);
  CHECK_THROWS_AS(profile_phi(0.5 * p.tau, p), DomainError);
  // Closed form against arccosh.
  for (double r : {2 * p.tau, 0.01, 0.1}) CHECK(profile_phi(r, p).phi_cat == doctest::Approx(p.tau * std::acosh(r / p.tau)).epsilon(1e-13));

  const double h = 1e-7;
  for (double r : {0.05, 0.12, 1.2 / m, 1.5 / m, 1.9 / m}) {
    const Profile c = profile_phi(r, p);
    const double d1 = (profile_phi(r + h, p).phi_glued - profile_phi(r - h, p).phi_glued) / (2 * h);
    const double d2 = (profile_phi(r + h, p).d1 - profile_phi(r - h, p).d1) / (2 * h);
    CHECK(c.d1 == doctest::Approx(d1).epsilon(1e-6));
    CHECK(c.d2 == doctest::Approx(d2).epsilon(1e-5));
  }
}

TEST_CASE("profile shape on the sheet") {
  for (int m : {4, 6, 10, 14}) {
    const ConstructionParams p = params(m);
    const double top = p.tau * p.a;
    const double rmax = kPi / (kSqrt2 * m);
    double prev = -1.0;
    double overshoot = 0.0;
    for (int k = 0; k <= 10000; ++k) {
      const double r = p.tau + (rmax - p.tau) * k / 10000.0;
      const double v = profile_phi(r, p).phi_glued;
      if (r <= 1.0 / m) {
        CHECK(v >= prev);
        prev = v;
      } else {
        CHECK(v >= top - 1e-15 * top);
        overshoot = std::max(overshoot, v - top);
      }
      if (r >= 2.0 / m) CHECK(v == top);
    }
    // The glued profile rises above tau a between 1/m and 2/m.
    CHECK(overshoot > 0.0);
  }
}

TEST_CASE("weight rho") {
  const ConstructionParams p = params(6);
  const double m = p.m;
  CHECK(weight_rho_at(p.tau, p) == doctest::Approx(1 / p.tau).epsilon(1e-15));
  CHECK(weight_rho_at(1 / (2 * m), p) == doctest::Approx(2 * m).epsilon(1e-15));
  CHECK(weight_rho_at(2 / m, p) == doctest::Approx(2 * m).epsilon(1e-15));
  CHECK(weight_rho_at(3 / m, p) == doctest::Approx(2 * m).epsilon(1e-15));
  ConstructionParams q = p;
  q.rho_reading = RhoReading::TwoOverM;
  CHECK(weight_rho_at(3 / m, q) == doctest::Approx(2 / m).epsilon(1e-15));
}

TEST_CASE("rho varies boundedly over unit chi balls") {
  std::vector<double> worst;
  for (int m : {6, 10, 14, 18}) {
    const ConstructionParams p = params(m);
    // Radial chi-arclength from the waist out to the cell side.
    const int n = 200000;
    const double lo = std::log(p.tau), hi = std::log(kPi / (kSqrt2 * m));
    std::vector<double> s(n + 1), rho(n + 1);
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double r = std::exp(lo + (hi - lo) * k / n);
      rho[k] = weight_rho_at(r, p);
      const double slope = r >= p.tau * 1.0000001 ? profile_phi(r, p).d1 : 0.0;
      if (k > 0) {
        const double r0 = std::exp(lo + (hi - lo) * (k - 1) / n);
        acc += 0.5 * (rho[k] + rho[k - 1]) * (r - r0) * std::sqrt(1 + std::min(slope * slope, 1e12));
      }
      s[k] = acc;
    }
    double w = 1.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) {
      while (j < static_cast<std::size_t>(n) && s[j + 1] - s[i] <= 1.0) ++j;
      for (std::size_t k = i; k <= j; k += 50) w = std::max(w, std::max(rho[k] / rho[i], rho[i] / rho[k]));
    }
    worst.push_back(w);
  }
  for (double w : worst) {
    CHECK(w < 4.0);
    CHECK(w > 1.5);
  }
}

TEST_CASE("regions and neck lengths") {
  const ConstructionParams p = params(6);
  CHECK(region_label(0.0, p, p.b).region == Region::S0);
  CHECK(region_label(p.a_bar, p, p.b).region == Region::S1Upper);
  CHECK(region_label(-p.a_bar, p, p.b).region == Region::S1Lower);
  CHECK(region_label(0.5 * p.a_bar, p, p.b).region == Region::LambdaUpper);
  CHECK(region_label(-0.5 * p.a_bar, p, p.b).region == Region::LambdaLower);
  const RegionLabel l = region_label(0.4 * p.a_bar, p, p.b, 0.1, 0.2);
  CHECK(l.x_under == doctest::Approx(0.4 * p.a_bar - p.b - 0.1));
  CHECK(l.x_over == doctest::Approx(0.6 * p.a_bar - p.b - 0.2));
  CHECK(l.x_min == std::min(l.x_under, l.x_over));
  CHECK(regions_admissible(p, p.b, 0, 0));
  CHECK_FALSE(regions_admissible(p, 5.0, 0, 0));

  Resolution r;
  const ConstructionParams p14 = derive_params(14, 0.0, 2.0, 0.5, r);
  const NeckLengths nl = neck_lengths(p14, 2.0);
  CHECK(nl.ell_under == doctest::Approx(p14.a_bar - 4).epsilon(1e-14));
  // ell + 4 - m^2/4pi = log 2 at zeta = 0 up to tau_bar.
  CHECK(nl.eellm_residual == doctest::Approx(0.693147180559938223).epsilon(1e-12));
  CHECK(nl.eellm_ok);
}

TEST_CASE("mesh structure") {
  const ConstructionParams p = params(6, 0.0, 32);
  const SurfaceMesh s = build_mesh(p);
  CHECK(s.mesh.num_vertices() == expected_vertex_count(p));
  CHECK(s.mesh.num_vertices() == 32 * (2 * (p.n_axial + p.n_square) + 1));
  CHECK(s.mesh.tri.size() == static_cast<std::size_t>(2 * 32 * (s.rings - 1)));
  CHECK(s.seam_error < 1e-10);

  for (const Vec4& X : s.mesh.X) CHECK(std::abs(norm(X) - 1.0) < 1e-12);

  // Watertight and consistently oriented.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : s.mesh.tri)
    for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
  int boundary = 0;
  for (const auto& [e, c] : directed) {
    CHECK(c == 1);
    if (!directed.count({e.second, e.first})) ++boundary;
  }
  CHECK(boundary == static_cast<int>(s.mesh.boundary.size()));
  CHECK(boundary == 2 * 32);
  for (const auto& be : s.mesh.boundary) {
    CHECK(be.tri >= 0);
    CHECK(be.face != 0);
    // Boundary vertices sit on their face.
    for (int v : {be.a, be.b}) {
      const DomainPoint& q = s.mesh.dom[v];
      CHECK(std::abs(std::max(std::abs(q.x), std::abs(q.y)) - p.d) < 1e-15);
    }
  }
  // Annulus topology of the cell.
  CHECK(euler_characteristic(s.mesh) == 0);

  // Upper sheet normal points up: ring order then angle gives the orientation.
  for (int k = 0; k < s.rings; ++k) CHECK(s.info[s.vid(k, 0)].sheet == (k >= s.waist_ring ? 1 : -1));
  CHECK_THROWS_AS(build_mesh(derive_params(6, 0, 0, 0.5, Resolution{8, 1, 1})), ConstructionError);
}

TEST_CASE("mesh symmetries") {
  const ConstructionParams p = params(6, 0.3, 32);
  const SurfaceMesh s = build_mesh(p);
  CHECK(s.mesh.group.size() == 8);
  const SymmetryElement gens[] = {{SymKind::ReflectX, 0.0}, {SymKind::ReflectY, 0.0}, {SymKind::ReflectZ, 0.0}};
  // Identify each generator permutation by its action on the vertex set.
  for (const auto& g : gens) {
    double worst = 1e300;
    for (const auto& perm : s.mesh.group) {
      double err = 0.0;
      for (int v = 0; v < s.mesh.num_vertices(); ++v)
        err = std::max(err, norm(s.mesh.X[perm[v]] - g.apply(s.mesh.X[v])));
      worst = std::min(worst, err);
    }
    CHECK(worst < 1e-10);
  }
  // Every group element is an ambient isometry of the vertex set.
  for (const auto& perm : s.mesh.group) {
    std::vector<int> seen(perm.size(), 0);
    for (int v : perm) ++seen[v];
    for (int c : seen) CHECK(c == 1);
  }
  // Catenoid reflect-z: (t, theta) -> (-t, pi/2 - theta).
  const SymmetryElement rz{SymKind::ReflectZ, 0.0};
  for (int v = 0; v < s.mesh.num_vertices(); ++v) {
    if (s.info[v].chart != ChartKind::Catenoid) continue;
    const DomainPoint q = rz.apply(s.chart_point(v));
    const double ch = p.tau * std::cosh(-s.info[v].t);
    const double th = kPi / 2 - s.info[v].theta;
    CHECK(std::abs(q.x - ch * std::cos(th)) < 1e-15);
    CHECK(std::abs(q.y - ch * std::sin(th)) < 1e-15);
  }
  // Orbits cover the vertex set.
  const Orbits o = compute_orbits(s.mesh.group, s.mesh.num_vertices());
  CHECK(o.count > s.mesh.num_vertices() / 8);
  CHECK(o.count < s.mesh.num_vertices() / 4);
}

TEST_CASE("face mirrors fix their faces") {
  const SurfaceMesh s = build_mesh(params(6));
  for (int v = 0; v < s.mesh.num_vertices(); ++v) {
    if (!s.mesh.vface[v]) continue;
    const auto P = s.mesh.mirror_average(v);
    CHECK(norm(apply_matrix(P, s.mesh.X[v]) - s.mesh.X[v]) < 1e-14);
  }
}

TEST_CASE("weights") {
  for (int m : {6, 10, 14}) {
    const SurfaceMesh s = build_mesh(params(m));
    const ConstructionParams& p = s.params;
    const WeightReport w = field_weights(s, 0.5);
    CHECK(w.lower_ok);
    CHECK(w.min_f >= std::pow(p.tau_bar, 8 * 0.5 / 9 + 1.0 / 9));
    for (int v = 0; v < s.mesh.num_vertices(); ++v) {
      const VertexInfo& vi = s.info[v];
      if (vi.label.region == Region::S1Upper || vi.label.region == Region::S1Lower) CHECK(w.f_tilde[v] == 1.0);
      if (vi.label.region == Region::S0) CHECK(w.f_tilde[v] == doctest::Approx(std::exp(-0.5 * (p.a_bar - 2 * p.b))));
      CHECK(w.chi_factor[v] == doctest::Approx(vi.rho * vi.rho));
    }
    // Continuity at the circle t_under = b.
    const RegionLabel at = region_label(p.b, p, p.b);
    CHECK(std::exp(-0.5 * at.x_over) == doctest::Approx(std::exp(-0.5 * (p.a_bar - 2 * p.b))).epsilon(1e-14));
  }
}

TEST_CASE("model maps") {
  const SurfaceMesh s = build_mesh(params(6));
  const ConstructionParams& p = s.params;
  const ModelMaps mm = model_maps(s);
  int corners = 0;
  for (int v = 0; v < s.mesh.num_vertices(); ++v) {
    const DomainPoint& q = s.mesh.dom[v];
    if (std::abs(q.x) == p.d && std::abs(q.y) == p.d) {
      ++corners;
      CHECK(std::abs(mm.varpi[v][0]) == doctest::Approx(kPi / 2).epsilon(1e-15));
      CHECK(std::abs(mm.varpi[v][1]) == doctest::Approx(kPi / 2).epsilon(1e-15));
    }
    if (s.info[v].chart == ChartKind::Catenoid) {
      const auto& n = mm.gauss[v];
      CHECK(n[0] * n[0] + n[1] * n[1] + n[2] * n[2] == doctest::Approx(1.0));
    } else {
      CHECK(std::abs(mm.varpi[v][0]) <= kPi / 2 + 1e-14);
    }
  }
  CHECK(corners == 8);
  CHECK(mm.R_check == doctest::Approx(1.0 / std::cosh(p.a * p.b / p.a_bar)));
  CHECK(std::abs(mm.R_tilde - std::exp(-p.a * p.b / p.a_bar) / kSqrt2) <= p.tau);
}
