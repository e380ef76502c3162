#include <cmath>
#include <random>

#include "dcg/ambient.hpp"
#include "doctest.h"

using namespace dcg;

namespace {

DomainPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0), w(-0.7, 0.7);
  return {u(rng), u(rng), w(rng)};
}

double metric_form(const DomainPoint& p, const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const AmbientMetric g = ambient_metric(p.z);
  return g.g[0] * a[0] * b[0] + g.g[1] * a[1] * b[1] + g.g[2] * a[2] * b[2];
}

}  // namespace

TEST_CASE("phi_map reference points") {
  const Vec4 o = phi_map({0, 0, 0});
  CHECK(o[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::abs(o[1]) < 1e-15);
  CHECK(o[2] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::abs(o[3]) < 1e-15);

  const Vec4 top = phi_map({0, 0, kPi / 4 - 1e-9});
  CHECK(norm(top - Vec4(0, 0, 1, 0)) < 1e-8);

  const Vec4 a = phi_map({kSqrt2 * kPi, 0, 0.1}), b = phi_map({0, 0, 0.1});
  CHECK(norm(a - b) < 1e-14);

  CHECK_THROWS_AS(phi_map({0, 0, kPi / 4}), DomainError);
  CHECK_THROWS_AS(phi_map({0, 0, -1.0}), DomainError);
}

TEST_CASE("phi_diff matches plain difference") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const DomainPoint p = random_point(rng), q = random_point(rng);
    CHECK(norm(phi_diff(p, q) - (phi_map(q) - phi_map(p))) < 1e-14);
  }
  // Tiny separations keep full relative precision.
  const double step = std::ldexp(1.0, -40);
  const DomainPoint p{0.25, 0.2, 0.1}, q{0.25 + step, 0.2, 0.1};
  const Frame f = coordinate_frame(p);
  CHECK(norm(phi_diff(p, q) / step - f.dx) < 1e-10);
}

TEST_CASE("metric at reference heights") {
  const AmbientMetric g0 = ambient_metric(0.0);
  CHECK(g0.g[0] == 1.0);
  CHECK(g0.g[1] == 1.0);
  CHECK(g0.g[2] == 1.0);
  CHECK(g0.G1_13 == 1.0);
  CHECK(g0.G2_23 == -1.0);
  CHECK(g0.G3_11 == -1.0);
  CHECK(g0.G3_22 == 1.0);
  CHECK(g0.det == 1.0);
  const AmbientMetric g1 = ambient_metric(kPi / 12);
  CHECK(g1.g[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(g1.g[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g1.g[2] == 1.0);
  // cos(pi/4), 30 digits.
  CHECK(ambient_metric(kPi / 8).det == doctest::Approx(0.707106781186547524400844362105).epsilon(1e-15));
  CHECK_THROWS_AS(ambient_metric(kPi / 4), DomainError);
}

TEST_CASE("frame is the Jacobian of phi_map") {
  std::mt19937_64 rng(2);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const DomainPoint p = random_point(rng);
    const Frame f = coordinate_frame(p);
    const Vec4 fx = (phi_map({p.x + h, p.y, p.z}) - phi_map({p.x - h, p.y, p.z})) / (2 * h);
    const Vec4 fy = (phi_map({p.x, p.y + h, p.z}) - phi_map({p.x, p.y - h, p.z})) / (2 * h);
    const Vec4 fz = (phi_map({p.x, p.y, p.z + h}) - phi_map({p.x, p.y, p.z - h})) / (2 * h);
    worst = std::max({worst, norm(fx - f.dx), norm(fy - f.dy), norm(fz - f.dz)});
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("pullback metric and frame determinant") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 500; ++k) {
    const DomainPoint p = random_point(rng);
    const Frame f = coordinate_frame(p);
    const AmbientMetric g = ambient_metric(p.z);
    const Vec4 X = phi_map(p);
    CHECK(std::abs(norm(X) - 1.0) < 1e-14);
    CHECK(std::abs(dot(f.dx, f.dx) - g.g[0]) < 1e-12);
    CHECK(std::abs(dot(f.dy, f.dy) - g.g[1]) < 1e-12);
    CHECK(std::abs(dot(f.dz, f.dz) - g.g[2]) < 1e-12);
    CHECK(std::abs(dot(f.dx, f.dy)) < 1e-12);
    CHECK(std::abs(dot(f.dx, f.dz)) < 1e-12);
    CHECK(std::abs(dot(f.dy, f.dz)) < 1e-12);
    CHECK(std::abs(dot(X, f.dx)) < 1e-12);
    CHECK(std::abs(dot(X, f.dz)) < 1e-12);
    CHECK(std::abs(det4(X, f.dx, f.dy, f.dz) - g.det) < 1e-12);
  }
}

TEST_CASE("Christoffel symbols from finite differences of the metric") {
  const double h = 1e-5;
  for (double z : {-0.6, -0.3, 0.0, 0.2, 0.5}) {
    const AmbientMetric g = ambient_metric(z);
    const AmbientMetric gp = ambient_metric(z + h), gm = ambient_metric(z - h);
    std::array<double, 3> dg;
    for (int i = 0; i < 3; ++i) dg[i] = (gp.g[i] - gm.g[i]) / (2 * h);
    // Metric depends on z (index 2) only.
    auto dmetric = [&](int k, int i, int j) { return (k == 2 && i == j) ? dg[i] : 0.0; };
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double fd = 0.5 / g.g[k] * (dmetric(i, j, k) + dmetric(j, i, k) - dmetric(k, i, j));
          CHECK(std::abs(fd - g.gamma(k, i, j)) < 1e-6);
        }
  }
}

TEST_CASE("Killing field forms") {
  const DomainPoint o{0, 0, 0};
  const Frame f0 = coordinate_frame(o);
  CHECK(norm(killing_ambient(phi_map(o)) - f0.dz) < 1e-15);
  const auto k0 = killing_coords(o);
  CHECK(metric_form(o, k0, k0) == doctest::Approx(1.0).epsilon(1e-15));

  const DomainPoint q{kPi / (2 * kSqrt2), 0, 0};
  const auto kq = killing_coords(q);
  CHECK(kq[0] == doctest::Approx(-1.0 / kSqrt2).epsilon(1e-14));
  CHECK(std::abs(kq[1]) < 1e-15);
  CHECK(std::abs(kq[2]) < 1e-15);

  std::mt19937_64 rng(4);
  for (int k = 0; k < 500; ++k) {
    const DomainPoint p = random_point(rng);
    CHECK(norm(killing_pushforward(p) - killing_ambient(phi_map(p))) < 1e-10);
  }
}

TEST_CASE("Killing flow preserves the pullback metric") {
  auto field = [](const DomainPoint& p) { return killing_coords(p); };
  auto flow = [&](DomainPoint p, double s) {
    const int steps = 4;
    const double h = s / steps;
    for (int n = 0; n < steps; ++n) {
      auto shift = [&](const DomainPoint& a, const std::array<double, 3>& k, double c) {
        return DomainPoint{a.x + c * k[0], a.y + c * k[1], a.z + c * k[2]};
      };
      const auto k1 = field(p);
      const auto k2 = field(shift(p, k1, h / 2));
      const auto k3 = field(shift(p, k2, h / 2));
      const auto k4 = field(shift(p, k3, h));
      p.x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
      p.y += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
      p.z += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
    }
    return p;
  };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> us(0.0, 1e-3);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    DomainPoint p = random_point(rng);
    p.z *= 0.8;
    const double s = us(rng);
    const DomainPoint F = flow(p, s);
    const double h = 1e-6;
    std::array<std::array<double, 3>, 3> J;  // J[c] = dF/dcoord_c
    for (int c = 0; c < 3; ++c) {
      DomainPoint a = p, b = p;
      (c == 0 ? a.x : c == 1 ? a.y : a.z) += h;
      (c == 0 ? b.x : c == 1 ? b.y : b.z) -= h;
      const DomainPoint Fa = flow(a, s), Fb = flow(b, s);
      J[c] = {(Fa.x - Fb.x) / (2 * h), (Fa.y - Fb.y) / (2 * h), (Fa.z - Fb.z) / (2 * h)};
    }
    const AmbientMetric g = ambient_metric(p.z);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double pulled = metric_form(F, J[i], J[j]);
        const double orig = i == j ? g.g[i] : 0.0;
        worst = std::max(worst, std::abs(pulled - orig));
      }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("symmetry elements") {
  const SymmetryElement rz{SymKind::ReflectZ, 0.0};
  const DomainPoint p = rz.apply(DomainPoint{0.3, 0.1, 0.05});
  CHECK(p.x == 0.1);
  CHECK(p.y == 0.3);
  CHECK(p.z == -0.05);
  const Vec4 v(0.1, 0.2, 0.3, 0.4);
  const Vec4 w = rz.apply(v);
  CHECK(norm(w - Vec4(0.3, 0.4, 0.1, 0.2)) < 1e-15);
  const DomainPoint pp = rz.apply(p);
  CHECK(pp.x == 0.3);
  CHECK(pp.z == 0.05);

  const SymmetryElement tx{SymKind::TranslateX, kSqrt2 * kPi};
  const SymmetryElement ty{SymKind::TranslateY, kSqrt2 * kPi};
  for (const auto& t : {tx, ty}) {
    const auto M = t.affine().matrix();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(std::abs(M[i * 4 + j] - (i == j ? 1.0 : 0.0)) < 1e-14);
  }

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> uc(-2.0, 2.0);
  const SymKind kinds[] = {SymKind::TranslateX, SymKind::TranslateY, SymKind::ReflectX, SymKind::ReflectY,
                           SymKind::ReflectZ};
  for (SymKind kind : kinds) {
    for (int n = 0; n < 20; ++n) {
      const SymmetryElement s{kind, uc(rng)};
      const DomainPoint a = random_point(rng), b = random_point(rng);
      CHECK(norm(phi_map(s.apply(a)) - s.apply(phi_map(a))) < 1e-12);
      CHECK(std::abs(dot(s.apply(phi_map(a)), s.apply(phi_map(b))) - dot(phi_map(a), phi_map(b))) < 1e-12);
    }
  }

  // Composition agrees with sequential application.
  for (int n = 0; n < 100; ++n) {
    const SymmetryElement s1{kinds[n % 5], uc(rng)}, s2{kinds[(n / 5) % 5], uc(rng)};
    const AffineSym c = s1.affine().compose(s2.affine());
    const DomainPoint a = random_point(rng);
    const DomainPoint seq = s1.apply(s2.apply(a)), one = c.apply(a);
    CHECK(std::abs(seq.x - one.x) < 1e-13);
    CHECK(std::abs(seq.y - one.y) < 1e-13);
    CHECK(std::abs(seq.z - one.z) < 1e-13);
    CHECK(norm(s1.apply(s2.apply(phi_map(a))) - c.apply(phi_map(a))) < 1e-12);
  }
}

TEST_CASE("great-circle exponential") {
  const Vec4 p(1, 0, 0, 0);
  CHECK(norm(geodesic_exp(p, Vec4(0, 0, 0, 0)) - p) == 0.0);
  const Vec4 v(0, kPi / 2, 0, 0);
  CHECK(norm(geodesic_exp(p, v) - Vec4(0, 1, 0, 0)) < 1e-15);

  // Arc length by Simpson quadrature of the curve speed.
  const Vec4 q = phi_map({0.2, -0.4, 0.3});
  const Frame f = coordinate_frame({0.2, -0.4, 0.3});
  const Vec4 u = f.dx * 0.7 + f.dz * 1.1;
  const double len = norm(u);
  const int n = 2000;
  double arc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / n, h = 1e-3;
    auto c = [&](double t) { return geodesic_exp(q, u * t); };
    const double sp = norm((c(s - 2 * h) - c(s + 2 * h)) + (c(s + h) - c(s - h)) * 8.0) / (12 * h);
    arc += sp * ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  arc /= 3.0 * n;
  CHECK(std::abs(arc - len) < 1e-10);
  CHECK(std::abs(norm(geodesic_exp(q, u)) - 1.0) < 1e-14);
}
