#include "dcg/ambient.hpp"

#include <cmath>

namespace dcg {

namespace {

constexpr double kQuarterPi = kPi / 4.0;

// cos(a) - cos(b) and sin(a) - sin(b) via sum-to-product, given a - b directly.
double cos_diff(double a, double b, double amb) { return -2.0 * std::sin(0.5 * (a + b)) * std::sin(0.5 * amb); }
double sin_diff(double a, double b, double amb) { return 2.0 * std::cos(0.5 * (a + b)) * std::sin(0.5 * amb); }

std::array<double, 4> block(double c, int s) {
  const double a = kSqrt2 * c;
  const double co = std::cos(a), si = std::sin(a);
  // R(a) * diag(1, s)
  return {co, -si * s, si, co * s};
}

}  // namespace

void require_domain(const DomainPoint& p) {
  if (!(std::abs(p.z) < kQuarterPi)) throw DomainError("domain point requires |z| < pi/4");
}

Vec4 phi_map(const DomainPoint& p) {
  require_domain(p);
  const double c = std::cos(p.z + kQuarterPi), s = std::sin(p.z + kQuarterPi);
  const double ay = kSqrt2 * p.y, ax = kSqrt2 * p.x;
  return Vec4(c * std::cos(ay), c * std::sin(ay), s * std::cos(ax), s * std::sin(ax));
}

Vec4 phi_diff(const DomainPoint& p, const DomainPoint& q) {
  const double Zp = p.z + kQuarterPi, Zq = q.z + kQuarterPi, dZ = q.z - p.z;
  const double yp = kSqrt2 * p.y, yq = kSqrt2 * q.y, dy = kSqrt2 * (q.y - p.y);
  const double xp = kSqrt2 * p.x, xq = kSqrt2 * q.x, dx = kSqrt2 * (q.x - p.x);
  const double cp = std::cos(Zp), sp = std::sin(Zp);
  const double dc = cos_diff(Zq, Zp, dZ), ds = sin_diff(Zq, Zp, dZ);
  const double cyq = std::cos(yq), syq = std::sin(yq), cxq = std::cos(xq), sxq = std::sin(xq);
  return Vec4(dc * cyq + cp * cos_diff(yq, yp, dy), dc * syq + cp * sin_diff(yq, yp, dy),
              ds * cxq + sp * cos_diff(xq, xp, dx), ds * sxq + sp * sin_diff(xq, xp, dx));
}

Frame coordinate_frame(const DomainPoint& p) {
  require_domain(p);
  const double c = std::cos(p.z + kQuarterPi), s = std::sin(p.z + kQuarterPi);
  const double ay = kSqrt2 * p.y, ax = kSqrt2 * p.x;
  Frame f;
  f.dx = Vec4(0.0, 0.0, -kSqrt2 * s * std::sin(ax), kSqrt2 * s * std::cos(ax));
  f.dy = Vec4(-kSqrt2 * c * std::sin(ay), kSqrt2 * c * std::cos(ay), 0.0, 0.0);
  f.dz = Vec4(-s * std::cos(ay), -s * std::sin(ay), c * std::cos(ax), c * std::sin(ax));
  return f;
}

double AmbientMetric::gamma(int k, int i, int j) const {
  if (i > j) std::swap(i, j);
  if (k == 0 && i == 0 && j == 2) return G1_13;
  if (k == 1 && i == 1 && j == 2) return G2_23;
  if (k == 2 && i == 0 && j == 0) return G3_11;
  if (k == 2 && i == 1 && j == 1) return G3_22;
  return 0.0;
}

AmbientMetric ambient_metric(double z) {
  if (!(std::abs(z) < kQuarterPi)) throw DomainError("metric degenerates at |z| >= pi/4");
  const double s2 = std::sin(2.0 * z), c2 = std::cos(2.0 * z);
  AmbientMetric m;
  m.g = {1.0 + s2, 1.0 - s2, 1.0};
  m.G1_13 = c2 / (1.0 + s2);
  m.G2_23 = -c2 / (1.0 - s2);
  m.G3_11 = -c2;
  m.G3_22 = c2;
  m.det = c2;
  return m;
}

Vec4 killing_ambient(const Vec4& v) { return Vec4(-v[2], 0.0, v[0], 0.0); }

std::array<double, 3> killing_coords(const DomainPoint& p) {
  require_domain(p);
  const double Z = p.z + kQuarterPi;
  const double ax = kSqrt2 * p.x, ay = kSqrt2 * p.y;
  const double cot = std::cos(Z) / std::sin(Z), tan = std::sin(Z) / std::cos(Z);
  return {-cot * std::sin(ax) * std::cos(ay) / kSqrt2, tan * std::cos(ax) * std::sin(ay) / kSqrt2,
          std::cos(ax) * std::cos(ay)};
}

Vec4 killing_pushforward(const DomainPoint& p) {
  const auto k = killing_coords(p);
  const Frame f = coordinate_frame(p);
  return f.dx * k[0] + f.dy * k[1] + f.dz * k[2];
}

DomainPoint AffineSym::apply(const DomainPoint& p) const {
  if (!swap) return {sx * p.x + cx, sy * p.y + cy, p.z};
  return {sx * p.y + cx, sy * p.x + cy, -p.z};
}

std::array<double, 16> AffineSym::matrix() const {
  std::array<double, 16> m{};
  const auto b1 = block(cy, sy);  // acts on z1 slot of the image
  const auto b2 = block(cx, sx);  // acts on z2 slot of the image
  // Source columns for the two image slots.
  const int src1 = swap ? 2 : 0;
  const int src2 = swap ? 0 : 2;
  m[0 * 4 + src1] = b1[0];
  m[0 * 4 + src1 + 1] = b1[1];
  m[1 * 4 + src1] = b1[2];
  m[1 * 4 + src1 + 1] = b1[3];
  m[2 * 4 + src2] = b2[0];
  m[2 * 4 + src2 + 1] = b2[1];
  m[3 * 4 + src2] = b2[2];
  m[3 * 4 + src2 + 1] = b2[3];
  return m;
}

Vec4 apply_matrix(const std::array<double, 16>& m, const Vec4& v) {
  Vec4 r;
  for (int i = 0; i < 4; ++i)
    r[i] = m[i * 4 + 0] * v[0] + m[i * 4 + 1] * v[1] + m[i * 4 + 2] * v[2] + m[i * 4 + 3] * v[3];
  return r;
}

Vec4 AffineSym::apply(const Vec4& v) const { return apply_matrix(matrix(), v); }

AffineSym AffineSym::compose(const AffineSym& o) const {
  auto lin = [](const AffineSym& s) {
    std::array<int, 4> M{};
    if (!s.swap) M = {s.sx, 0, 0, s.sy};
    else M = {0, s.sx, s.sy, 0};
    return M;
  };
  const auto A = lin(*this), B = lin(o);
  const std::array<int, 4> P = {A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3], A[2] * B[0] + A[3] * B[2],
                                A[2] * B[1] + A[3] * B[3]};
  AffineSym r;
  r.swap = (P[0] == 0);
  r.sx = r.swap ? P[1] : P[0];
  r.sy = r.swap ? P[2] : P[3];
  r.cx = A[0] * o.cx + A[1] * o.cy + cx;
  r.cy = A[2] * o.cx + A[3] * o.cy + cy;
  return r;
}

AffineSym SymmetryElement::affine() const {
  AffineSym a;
  switch (kind) {
    case SymKind::TranslateX: a.cx = c; break;
    case SymKind::TranslateY: a.cy = c; break;
    case SymKind::ReflectX: a.sx = -1; a.cx = 2.0 * c; break;
    case SymKind::ReflectY: a.sy = -1; a.cy = 2.0 * c; break;
    case SymKind::ReflectZ: a.swap = true; break;
  }
  return a;
}

Vec4 geodesic_exp(const Vec4& p, const Vec4& v) {
  const double n = norm(v);
  if (n == 0.0) return p;
  return p * std::cos(n) + v * (std::sin(n) / n);
}

}  // namespace dcg
