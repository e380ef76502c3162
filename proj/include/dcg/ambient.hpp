#pragma once

#include <array>
#include <stdexcept>

#include "dcg/vec4.hpp"

namespace dcg {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct DomainPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Throws DomainError unless |z| < pi/4.
void require_domain(const DomainPoint& p);

// R^4 layout is (Re z1, Im z1, Re z2, Im z2).
Vec4 phi_map(const DomainPoint& p);

// phi_map(q) - phi_map(p) without cancellation for nearby points.
Vec4 phi_diff(const DomainPoint& p, const DomainPoint& q);

struct Frame {
  Vec4 dx, dy, dz;
};

// Coordinate frame pushed to R^4.
Frame coordinate_frame(const DomainPoint& p);

struct AmbientMetric {
  std::array<double, 3> g{};  // diagonal entries
  // Nonzero Christoffel symbols (upper index first): G1_13 = G1_31, G2_23 = G2_32, G3_11, G3_22.
  double G1_13 = 0.0;
  double G2_23 = 0.0;
  double G3_11 = 0.0;
  double G3_22 = 0.0;
  double det = 0.0;  // det[Phi, Phi_x, Phi_y, Phi_z]
  // Full table gamma[k][i][j].
  double gamma(int k, int i, int j) const;
};

AmbientMetric ambient_metric(double z);

// Killing field -Re z2 e1 + Re z1 e2 at an ambient point.
Vec4 killing_ambient(const Vec4& v);

// Coefficients (a, b, c) of K = a d_x + b d_y + c d_z.
std::array<double, 3> killing_coords(const DomainPoint& p);

// Coordinate form pushed to R^4.
Vec4 killing_pushforward(const DomainPoint& p);

// Group elements of the form (x,y,z) -> (sx*x + cx, sy*y + cy, z) or,
// when swap is set, (sx*y + cx, sy*x + cy, -z).
struct AffineSym {
  bool swap = false;
  int sx = 1;
  int sy = 1;
  double cx = 0.0;
  double cy = 0.0;

  DomainPoint apply(const DomainPoint& p) const;
  Vec4 apply(const Vec4& v) const;
  // 4x4 orthogonal matrix of the ambient action, row-major.
  std::array<double, 16> matrix() const;
  // (this o other)(p) = this(other(p)).
  AffineSym compose(const AffineSym& other) const;
};

enum class SymKind { TranslateX, TranslateY, ReflectX, ReflectY, ReflectZ };

struct SymmetryElement {
  SymKind kind = SymKind::ReflectZ;
  double c = 0.0;

  AffineSym affine() const;
  DomainPoint apply(const DomainPoint& p) const { return affine().apply(p); }
  Vec4 apply(const Vec4& v) const { return affine().apply(v); }
};

Vec4 apply_matrix(const std::array<double, 16>& m, const Vec4& v);

// Great-circle exponential map on S^3(1); v must be tangent at p.
Vec4 geodesic_exp(const Vec4& p, const Vec4& v);

}  // namespace dcg
