#include "dcg/balance.hpp"

#include <cmath>
#include <string>

namespace dcg {

namespace {

int face_piece(std::uint8_t face) {
  switch (face) {
    case FaceXPlus: return PieceXPlus;
    case FaceXMinus: return PieceXMinus;
    case FaceYPlus: return PieceYPlus;
    case FaceYMinus: return PieceYMinus;
    default: throw TopologyError("boundary edge with face bits " + std::to_string(int(face)));
  }
}

int third_vertex(const std::array<int, 3>& t, int a, int b) {
  for (int v : t)
    if (v != a && v != b) return v;
  throw TopologyError("degenerate boundary triangle");
}

double tri_area(const Vec4& p, const Vec4& q, const Vec4& r) {
  const Vec4 e1 = q - p, e2 = r - p;
  const double a = dot(e1, e1), b = dot(e2, e2), c = dot(e1, e2);
  return 0.5 * std::sqrt(std::max(a * b - c * c, 0.0));
}

}  // namespace

const char* piece_name(int piece) {
  switch (piece) {
    case PieceXPlus: return "x+";
    case PieceXMinus: return "x-";
    case PieceYPlus: return "y+";
    case PieceYMinus: return "y-";
    case PieceWaist: return "waist";
  }
  return "?";
}

ForceRegion upper_half(const SurfaceMesh& s) {
  const TriMesh& m = s.mesh;
  const int w = s.waist_ring;
  auto upper = [&](int v) { return s.info[v].ring >= w; };
  ForceRegion r;
  r.tri_in.assign(m.tri.size(), 0);
  for (std::size_t t = 0; t < m.tri.size(); ++t) {
    const auto& tr = m.tri[t];
    r.tri_in[t] = upper(tr[0]) && upper(tr[1]) && upper(tr[2]);
  }
  for (const BoundaryEdge& e : m.boundary) {
    if (!upper(e.a) || !upper(e.b)) continue;
    if (!r.tri_in[e.tri]) throw TopologyError("lateral edge owned by a lower triangle");
    const int p = face_piece(e.face);
    r.edges.push_back({e.a, e.b, third_vertex(m.tri[e.tri], e.a, e.b), p});
    ++r.edge_count[p];
  }
  // Waist edges, owned by the strip just above the waist.
  const int n = s.n_theta;
  for (int i = 0; i < n; ++i) {
    const int a = s.vid(w, i), b = s.vid(w, (i + 1) % n);
    int owner = -1;
    for (int k = m.vt_offset[a]; k < m.vt_offset[a + 1]; ++k) {
      const int t = m.vt_index[k];
      const auto& tr = m.tri[t];
      const bool has_b = tr[0] == b || tr[1] == b || tr[2] == b;
      if (has_b && r.tri_in[t]) owner = t;
    }
    if (owner < 0) throw TopologyError("waist edge without an upper triangle");
    r.edges.push_back({a, b, third_vertex(m.tri[owner], a, b), PieceWaist});
    ++r.edge_count[PieceWaist];
  }
  for (int p = 0; p < kPieces; ++p)
    if (r.edge_count[p] == 0)
      throw TopologyError(std::string("boundary piece ") + piece_name(p) + " is empty");
  return r;
}

ForceRegion lateral_region(const TriMesh& m) {
  ForceRegion r;
  r.tri_in.assign(m.tri.size(), 1);
  for (const BoundaryEdge& e : m.boundary) {
    const int p = face_piece(e.face);
    r.edges.push_back({e.a, e.b, third_vertex(m.tri[e.tri], e.a, e.b), p});
    ++r.edge_count[p];
  }
  for (int p = 0; p < 4; ++p)
    if (r.edge_count[p] == 0)
      throw TopologyError(std::string("boundary piece ") + piece_name(p) + " is empty");
  return r;
}

std::array<double, kPieces> boundary_pieces(const TriMesh& topo, const std::vector<Vec4>& X,
                                            const std::vector<Vec4>& normal, const ForceRegion& region) {
  (void)topo;
  std::array<double, kPieces> piece{};
  for (const ForceRegion::Edge& e : region.edges) {
    const Vec4 T = X[e.b] - X[e.a];
    const double len = norm(T);
    Vec4 mid = (X[e.a] + X[e.b]) * 0.5;
    mid = mid / norm(mid);
    Vec4 nu = normal[e.a] + normal[e.b];
    Vec4 eta = cross4(mid, T, nu);
    eta = eta / norm(eta);
    if (dot(eta, mid - X[e.opposite]) < 0.0) eta = -eta;
    const Vec4 K = (killing_ambient(X[e.a]) + killing_ambient(X[e.b])) * 0.5;
    piece[e.piece] += dot(eta, K) * len;
  }
  return piece;
}

double piece_total(const std::array<double, kPieces>& piece) {
  double sum = 0.0;
  for (double p : piece) sum += p;
  return sum;
}

double interior_force(const TriMesh& topo, const std::vector<Vec4>& X, const DiscreteShape& shape,
                      const ForceRegion& region) {
  std::vector<double> area(X.size(), 0.0);
  for (std::size_t t = 0; t < topo.tri.size(); ++t) {
    if (!region.tri_in[t]) continue;
    const auto& tr = topo.tri[t];
    const double a = tri_area(X[tr[0]], X[tr[1]], X[tr[2]]) / 3.0;
    for (int v : tr) area[v] += a;
  }
  double F = 0.0;
  for (std::size_t v = 0; v < X.size(); ++v)
    if (area[v] > 0.0) F += area[v] * shape.H[v] * dot(shape.normal[v], killing_ambient(X[v]));
  return F;
}

double balance_ratio(double F, const ConstructionParams& p) {
  return p.m * p.m * F / (8.0 * p.tau * kPi * kPi) + p.zeta;
}

double zeta_update(double F, const ConstructionParams& p) { return balance_ratio(F, p); }

ForceReport force_report(const SurfaceMesh& s, const std::vector<Vec4>& X, const DiscreteShape& shape) {
  const ForceRegion region = upper_half(s);
  ForceReport r;
  r.piece = boundary_pieces(s.mesh, X, shape.normal, region);
  r.F_boundary = piece_total(r.piece);
  r.F_interior = interior_force(s.mesh, X, shape, region);
  r.zeta = s.params.zeta;
  r.tau = s.params.tau;
  r.m = s.params.m;
  r.balance_ratio = balance_ratio(r.F_boundary, s.params);
  return r;
}

ForceReport force_report(const SurfaceMesh& s) { return force_report(s, s.mesh.X, discrete_shape(s.mesh)); }

double lateral_integrand(double z, double y, double d) {
  const double Z = z + (0.25 * kPi);
  return -std::sqrt(1.0 + std::sin(2.0 * z)) / kSqrt2 * (std::cos(Z) / std::sin(Z)) * std::sin(kSqrt2 * d) *
         std::cos(kSqrt2 * y);
}

double level_lateral_total(double z, double d) {
  const double s = std::sin(kSqrt2 * d);
  return 4.0 * std::sin(2.0 * z) * s * s;
}

std::array<double, kPieces> chart_boundary_pieces(const ConstructionParams& p, int n) {
  std::array<double, kPieces> piece{};
  const double d = p.d;
  // Face x = sx d (or y = sy d): coordinate u along the face, height from the upper sheet.
  struct FaceDef {
    int piece;
    bool along_y;
    double sign;
  };
  const FaceDef faces[4] = {{PieceXPlus, true, 1.0}, {PieceXMinus, true, -1.0},
                            {PieceYPlus, false, 1.0}, {PieceYMinus, false, -1.0}};
  const double h = 2.0 * d / n;
  for (const FaceDef& f : faces) {
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double u = -d + h * k;
      const double x = f.along_y ? f.sign * d : u;
      const double y = f.along_y ? u : f.sign * d;
      const double r = std::hypot(x, y);
      const Profile pr = profile_phi(r, p);
      const double z = pr.phi_glued;
      const double dz = pr.d1 * u / r;  // derivative of the height along the face
      const AmbientMetric g = ambient_metric(z);
      const auto K = killing_coords({x, y, z});
      const double gu = f.along_y ? g.g[1] : g.g[0];
      const double gn = f.along_y ? g.g[0] : g.g[1];
      const double Kn = f.along_y ? K[0] : K[1];
      const double val = f.sign * std::sqrt(gn) * Kn * std::sqrt(gu + dz * dz);
      sum += (k == 0 || k == n) ? 0.5 * val : val;
    }
    piece[f.piece] = sum * h;
  }
  // Waist circle at z = 0, conormal -d_z.
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * k / n;
    const auto K = killing_coords({p.tau * std::cos(th), p.tau * std::sin(th), 0.0});
    sum += -K[2] * p.tau;
  }
  piece[PieceWaist] = sum * 2.0 * kPi / n;
  return piece;
}

}  // namespace dcg
