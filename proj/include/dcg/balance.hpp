#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcg/geomq.hpp"
#include "dcg/initsurf.hpp"
#include "dcg/trimesh.hpp"

namespace dcg {

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Boundary pieces of the upper half cell: the four lateral faces and the waist circle.
enum Piece : int { PieceXPlus = 0, PieceXMinus = 1, PieceYPlus = 2, PieceYMinus = 3, PieceWaist = 4 };
inline constexpr int kPieces = 5;
const char* piece_name(int piece);

// Triangles of a region and its boundary edges labelled by piece.
struct ForceRegion {
  struct Edge {
    int a = 0;
    int b = 0;
    int opposite = 0;  // third vertex of the owning triangle
    int piece = 0;
  };
  std::vector<char> tri_in;
  std::vector<Edge> edges;
  std::array<int, kPieces> edge_count{};
};

// Part of the bridged cell with z >= 0. Throws TopologyError unless all five pieces are found.
ForceRegion upper_half(const SurfaceMesh& s);
// Whole mesh with its lateral faces; no waist piece (cells closed by symmetry).
ForceRegion lateral_region(const TriMesh& m);

struct ForceReport {
  double F_boundary = 0.0;
  double F_interior = 0.0;
  std::array<double, kPieces> piece{};
  double zeta = 0.0;
  double tau = 0.0;
  double m = 0.0;
  double balance_ratio = 0.0;  // m^2 F / (8 tau pi^2) + zeta, with F the boundary form
};

// Line integral of <eta, K> per piece. `X` are the current positions, `normal` the unit normals.
// The conormal at an edge is orthogonal to the edge, the mean normal and the position, pointing away
// from the owning triangle.
std::array<double, kPieces> boundary_pieces(const TriMesh& topo, const std::vector<Vec4>& X,
                                            const std::vector<Vec4>& normal, const ForceRegion& region);

// Sum of the pieces through one accumulator.
double piece_total(const std::array<double, kPieces>& piece);

// Lumped quadrature of H <nu, K> over the region triangles.
double interior_force(const TriMesh& topo, const std::vector<Vec4>& X, const DiscreteShape& shape,
                      const ForceRegion& region);

ForceReport force_report(const SurfaceMesh& s, const std::vector<Vec4>& X, const DiscreteShape& shape);
ForceReport force_report(const SurfaceMesh& s);  // unperturbed surface

double balance_ratio(double F, const ConstructionParams& p);
// zeta' = m^2 F / (8 tau pi^2) + zeta
double zeta_update(double F, const ConstructionParams& p);

// <eta, K> on the face x = d (outward conormal d_x / |d_x|) at height z, coordinate y.
double lateral_integrand(double z, double y, double d);

// Boundary pieces of the unperturbed surface from its charts: composite trapezoid with n intervals
// per lateral face and n points on the waist circle.
std::array<double, kPieces> chart_boundary_pieces(const ConstructionParams& p, int n);

// Closed form of the unperturbed lateral total 4 sin(2 z) sin^2(sqrt2 d) at constant height z,
// also the force of the level cell z = c.
double level_lateral_total(double z, double d);

}  // namespace dcg
