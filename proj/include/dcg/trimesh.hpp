#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dcg/ambient.hpp"

namespace dcg {

// Lateral faces of the square cell.
enum Face : std::uint8_t { FaceXPlus = 1, FaceXMinus = 2, FaceYPlus = 4, FaceYMinus = 8 };

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int tri = 0;  // owning triangle
  std::uint8_t face = 0;
};

// Triangulated surface with R^4 vertex positions. When domain points are
// present, edge vectors are evaluated without cancellation.
struct TriMesh {
  std::vector<Vec4> X;
  std::vector<DomainPoint> dom;
  std::vector<std::array<int, 3>> tri;
  std::vector<BoundaryEdge> boundary;
  std::vector<std::uint8_t> vface;  // face bits per vertex
  // Ambient mirror matrix per face bit index (0..3).
  std::array<std::array<double, 16>, 4> mirror{};
  // Vertex permutations forming the symmetry group (identity included).
  std::vector<std::vector<int>> group;

  // Vertex -> incident triangles.
  std::vector<int> vt_offset;
  std::vector<int> vt_index;

  int num_vertices() const { return static_cast<int>(X.size()); }
  bool has_domain() const { return !dom.empty(); }
  Vec4 edge(int i, int j) const;
  void build_incidence();
  // Scaled so that a face-free vertex has the identity.
  std::array<double, 16> mirror_average(int v) const;
};

// Close a set of generator permutations under composition.
std::vector<std::vector<int>> close_group(const std::vector<std::vector<int>>& generators);

// Average of a field over the group (sym projector).
std::vector<double> group_average(const std::vector<std::vector<int>>& group, const std::vector<double>& f);

// Orbit id per vertex and orbit count.
struct Orbits {
  std::vector<int> id;
  int count = 0;
};
Orbits compute_orbits(const std::vector<std::vector<int>>& group, int n);

// Euler characteristic V - E + F.
int euler_characteristic(const TriMesh& m);

}  // namespace dcg
