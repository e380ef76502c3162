#include "dcg/trimesh.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace dcg {

Vec4 TriMesh::edge(int i, int j) const {
  if (has_domain()) return phi_diff(dom[i], dom[j]);
  return X[j] - X[i];
}

void TriMesh::build_incidence() {
  const int n = num_vertices();
  vt_offset.assign(n + 1, 0);
  for (const auto& t : tri)
    for (int v : t) ++vt_offset[v + 1];
  for (int i = 0; i < n; ++i) vt_offset[i + 1] += vt_offset[i];
  vt_index.assign(vt_offset[n], 0);
  std::vector<int> fill(vt_offset.begin(), vt_offset.end() - 1);
  for (int t = 0; t < static_cast<int>(tri.size()); ++t)
    for (int v : tri[t]) vt_index[fill[v]++] = t;
}

std::array<double, 16> TriMesh::mirror_average(int v) const {
  std::array<double, 16> id{};
  for (int i = 0; i < 4; ++i) id[i * 5] = 1.0;
  if (vface.empty() || vface[v] == 0) return id;
  // Group generated by the (commuting) mirrors of the faces through v.
  std::vector<std::array<double, 16>> elems{id};
  for (int f = 0; f < 4; ++f) {
    if (!(vface[v] & (1u << f))) continue;
    const auto& r = mirror[f];
    const std::size_t n = elems.size();
    for (std::size_t e = 0; e < n; ++e) {
      std::array<double, 16> p{};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int k = 0; k < 4; ++k) p[i * 4 + j] += r[i * 4 + k] * elems[e][k * 4 + j];
      elems.push_back(p);
    }
  }
  std::array<double, 16> avg{};
  for (const auto& e : elems)
    for (int i = 0; i < 16; ++i) avg[i] += e[i];
  for (double& a : avg) a /= static_cast<double>(elems.size());
  return avg;
}

std::vector<std::vector<int>> close_group(const std::vector<std::vector<int>>& generators) {
  if (generators.empty()) return {};
  const int n = static_cast<int>(generators[0].size());
  std::vector<int> id(n);
  for (int i = 0; i < n; ++i) id[i] = i;
  std::set<std::vector<int>> seen{id};
  std::vector<std::vector<int>> out{id};
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (const auto& g : generators) {
      std::vector<int> c(n);
      for (int i = 0; i < n; ++i) c[i] = g[out[k][i]];
      if (seen.insert(c).second) out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<double> group_average(const std::vector<std::vector<int>>& group, const std::vector<double>& f) {
  if (group.empty()) return f;
  std::vector<double> r(f.size(), 0.0);
  for (const auto& g : group)
    for (std::size_t i = 0; i < f.size(); ++i) r[i] += f[g[i]];
  for (double& v : r) v /= static_cast<double>(group.size());
  return r;
}

Orbits compute_orbits(const std::vector<std::vector<int>>& group, int n) {
  Orbits o;
  o.id.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (o.id[i] >= 0) continue;
    for (const auto& g : group) o.id[g[i]] = o.count;
    o.id[i] = o.count;
    ++o.count;
  }
  return o;
}

int euler_characteristic(const TriMesh& m) {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : m.tri)
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.insert({a, b});
    }
  return m.num_vertices() - static_cast<int>(edges.size()) + static_cast<int>(m.tri.size());
}

}  // namespace dcg
