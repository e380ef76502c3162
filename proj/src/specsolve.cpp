#include "dcg/specsolve.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dcg {

const char* gauge_name(Gauge g) {
  switch (g) {
    case Gauge::G: return "g";
    case Gauge::Chi: return "chi";
    case Gauge::H: return "h";
  }
  return "?";
}

ShapeData shape_data(const SurfaceMesh& s, const std::vector<ShapeEntry>& shape) {
  ShapeData d;
  d.m = s.params.m;
  d.A2.resize(shape.size());
  d.rho.resize(s.info.size());
  for (std::size_t v = 0; v < shape.size(); ++v) d.A2[v] = shape[v].A2;
  for (std::size_t v = 0; v < s.info.size(); ++v) d.rho[v] = s.info[v].rho;
  return d;
}

Eigen::VectorXd DiscreteOperator::apply(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd ku = energy() * u;
  return -(ku.array() / Eigen::VectorXd(mass.diagonal()).array()).matrix();
}

std::vector<double> DiscreteOperator::apply(const std::vector<double>& u) const {
  const Eigen::VectorXd r = apply(Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size())));
  return {r.data(), r.data() + r.size()};
}

SpMat cotan_stiffness(const TriMesh& m) {
  const int n = m.num_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.tri.size() * 12);
  auto add = [&](int i, int j, double w) {
    trip.emplace_back(i, i, w);
    trip.emplace_back(j, j, w);
    trip.emplace_back(i, j, -w);
    trip.emplace_back(j, i, -w);
  };
  for (const auto& t : m.tri) {
    const Vec4 a = m.edge(t[0], t[1]);
    const Vec4 b = m.edge(t[0], t[2]);
    const Vec4 e = b - a;
    const double aa = dot(a, a), bb = dot(b, b), ab = dot(a, b);
    const double area2 = std::sqrt(std::max(aa * bb - ab * ab, 0.0));
    if (!(area2 > 0.0)) throw MeshQualityError("degenerate triangle in stiffness assembly");
    add(t[1], t[2], 0.5 * ab / area2);
    add(t[0], t[2], 0.5 * -dot(a, e) / area2);
    add(t[0], t[1], 0.5 * dot(b, e) / area2);
  }
  SpMat S(n, n);
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

std::vector<double> lumped_area(const TriMesh& m) {
  std::vector<double> A(m.num_vertices(), 0.0);
  for (const auto& t : m.tri) {
    const Vec4 a = m.edge(t[0], t[1]);
    const Vec4 b = m.edge(t[0], t[2]);
    const double aa = dot(a, a), bb = dot(b, b), ab = dot(a, b);
    const double third = std::sqrt(std::max(aa * bb - ab * ab, 0.0)) / 6.0;
    for (int k = 0; k < 3; ++k) A[t[k]] += third;
  }
  return A;
}

namespace {

SpMat diagonal(const std::vector<double>& d) {
  const int n = static_cast<int>(d.size());
  SpMat D(n, n);
  D.reserve(Eigen::VectorXi::Constant(n, 1));
  for (int i = 0; i < n; ++i) D.insert(i, i) = d[i];
  D.makeCompressed();
  return D;
}

}  // namespace

DiscreteOperator assemble_operator(const TriMesh& m, const ShapeData& d, Gauge gauge) {
  const int n = m.num_vertices();
  if (static_cast<int>(d.A2.size()) != n) throw PreconditionError("assemble_operator: |A|^2 missing or wrong size");
  if (gauge == Gauge::Chi && static_cast<int>(d.rho.size()) != n)
    throw PreconditionError("assemble_operator: rho missing for the chi gauge");
  if (gauge == Gauge::H && !(d.m > 0)) throw PreconditionError("assemble_operator: m missing for the h gauge");
  const std::vector<double> A = lumped_area(m);
  std::vector<double> pot(n), mass(n);
  for (int i = 0; i < n; ++i) {
    pot[i] = A[i] * (d.A2[i] + 2.0);
    switch (gauge) {
      case Gauge::G: mass[i] = A[i]; break;
      case Gauge::Chi: mass[i] = A[i] * d.rho[i] * d.rho[i]; break;
      case Gauge::H: mass[i] = A[i] * 0.5 * (d.A2[i] + d.m * d.m); break;
    }
  }
  DiscreteOperator op;
  op.gauge = gauge;
  op.stiffness = cotan_stiffness(m);
  op.potential_mass = diagonal(pot);
  op.mass = diagonal(mass);
  return op;
}

DiscreteOperator laplace_operator(const TriMesh& m) {
  DiscreteOperator op;
  op.stiffness = cotan_stiffness(m);
  op.potential_mass = SpMat(m.num_vertices(), m.num_vertices());
  op.mass = diagonal(lumped_area(m));
  return op;
}

Eigen::VectorXd SymBasis::restrict(const std::vector<double>& f) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(count);
  for (std::size_t v = 0; v < orbit.size(); ++v)
    if (orbit[v] >= 0) r[orbit[v]] += f[v];
  return r;
}

std::vector<double> SymBasis::expand(const Eigen::VectorXd& c) const {
  std::vector<double> f(orbit.size(), 0.0);
  for (std::size_t v = 0; v < orbit.size(); ++v)
    if (orbit[v] >= 0) f[v] = c[orbit[v]];
  return f;
}

SpMat SymBasis::restrict(const SpMat& A) const {
  const int n = static_cast<int>(orbit.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int v = 0; v < n; ++v)
    if (orbit[v] >= 0) trip.emplace_back(v, orbit[v], 1.0);
  SpMat P(n, count);
  P.setFromTriplets(trip.begin(), trip.end());
  SpMat R = SpMat(P.transpose()) * A * P;
  R.makeCompressed();
  return R;
}

SymBasis sym_basis(const std::vector<std::vector<int>>& group, int n) {
  if (group.empty()) return full_basis(n);
  const Orbits o = compute_orbits(group, n);
  SymBasis b;
  b.orbit = o.id;
  b.count = o.count;
  return b;
}

SymBasis full_basis(int n) {
  SymBasis b;
  b.orbit.resize(n);
  std::iota(b.orbit.begin(), b.orbit.end(), 0);
  b.count = n;
  return b;
}

SymBasis masked(const SymBasis& b, const std::vector<char>& keep) {
  std::vector<int> remap(b.count, -1);
  SymBasis r;
  r.orbit.assign(b.orbit.size(), -1);
  for (std::size_t v = 0; v < b.orbit.size(); ++v) {
    const int o = b.orbit[v];
    if (o < 0 || !keep[v]) continue;
    if (remap[o] < 0) remap[o] = r.count++;
  }
  for (std::size_t v = 0; v < b.orbit.size(); ++v) {
    const int o = b.orbit[v];
    if (o >= 0 && remap[o] >= 0) r.orbit[v] = remap[o];
  }
  return r;
}

std::vector<std::vector<int>> lateral_subgroup(const SurfaceMesh& s) {
  std::vector<std::vector<int>> sub;
  for (const auto& g : s.mesh.group)
    if (s.info[g[0]].ring == s.info[0].ring) sub.push_back(g);
  return sub;
}

std::vector<double> symmetry_project(const TriMesh& m, const std::vector<double>& f) {
  if (m.group.empty()) return f;
  return group_average(m.group, f);
}

ScalarField symmetry_project(const ScalarField& f) {
  if (!f.mesh) throw PreconditionError("symmetry_project: field without mesh");
  return {symmetry_project(*f.mesh, f.values), SymClass::Sym, f.mesh};
}

namespace {

struct Reduced {
  SpMat K;
  Eigen::VectorXd M;  // diagonal mass
};

Reduced reduce(const DiscreteOperator& op, const SymBasis& basis) {
  Reduced r;
  r.K = basis.restrict(op.energy());
  r.M = basis.restrict(op.mass).diagonal();
  if ((r.M.array() <= 0.0).any()) throw NumericalError("mass matrix is not positive definite");
  return r;
}

int negative_pivots(const SpMat& A) {
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw NumericalError("LDLT factorization failed");
  const Eigen::VectorXd D = ldlt.vectorD();
  return static_cast<int>((D.array() < 0.0).count());
}

SpMat shifted(const Reduced& r, double sigma) {
  SpMat A = r.K;
  for (int i = 0; i < A.rows(); ++i) A.coeffRef(i, i) -= sigma * r.M[i];
  return A;
}

std::vector<int> closest(const Eigen::VectorXd& vals, int k, double sigma) {
  std::vector<int> idx(vals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::abs(vals[a] - sigma) < std::abs(vals[b] - sigma); });
  idx.resize(k);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
  return idx;
}

}  // namespace

EigenResult eigen_low(const DiscreteOperator& op, int k, const SymBasis& basis, double sigma, int dense_limit) {
  const Reduced r = reduce(op, basis);
  const int n = static_cast<int>(r.K.rows());
  k = std::min(k, n);
  if (k <= 0) throw PreconditionError("eigen_low: empty subspace");
  // Symmetric standard form B = D K D with D = M^{-1/2}.
  const Eigen::VectorXd Dm = r.M.cwiseSqrt().cwiseInverse();
  // Residual of the standard form B y = lambda y, |y| = 1, relative to max |B_ii|.
  const double bscale = (Eigen::VectorXd(r.K.diagonal()).cwiseProduct(Dm).cwiseProduct(Dm)).cwiseAbs().maxCoeff();
  auto residual = [&](const Eigen::VectorXd& x, double lam) {
    const Eigen::VectorXd y = x.cwiseQuotient(Dm);
    const Eigen::VectorXd res = Dm.cwiseProduct(r.K * x - lam * r.M.cwiseProduct(x));
    return res.norm() / (y.norm() * bscale);
  };
  EigenResult out;
  Eigen::VectorXd vals(k);
  Eigen::MatrixXd vecs(n, k);  // in the original (M-orthonormal) coordinates

  if (n < dense_limit) {
    const Eigen::MatrixXd B = Dm.asDiagonal() * Eigen::MatrixXd(r.K) * Dm.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    const auto idx = closest(es.eigenvalues(), k, sigma);
    for (int j = 0; j < k; ++j) {
      vals[j] = es.eigenvalues()[idx[j]];
      vecs.col(j) = Dm.asDiagonal() * es.eigenvectors().col(idx[j]);
    }
    out.method = "dense";
  } else {
    const SpMat A = shifted(r, sigma);
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw NumericalError("shift-invert factorization failed");
    const int p = std::min(n, std::max(2 * k, k + 10));
    std::mt19937 gen(12345);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd Y(n, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i) Y(i, j) = nd(gen);
    std::vector<double> trace;
    for (int it = 1; it <= 2000; ++it) {
      // (B - sigma)^{-1} = D^{-1} A^{-1} D^{-1}
      Eigen::MatrixXd Z = (Dm.cwiseInverse().asDiagonal() * Y).eval();
      Z = ldlt.solve(Z);
      Z = Dm.cwiseInverse().asDiagonal() * Z;
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
      const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
      const Eigen::MatrixXd X = Dm.asDiagonal() * Q;
      const Eigen::MatrixXd T = X.transpose() * (r.K * X);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (T + T.transpose()));
      Y = Q * es.eigenvectors();
      const auto idx = closest(es.eigenvalues(), k, sigma);
      double worst = 0.0;
      for (int j = 0; j < k; ++j) {
        const double lam = es.eigenvalues()[idx[j]];
        const Eigen::VectorXd x = Dm.asDiagonal() * Y.col(idx[j]);
        worst = std::max(worst, residual(x, lam));
        vals[j] = lam;
        vecs.col(j) = x;
      }
      trace.push_back(worst);
      out.iterations = it;
      if (worst < 1e-12) break;
      if (it == 2000) throw NumericalError("shift-invert iteration did not converge", trace);
    }
    out.method = "shift-invert";
  }
  for (int j = 0; j < k; ++j) {
    const Eigen::VectorXd x = vecs.col(j);
    out.values.push_back(vals[j]);
    out.residuals.push_back(residual(x, vals[j]));
    out.vectors.push_back(basis.expand(x));
  }
  return out;
}

int count_eigenvalues(const DiscreteOperator& op, const SymBasis& basis, double lo, double hi) {
  const Reduced r = reduce(op, basis);
  return negative_pivots(shifted(r, hi)) - negative_pivots(shifted(r, lo));
}

CylinderLayout cylinder_layout(const TriMesh& m, int n_theta) {
  CylinderLayout l;
  const int rings = m.num_vertices() / n_theta;
  for (int k = 0; k < rings; ++k) {
    std::vector<int> ring(n_theta);
    std::iota(ring.begin(), ring.end(), k * n_theta);
    l.rings.push_back(ring);
    l.position.push_back(m.X[k * n_theta][2]);
  }
  return l;
}

CylinderLayout neck_layout(const SurfaceMesh& s, double b, double x, double y) {
  const ConstructionParams& p = s.params;
  if (!regions_admissible(p, b, x, y)) throw PreconditionError("neck_layout: region constants not admissible");
  const double lo = b + x, hi = p.a_bar - b - y;
  // walk from the waist towards the side with t_under > 0
  const int w = s.waist_ring;
  const int dir = s.info[s.vid(w + 1, 0)].t_under > 0 ? 1 : -1;
  CylinderLayout l;
  int start = -1;
  for (int k = w; k >= 0 && k < s.rings; k += dir) {
    const double tu = s.info[s.vid(k, 0)].t_under;
    if (tu <= lo) start = k;
    if (tu > lo && start >= 0) break;
  }
  for (int k = start; k >= 0 && k < s.rings; k += dir) {
    const int v0 = s.vid(k, 0);
    std::vector<int> ring(s.n_theta);
    for (int i = 0; i < s.n_theta; ++i) ring[i] = s.vid(k, i);
    l.rings.push_back(ring);
    l.position.push_back(std::abs(s.info[v0].t));
    if (s.info[v0].t_under >= hi) break;
  }
  if (l.rings.size() < 3) throw PreconditionError("neck_layout: neck region has no interior rings");
  return l;
}

namespace {

std::vector<char> interior_of(const CylinderLayout& l, int n) {
  std::vector<char> keep(n, 0);
  for (std::size_t k = 1; k + 1 < l.rings.size(); ++k)
    for (int v : l.rings[k]) keep[v] = 1;
  return keep;
}

}  // namespace

double dirichlet_eig(const DiscreteOperator& op, const CylinderLayout& layout, const SymBasis& basis) {
  const SymBasis inner = masked(basis, interior_of(layout, op.size()));
  const Reduced r = reduce(op, inner);
  // Lower bound for the shift: nothing below it.
  double sigma = 0.0;
  while (negative_pivots(shifted(r, sigma)) > 0) sigma = sigma == 0.0 ? -1.0 : 4.0 * sigma;
  const EigenResult e = eigen_low(op, 1, inner, sigma, 500);
  return e.values.front();
}

NeckEigReport neck_dirichlet_eig(const SurfaceMesh& s, const ShapeData& d, double b, double x, double y) {
  const CylinderLayout l = neck_layout(s, b, x, y);
  const DiscreteOperator op = assemble_operator(s.mesh, d, Gauge::Chi);
  const SymBasis basis = sym_basis(lateral_subgroup(s), s.mesh.num_vertices());
  NeckEigReport r;
  r.lambda = dirichlet_eig(op, l, basis);
  r.ell = neck_lengths(s.params, b, x, y).ell;
  r.scaled = r.lambda * r.ell * r.ell;
  return r;
}

DecayReport harmonic_decay(const DiscreteOperator& op, const CylinderLayout& layout, const std::vector<double>& data,
                           const std::vector<std::vector<int>>& group, double fit_fraction) {
  const auto& ring0 = layout.rings.front();
  if (data.size() != ring0.size()) throw PreconditionError("harmonic_decay: data size does not match the circle");
  double scale = 0.0, sum = 0.0;
  for (double v : data) {
    scale = std::max(scale, std::abs(v));
    sum += v;
  }
  if (!(scale > 0.0)) throw PreconditionError("harmonic_decay: zero data");
  if (std::abs(sum) > 1e-10 * scale * data.size()) throw PreconditionError("harmonic_decay: data is not mean-zero");
  const int n = op.size();
  std::vector<double> full(n, 0.0);
  std::vector<int> slot(n, -1);
  for (std::size_t i = 0; i < ring0.size(); ++i) {
    full[ring0[i]] = data[i];
    slot[ring0[i]] = static_cast<int>(i);
  }
  for (const auto& g : group)
    for (int v : ring0) {
      if (slot[g[v]] < 0) throw PreconditionError("harmonic_decay: group does not preserve the data circle");
      if (std::abs(full[g[v]] - full[v]) > 1e-10 * scale)
        throw PreconditionError("harmonic_decay: data is not neck-symmetric");
    }

  const std::vector<char> keep = interior_of(layout, n);
  std::vector<int> idx(n, -1);
  int ni = 0;
  for (int v = 0; v < n; ++v)
    if (keep[v]) idx[v] = ni++;
  const SpMat E = op.energy();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni);
  for (int col = 0; col < E.outerSize(); ++col)
    for (SpMat::InnerIterator it(E, col); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      if (idx[i] < 0) continue;
      if (idx[j] >= 0)
        trip.emplace_back(idx[i], idx[j], it.value());
      else
        rhs[idx[i]] -= it.value() * full[j];
    }
  SpMat A(ni, ni);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw NumericalError("harmonic_decay: factorization failed");
  const Eigen::VectorXd sol = lu.solve(rhs);
  for (int v = 0; v < n; ++v)
    if (idx[v] >= 0) full[v] = sol[idx[v]];

  DecayReport rep;
  rep.solution = full;
  const double p0 = layout.position.front();
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k + 1 < layout.rings.size(); ++k) {
    double amp = 0.0;
    for (int v : layout.rings[k]) amp = std::max(amp, std::abs(full[v]));
    const double pos = layout.position[k] - p0;
    rep.position.push_back(pos);
    rep.amplitude.push_back(amp);
    if (pos <= fit_fraction * layout.length() && amp > 0.0) {
      xs.push_back(pos);
      ys.push_back(std::log(amp));
    }
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  rep.rate = -sxy / sxx;
  return rep;
}

DecayReport neck_harmonic_decay(const SurfaceMesh& s, const ShapeData& d, double b, const std::vector<double>& data,
                                double fit_fraction) {
  const CylinderLayout l = neck_layout(s, b);
  const DiscreteOperator op = assemble_operator(s.mesh, d, Gauge::Chi);
  return harmonic_decay(op, l, data, lateral_subgroup(s), fit_fraction);
}

ScalarField substitute_w(const SurfaceMesh& s) {
  ScalarField f;
  f.values.resize(s.info.size());
  for (std::size_t v = 0; v < s.info.size(); ++v) f.values[v] = s.info[v].w;
  f.symmetry = SymClass::Sym;
  f.mesh = &s.mesh;
  return f;
}

ModKernelSolver::ModKernelSolver(const DiscreteOperator& op_chi, const DiscreteOperator& op_h, const SymBasis& basis,
                                 std::vector<double> f0, std::vector<double> w, double gap, double min_gap)
    : basis_(basis), f0_(std::move(f0)), w_(std::move(w)) {
  if (op_chi.gauge != Gauge::Chi || op_h.gauge != Gauge::H)
    throw PreconditionError("solve_mod_kernel: expects operators in the chi and h gauges");
  if (!(gap >= min_gap))
    throw NumericalError("solve_mod_kernel: eigenvalue gap " + std::to_string(gap) + " below " + std::to_string(min_gap),
                         {gap});
  const int n = op_chi.size();
  mchi_ = op_chi.mass.diagonal();
  mh_ = op_h.mass.diagonal();
  f0w_ = 0.0;
  for (int v = 0; v < n; ++v) f0w_ += mchi_[v] * w_[v] * f0_[v];
  if (!(std::abs(f0w_) > 0.0)) throw NumericalError("solve_mod_kernel: substitute kernel is orthogonal to f0");

  std::vector<double> hf0(n);
  for (int v = 0; v < n; ++v) hf0[v] = mh_[v] * f0_[v];
  const Eigen::VectorXd c0 = basis_.restrict(hf0);
  K_ = basis_.restrict(op_chi.energy());
  const int nr = static_cast<int>(K_.rows());
  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < K_.outerSize(); ++col)
    for (SpMat::InnerIterator it(K_, col); it; ++it) trip.emplace_back(it.row(), it.col(), -it.value());
  for (int i = 0; i < nr; ++i) {
    trip.emplace_back(i, nr, c0[i]);
    trip.emplace_back(nr, i, c0[i]);
  }
  SpMat A(nr + 1, nr + 1);
  A.setFromTriplets(trip.begin(), trip.end());
  lu_.compute(A);
  if (lu_.info() != Eigen::Success) throw NumericalError("solve_mod_kernel: factorization failed", {gap});
}

ModKernelSolution ModKernelSolver::solve(const std::vector<double>& E) const {
  const int n = static_cast<int>(E.size());
  double f0E = 0.0;
  for (int v = 0; v < n; ++v) f0E += mchi_[v] * E[v] * f0_[v];
  ModKernelSolution sol;
  sol.mu = -f0E / f0w_;

  std::vector<double> rhs_full(n);
  for (int v = 0; v < n; ++v) rhs_full[v] = mchi_[v] * (E[v] + sol.mu * w_[v]);
  const Eigen::VectorXd r = basis_.restrict(rhs_full);
  const int nr = static_cast<int>(K_.rows());
  Eigen::VectorXd b(nr + 1);
  b.head(nr) = r;
  b[nr] = 0.0;
  const Eigen::VectorXd x = lu_.solve(b);
  const Eigen::VectorXd c = x.head(nr);
  sol.multiplier = x[nr];
  sol.u = basis_.expand(c);

  const Eigen::VectorXd Lu = -(K_ * c);
  sol.residual = (Lu - r).norm() / std::max(r.norm(), 1e-300);
  double uf = 0.0, uu = 0.0, ff = 0.0;
  for (int v = 0; v < n; ++v) {
    uf += mh_[v] * sol.u[v] * f0_[v];
    uu += mh_[v] * sol.u[v] * sol.u[v];
    ff += mh_[v] * f0_[v] * f0_[v];
  }
  sol.orthogonality = uu > 0.0 ? std::abs(uf) / std::sqrt(uu * ff) : 0.0;
  return sol;
}

ModKernelSolution solve_mod_kernel(const DiscreteOperator& op_chi, const DiscreteOperator& op_h, const SymBasis& basis,
                                   const std::vector<double>& E, const std::vector<double>& f0,
                                   const std::vector<double>& w, double gap, double min_gap) {
  return ModKernelSolver(op_chi, op_h, basis, f0, w, gap, min_gap).solve(E);
}

namespace {

// Gradient in R^4 of the linear interpolant of (u0, u1, u2) on a triangle.
Vec4 triangle_gradient(const Vec4& a, const Vec4& b, double du1, double du2) {
  const double aa = dot(a, a), bb = dot(b, b), ab = dot(a, b);
  const double det = aa * bb - ab * ab;
  const double al = (bb * du1 - ab * du2) / det, be = (aa * du2 - ab * du1) / det;
  return a * al + b * be;
}

}  // namespace

double weighted_norm(const SurfaceMesh& s, const std::vector<double>& u, int order, double gamma) {
  const TriMesh& m = s.mesh;
  const int n = m.num_vertices();
  const WeightReport wr = field_weights(s, gamma);
  std::vector<double> total(n);
  for (int v = 0; v < n; ++v) total[v] = std::abs(u[v]);
  if (order >= 1) {
    std::vector<double> g1(n, 0.0), wsum(n, 0.0);
    std::vector<Vec4> vg(n);
    for (const auto& t : m.tri) {
      const Vec4 a = m.edge(t[0], t[1]), b = m.edge(t[0], t[2]);
      const Vec4 G = triangle_gradient(a, b, u[t[1]] - u[t[0]], u[t[2]] - u[t[0]]);
      const double area = 0.5 * std::sqrt(std::max(dot(a, a) * dot(b, b) - dot(a, b) * dot(a, b), 0.0));
      for (int k = 0; k < 3; ++k) {
        g1[t[k]] = std::max(g1[t[k]], norm(G) / s.info[t[k]].rho);
        vg[t[k]] += G * area;
        wsum[t[k]] += area;
      }
    }
    for (int v = 0; v < n; ++v) {
      total[v] += g1[v];
      vg[v] = vg[v] / wsum[v];
    }
    if (order >= 2) {
      std::vector<double> g2(n, 0.0);
      for (const auto& t : m.tri) {
        const Vec4 a = m.edge(t[0], t[1]), b = m.edge(t[0], t[2]);
        double fro = 0.0;
        for (int c = 0; c < 4; ++c) {
          const Vec4 Gc = triangle_gradient(a, b, vg[t[1]][c] - vg[t[0]][c], vg[t[2]][c] - vg[t[0]][c]);
          fro += dot(Gc, Gc);
        }
        fro = std::sqrt(fro);
        for (int k = 0; k < 3; ++k) {
          const double r = s.info[t[k]].rho;
          g2[t[k]] = std::max(g2[t[k]], fro / (r * r));
        }
      }
      for (int v = 0; v < n; ++v) total[v] += g2[v];
    }
  }
  double best = 0.0;
  for (int v = 0; v < n; ++v) best = std::max(best, total[v] / wr.f_tilde[v]);
  return best;
}

QuadraticReport quadratic_check(const SurfaceMesh& s, const std::vector<Vec4>& normal, const std::vector<double>& dir,
                                const std::vector<double>& sizes, double gamma) {
  const TriMesh& m = s.mesh;
  const int n = m.num_vertices();
  const double dn = weighted_norm(s, dir, 2, gamma);
  if (!(dn > 0.0)) throw PreconditionError("quadratic_check: zero direction");
  const std::vector<double> zero(n, 0.0);
  const std::vector<double> H0 = discrete_shape(perturb_normal(m, normal, zero)).H;
  const std::vector<double> Ldir = discrete_tangent(m, normal, zero, dir);
  QuadraticReport rep;
  for (double sz : sizes) {
    const double k = sz / dn;
    std::vector<double> phi(n);
    for (int v = 0; v < n; ++v) phi[v] = k * dir[v];
    const std::vector<double> H = discrete_shape(perturb_normal(m, normal, phi)).H;
    std::vector<double> rem(n);
    for (int v = 0; v < n; ++v) {
      const double r2 = s.info[v].rho * s.info[v].rho;
      rem[v] = (H[v] - H0[v] - k * Ldir[v]) / r2;
    }
    rep.size.push_back(sz);
    rep.remainder.push_back(weighted_norm(s, rem, 0, gamma));
  }
  rep.slope = loglog_slope(rep.size, rep.remainder);
  rep.ok = std::abs(rep.slope - 2.0) <= 0.15;
  return rep;
}

}  // namespace dcg
