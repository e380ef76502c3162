#include "dcg/driver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <unsupported/Eigen/IterativeSolvers>
#include <utility>

namespace dcg::detail {
class LinearMap;
}  // namespace dcg::detail

namespace Eigen::internal {
template <>
struct traits<dcg::detail::LinearMap> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace dcg::detail {

// Matrix-free operator for Eigen's GMRES.
class LinearMap : public Eigen::EigenBase<LinearMap> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  Eigen::Index rows() const { return n; }
  Eigen::Index cols() const { return n; }

  template <typename Rhs>
  Eigen::Product<LinearMap, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<LinearMap, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  int n = 0;
};

}  // namespace dcg::detail

namespace Eigen::internal {

template <typename Rhs>
struct generic_product_impl<dcg::detail::LinearMap, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<dcg::detail::LinearMap, Rhs,
                                generic_product_impl<dcg::detail::LinearMap, Rhs>> {
  using Scalar = typename Product<dcg::detail::LinearMap, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const dcg::detail::LinearMap& lhs, const Rhs& rhs, const Scalar& alpha) {
    dst.noalias() += alpha * lhs.apply(rhs);
  }
};

}  // namespace Eigen::internal

namespace dcg {

ConstructionConfig ConstructionConfig::frozen_grid() const {
  const ConstructionParams p = derive();
  ConstructionConfig c = *this;
  c.res.n_theta = p.n_theta;
  c.res.n_axial = p.n_axial;
  c.res.n_square = p.n_square;
  return c;
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::ZetaEscaped: return "zeta_escaped";
    case SolveStatus::PerturbationTooLarge: return "perturbation_too_large";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

const char* zeta_mode_name(ZetaMode z) { return z == ZetaMode::Coupled ? "coupled" : "jacobi"; }

std::vector<double> weighted_mean_curvature(const SurfaceMesh& s, const std::vector<double>& phi) {
  const PerturbedMesh pm = perturb_normal(s.mesh, chart_normals(s), phi);
  const DiscreteShape ds = discrete_shape(pm);
  std::vector<double> R(phi.size());
  for (std::size_t v = 0; v < R.size(); ++v) R[v] = ds.H[v] / (s.info[v].rho * s.info[v].rho);
  return R;
}

double multiplier_from_force(const SurfaceMesh& s, const PerturbedMesh& pm, const DiscreteShape& shape, double F) {
  const ForceRegion region = upper_half(s);
  std::vector<double> area(pm.X.size(), 0.0);
  for (std::size_t t = 0; t < s.mesh.tri.size(); ++t) {
    if (!region.tri_in[t]) continue;
    const auto& tr = s.mesh.tri[t];
    const Vec4 e1 = pm.X[tr[1]] - pm.X[tr[0]], e2 = pm.X[tr[2]] - pm.X[tr[0]];
    const double a = dot(e1, e1), b = dot(e2, e2), c = dot(e1, e2);
    const double third = std::sqrt(std::max(a * b - c * c, 0.0)) / 6.0;
    for (int v : tr) area[v] += third;
  }
  double denom = 0.0;
  for (std::size_t v = 0; v < area.size(); ++v) {
    const double rho = s.info[v].rho;
    denom += area[v] * rho * rho * s.info[v].w * dot(shape.normal[v], killing_ambient(pm.X[v]));
  }
  return denom != 0.0 ? -F / denom : 0.0;
}

namespace {

struct Evaluation {
  std::vector<Vec4> normal;
  PerturbedMesh pm;
  DiscreteShape shape;
  std::vector<double> R;
  double residual = 0.0;
  ForceReport force;
};

Evaluation evaluate(const SurfaceMesh& s, const std::vector<double>& phi) {
  Evaluation e;
  e.normal = chart_normals(s);
  e.pm = perturb_normal(s.mesh, e.normal, phi);
  e.shape = discrete_shape(e.pm);
  e.R.resize(phi.size());
  for (std::size_t v = 0; v < phi.size(); ++v) e.R[v] = e.shape.H[v] / (s.info[v].rho * s.info[v].rho);
  e.residual = weighted_norm(s, e.R, 0, s.params.gamma);
  e.force = force_report(s, e.pm.X, e.shape);
  return e;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double sym_drift(const TriMesh& m, const std::vector<double>& f, std::vector<double>& projected) {
  projected = symmetry_project(m, f);
  double d = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) d = std::max(d, std::abs(f[i] - projected[i]));
  return d;
}

}  // namespace

SolveState run_newton(const ConstructionConfig& cfg_in, const SolveOptions& opt, const std::vector<double>& phi0) {
  const ConstructionConfig cfg = cfg_in.frozen_grid();
  SolveState st;
  SurfaceMesh s = build_mesh(cfg.derive());
  const int n = s.mesh.num_vertices();
  std::vector<double> phi = phi0.empty() ? std::vector<double>(n, 0.0) : phi0;
  if (static_cast<int>(phi.size()) != n) throw std::invalid_argument("initial phi does not match the mesh");
  const SymBasis basis = sym_basis(s.mesh.group, n);

  int rising = 0;
  double prev = 0.0;
  for (int it = 0;; ++it) {
    Evaluation ev;
    try {
      ev = evaluate(s, phi);
    } catch (const PerturbationTooLarge& e) {
      st.status = SolveStatus::PerturbationTooLarge;
      st.message = e.what();
      break;
    }
    IterationRecord rec;
    rec.iteration = it;
    rec.residual_H = ev.residual;
    rec.F = ev.force.F_interior;
    rec.F_boundary = ev.force.F_boundary;
    rec.zeta = s.params.zeta;
    rec.phi_norm = weighted_norm(s, phi, 0, s.params.gamma) / s.params.tau;
    rec.mu_prime = multiplier_from_force(s, ev.pm, ev.shape, ev.force.F_interior);

    st.iteration = it;
    st.zeta = s.params.zeta;
    st.residual_H = ev.residual;
    if (it == 0) st.residual_initial = ev.residual;
    st.F = ev.force.F_interior;
    st.F_boundary = ev.force.F_boundary;
    st.mu_prime = rec.mu_prime;
    st.phi_norm = rec.phi_norm;
    st.X = ev.pm.X;

    const bool done = ev.residual <= opt.tol_H && std::abs(ev.force.F_interior) <= opt.tol_F;
    rising = (it > 0 && ev.residual > prev) ? rising + 1 : 0;
    prev = ev.residual;

    // Operators of the current base surface.
    std::unique_ptr<ModKernelSolver> P;
    try {
      const ShapeData d = shape_data(s, chart_shape(s));
      const DiscreteOperator oc = assemble_operator(s.mesh, d, Gauge::Chi);
      const DiscreteOperator oh = assemble_operator(s.mesh, d, Gauge::H);
      const EigenResult e = eigen_low(oh, 3, basis, 0.0);
      const double gap = std::min(e.values[2] - e.values[1], e.values[1] - e.values[0]);
      P = std::make_unique<ModKernelSolver>(oc, oh, basis, e.vectors[1], substitute_w(s).values, gap);
    } catch (const NumericalError& e) {
      st.history.push_back(rec);
      st.status = SolveStatus::NumericalFailure;
      st.message = e.what();
      break;
    }
    std::vector<double> minus_R(n);
    for (int v = 0; v < n; ++v) minus_R[v] = -ev.R[v];
    const ModKernelSolution direct = P->solve(minus_R);
    rec.mu = direct.mu;
    st.mu = direct.mu;

    if (done) {
      st.history.push_back(rec);
      st.status = SolveStatus::Converged;
      break;
    }
    if (rising >= 3) {
      st.history.push_back(rec);
      st.status = SolveStatus::Diverged;
      st.message = "residual increased three times in a row";
      break;
    }
    if (it >= opt.max_iter) {
      st.history.push_back(rec);
      st.status = SolveStatus::MaxIterations;
      break;
    }

    std::vector<double> du(n, 0.0);
    double dzeta = 0.0;
    try {
      if (opt.zeta_mode == ZetaMode::Jacobi) {
        du = direct.u;
        dzeta = zeta_update(ev.force.F_interior, s.params) - s.params.zeta;
        if (std::abs(dzeta) > opt.max_zeta_step) dzeta = std::copysign(opt.max_zeta_step, dzeta);
      } else {
        // Sensitivity of the residual to zeta with phi carried by the tau scaling.
        const SurfaceMesh s2 = build_mesh(cfg.derive_at(s.params.zeta + opt.zeta_fd));
        std::vector<double> phi2 = phi;
        for (double& x : phi2) x *= s2.params.tau / s.params.tau;
        const std::vector<double> R2 = weighted_mean_curvature(s2, phi2);
        std::vector<double> minus_dR(n);
        for (int v = 0; v < n; ++v) minus_dR[v] = -(R2[v] - ev.R[v]) / opt.zeta_fd;

        // Right-preconditioned tangent: r -> J u(r) - mu(r) w with (u, mu) = P(r).
        const std::vector<double>& w = P->substitute();
        std::vector<double> rho2(n);
        for (int v = 0; v < n; ++v) rho2[v] = s.info[v].rho * s.info[v].rho;
        detail::LinearMap T;
        T.n = n;
        T.apply = [&](const Eigen::VectorXd& x) {
          const ModKernelSolution q = P->solve(to_std(x));
          const std::vector<double> Ju = discrete_tangent(s.mesh, ev.normal, phi, q.u);
          Eigen::VectorXd y(n);
          for (int v = 0; v < n; ++v) y[v] = Ju[v] / rho2[v] - q.mu * w[v];
          return y;
        };
        Eigen::GMRES<detail::LinearMap, Eigen::IdentityPreconditioner> gmres;
        gmres.compute(T);
        gmres.setTolerance(opt.gmres_tol);
        gmres.setMaxIterations(opt.gmres_max);
        gmres.set_restart(opt.gmres_max);
        const ModKernelSolution q1 = P->solve(to_std(gmres.solve(to_eigen(minus_R))));
        rec.krylov = static_cast<int>(gmres.iterations());
        const ModKernelSolution q2 = P->solve(to_std(gmres.solve(to_eigen(minus_dR))));
        if (q2.mu == 0.0) throw NumericalError("zeta direction does not reach the multiplier");
        // The zeta column absorbs the multiplier.
        dzeta = -q1.mu / q2.mu;
        double lam = 1.0;
        if (std::abs(dzeta) > opt.max_zeta_step) lam = opt.max_zeta_step / std::abs(dzeta);
        dzeta *= lam;
        rec.step = lam;
        for (int v = 0; v < n; ++v) du[v] = lam * q1.u[v] + dzeta * q2.u[v];
      }
    } catch (const NumericalError& e) {
      st.history.push_back(rec);
      st.status = SolveStatus::NumericalFailure;
      st.message = e.what();
      break;
    }

    for (int v = 0; v < n; ++v) phi[v] += du[v];
    std::vector<double> projected;
    rec.sym_drift = sym_drift(s.mesh, phi, projected);
    phi = std::move(projected);
    st.history.push_back(rec);

    const double z_new = s.params.zeta + dzeta;
    if (std::abs(z_new) > cfg.c_bar) {
      st.status = SolveStatus::ZetaEscaped;
      st.message = "zeta left [-c_bar, c_bar]";
      break;
    }
    try {
      const double tau_old = s.params.tau;
      s = build_mesh(cfg.derive_at(z_new));
      for (double& x : phi) x *= s.params.tau / tau_old;
    } catch (const ConstructionError& e) {
      st.status = SolveStatus::ZetaEscaped;
      st.message = e.what();
      break;
    }
  }
  st.phi = phi;
  st.surface = std::move(s);
  return st;
}

DomainPoint chart_inverse(const Vec4& X) {
  const double c = std::hypot(X[0], X[1]), sn = std::hypot(X[2], X[3]);
  return {std::atan2(X[3], X[2]) / kSqrt2, std::atan2(X[1], X[0]) / kSqrt2, std::atan2(sn, c) - 0.25 * kPi};
}

EmbeddednessReport embeddedness_check(const SurfaceMesh& s, const std::vector<Vec4>& X) {
  const ConstructionParams& p = s.params;
  EmbeddednessReport r;
  r.required = 0.5 * p.a * p.tau;
  double upper_min = std::numeric_limits<double>::infinity();
  double lower_max = -upper_min;
  const double r_out = 2.0 / p.m;
  for (int v = 0; v < s.mesh.num_vertices(); ++v) {
    if (s.info[v].r < r_out) continue;
    const double z = chart_inverse(X[v]).z;
    if (s.info[v].sheet > 0) upper_min = std::min(upper_min, z);
    else lower_max = std::max(lower_max, z);
  }
  r.separation = upper_min - lower_max;
  r.margin = r.separation - r.required;

  // Along each meridian of the bridge, the radius grows and the height is monotone away from the waist.
  r.min_radial_step = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.n_theta; ++i)
    for (int dir : {1, -1})
      for (int j = 0; j < p.n_axial; ++j) {
        const int v0 = s.vid(s.waist_ring + dir * j, i), v1 = s.vid(s.waist_ring + dir * (j + 1), i);
        const DomainPoint q0 = chart_inverse(X[v0]), q1 = chart_inverse(X[v1]);
        const double dr = std::hypot(q1.x, q1.y) - std::hypot(q0.x, q0.y);
        const double dz = dir * (q1.z - q0.z);
        r.min_radial_step = std::min(r.min_radial_step, dr);
        if (!(dr > 0.0) || dz < 0.0) ++r.violations;
      }
  r.bridge_monotone = r.violations == 0;
  r.embedded = r.bridge_monotone && r.separation >= r.required;
  return r;
}

GenusReport genus_bookkeeping(const SurfaceMesh& s) {
  const TriMesh& m = s.mesh;
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : m.tri)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  // Doubled counts keep the half and quarter weights integral: 4 chi.
  long four_chi = 4L * static_cast<long>(m.tri.size());
  four_chi -= 4L * static_cast<long>(edges.size());
  four_chi += 2L * static_cast<long>(m.boundary.size());
  for (int v = 0; v < m.num_vertices(); ++v) {
    const int bits = std::popcount(static_cast<unsigned>(m.vface[v]));
    four_chi += bits == 0 ? 4 : bits == 1 ? 2 : 1;
  }
  GenusReport r;
  r.cells = s.params.m * s.params.m;
  r.cell_chi = four_chi / 4.0;
  r.closed_chi = static_cast<long>(r.cells) * four_chi / 4;
  r.genus = (2 - r.closed_chi) / 2;
  r.ok = r.genus == static_cast<long>(r.cells) + 1 && (static_cast<long>(r.cells) * four_chi) % 4 == 0;
  return r;
}

}  // namespace dcg
