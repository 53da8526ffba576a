#pragma once

// Field content of a matrix geometry on a periodic grid: Dirac matrices
// Gamma^mu(x) whose anticommutator is the matrix metric a^{mu nu}(x), the
// half-density factor rho(x), and the connection components B_mu(x).
// Builders cover the commutative case (fields derived from a Riemannian
// metric) and trigonometric-mode deformations on top of any base.

#include "clifford.hpp"
#include "forms.hpp"
#include "riemannian.hpp"

namespace ncgeom {

struct NCFields {
  TorusGrid grid;
  GammaRep rep;
  double kappa = 0.0;
  int stencil_order = 4;
  std::vector<GridMatrix> Gamma;               // Gamma[mu][point]
  std::vector<std::vector<GridMatrix>> a;      // a[mu][nu][point], Hermitian
  GridMatrix rho;                              // Hermitian positive, weight 1/2
  GridMatrix rho_inv;
  std::vector<GridMatrix> B;                   // anti-Hermitian connection
  std::vector<double> twist;                   // boundary phases per axis, empty = periodic
};

// quadratic symbol of the second-order operator: sum a^{mu nu} xi_mu xi_nu
inline Matrix symbol_H(const NCFields& f, int point, const RealVector& xi) {
  const int n = f.grid.n;
  Matrix H = Matrix::Zero(f.rep.N, f.rep.N);
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu) H += (xi[mu] * xi[nu]) * f.a[mu][nu][point];
  return H;
}

// contraction of the Dirac matrices with a covector
inline Matrix symbol_gamma(const NCFields& f, int point, const RealVector& xi) {
  Matrix G = Matrix::Zero(f.rep.N, f.rep.N);
  for (int mu = 0; mu < f.grid.n; ++mu) G += xi[mu] * f.Gamma[mu][point];
  return G;
}

inline void recompute_a_from_gamma(NCFields& f) {
  const int n = f.grid.n;
  f.a.assign(n, std::vector<GridMatrix>(n, GridMatrix(f.grid.npoints)));
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu)
      for (int pt = 0; pt < f.grid.npoints; ++pt)
        f.a[mu][nu][pt] = 0.5 * (f.Gamma[mu][pt] * f.Gamma[nu][pt] + f.Gamma[nu][pt] * f.Gamma[mu][pt]);
}

// structural diagnostics; shape errors throw, algebraic defects are reported
struct FieldDefects {
  double a_hermitian = 0.0;
  double a_symmetric = 0.0;
  double rho_hermitian = 0.0;
  double b_antihermitian = 0.0;
};

inline FieldDefects field_defects(const NCFields& f) {
  const int n = f.grid.n;
  if (static_cast<int>(f.Gamma.size()) != n || static_cast<int>(f.B.size()) != n ||
      static_cast<int>(f.a.size()) != n)
    throw InputError("field component counts do not match the dimension");
  FieldDefects d;
  for (int pt = 0; pt < f.grid.npoints; ++pt) {
    for (int mu = 0; mu < n; ++mu) {
      d.b_antihermitian = std::max(d.b_antihermitian,
                                   (f.B[mu][pt] + f.B[mu][pt].adjoint()).cwiseAbs().maxCoeff());
      for (int nu = 0; nu < n; ++nu) {
        d.a_hermitian = std::max(d.a_hermitian,
                                 (f.a[mu][nu][pt] - f.a[mu][nu][pt].adjoint()).cwiseAbs().maxCoeff());
        d.a_symmetric = std::max(d.a_symmetric,
                                 (f.a[mu][nu][pt] - f.a[nu][mu][pt]).cwiseAbs().maxCoeff());
      }
    }
    d.rho_hermitian = std::max(d.rho_hermitian, (f.rho[pt] - f.rho[pt].adjoint()).cwiseAbs().maxCoeff());
  }
  return d;
}

// --------------------------------------------------------------------------
// commutative construction: Gamma from the frame, a from the inverse metric,
// rho the scalar quarter-root density, B the frame-connection bilinear
// --------------------------------------------------------------------------

inline NCFields commutative_fields(const MetricField& metric, const GammaRep& rep, int stencil_order = 4) {
  if (metric.grid.n > rep.n) throw InputError("representation has too few generators for the grid dimension");
  NCFields f;
  f.grid = metric.grid;
  f.rep = rep;
  f.kappa = 0.0;
  f.stencil_order = stencil_order;
  const int n = f.grid.n;
  const int N = rep.N;
  const VielbeinField v = vielbein_from_metric(metric);
  const auto omega = spin_connection(v, stencil_order);
  const GridRealMatrix ginv = metric.inverse();
  const GridReal sg = metric.sqrt_det();

  f.Gamma.assign(n, GridMatrix(f.grid.npoints));
  f.a.assign(n, std::vector<GridMatrix>(n, GridMatrix(f.grid.npoints)));
  f.rho.resize(f.grid.npoints);
  f.rho_inv.resize(f.grid.npoints);
  f.B.assign(n, GridMatrix(f.grid.npoints));

  for (int pt = 0; pt < f.grid.npoints; ++pt) {
    for (int mu = 0; mu < n; ++mu) {
      Matrix G = Matrix::Zero(N, N);
      for (int a_idx = 0; a_idx < n; ++a_idx) G += v.e_inv[pt](mu, a_idx) * rep.gamma[a_idx];
      f.Gamma[mu][pt] = G;
      for (int nu = 0; nu < n; ++nu) f.a[mu][nu][pt] = ginv[pt](mu, nu) * Matrix::Identity(N, N);
      Matrix Bm = Matrix::Zero(N, N);
      for (int a_idx = 0; a_idx < n; ++a_idx)
        for (int b_idx = 0; b_idx < n; ++b_idx)
          Bm += omega[pt][mu](a_idx, b_idx) * (rep.gamma[a_idx] * rep.gamma[b_idx]);
      f.B[mu][pt] = -0.25 * Bm;
    }
    const double r = std::sqrt(sg[pt]);  // fourth root of det g
    f.rho[pt] = r * Matrix::Identity(N, N);
    f.rho_inv[pt] = (1.0 / r) * Matrix::Identity(N, N);
  }
  return f;
}

// --------------------------------------------------------------------------
// trigonometric deformation terms
// --------------------------------------------------------------------------

// one Fourier mode attached to a Clifford basis element; blade entries are
// 0-based generator indices, strictly increasing
struct DeformationTerm {
  int mu = 0;
  std::vector<int> blade;
  double amplitude = 0.0;
  std::vector<int> mode;
  double phase = 0.0;
};

struct ScalarTerm {
  double amplitude = 0.0;
  std::vector<int> mode;
  double phase = 0.0;
};

struct DeformationSpec {
  double kappa = 0.0;
  std::vector<DeformationTerm> alpha;  // added to Gamma, Hermitian
  std::vector<ScalarTerm> phi;         // log-scales rho
  std::vector<DeformationTerm> b;      // added to B, anti-Hermitian
};

// the basis element for a blade, phase-adjusted to be Hermitian
inline Matrix hermitian_blade(const GammaRep& rep, const std::vector<int>& blade) {
  const Matrix M = gamma_antisym(rep, blade);
  const double herm = (M - M.adjoint()).cwiseAbs().maxCoeff();
  const double anti = (M + M.adjoint()).cwiseAbs().maxCoeff();
  if (herm <= anti) return M;
  return II * M;
}

inline GridReal mode_field(const TorusGrid& grid, double amplitude, const std::vector<int>& mode,
                           double phase) {
  if (static_cast<int>(mode.size()) != grid.n) throw InputError("mode vector has wrong dimension");
  GridReal out(grid.npoints);
  for (int pt = 0; pt < grid.npoints; ++pt) {
    const auto x = grid.point(pt);
    double arg = phase;
    for (int mu = 0; mu < grid.n; ++mu) arg += 2.0 * M_PI * mode[mu] * x[mu] / grid.lengths[mu];
    out[pt] = amplitude * std::cos(arg);
  }
  return out;
}

// overlay a deformation on a base geometry; the matrix metric is rebuilt from
// the deformed Dirac matrices so its defining relation holds by construction
inline NCFields apply_deformation(const NCFields& base, const DeformationSpec& spec) {
  NCFields f = base;
  f.kappa = spec.kappa;
  const int n = f.grid.n;
  for (const auto& term : spec.alpha) {
    if (term.mu < 0 || term.mu >= n) throw InputError("deformation axis out of range");
    const Matrix blade = hermitian_blade(f.rep, term.blade);
    const GridReal c = mode_field(f.grid, term.amplitude, term.mode, term.phase);
    for (int pt = 0; pt < f.grid.npoints; ++pt) f.Gamma[term.mu][pt] += (spec.kappa * c[pt]) * blade;
  }
  recompute_a_from_gamma(f);
  if (!spec.phi.empty()) {
    GridReal phi(f.grid.npoints, 0.0);
    for (const auto& term : spec.phi) {
      const GridReal c = mode_field(f.grid, term.amplitude, term.mode, term.phase);
      for (int pt = 0; pt < f.grid.npoints; ++pt) phi[pt] += c[pt];
    }
    for (int pt = 0; pt < f.grid.npoints; ++pt) {
      const double s = std::exp(spec.kappa * phi[pt]);
      f.rho[pt] *= s;
      f.rho_inv[pt] /= s;
    }
  }
  for (const auto& term : spec.b) {
    if (term.mu < 0 || term.mu >= n) throw InputError("connection term axis out of range");
    const Matrix blade = hermitian_blade(f.rep, term.blade);
    const GridReal c = mode_field(f.grid, term.amplitude, term.mode, term.phase);
    for (int pt = 0; pt < f.grid.npoints; ++pt)
      f.B[term.mu][pt] += (II * spec.kappa * c[pt]) * blade;
  }
  return f;
}

// --------------------------------------------------------------------------
// ellipticity sampling: the quadratic symbol must be positive definite for
// every sampled direction at every grid point
// --------------------------------------------------------------------------

struct EllipticityReport {
  double min_eigenvalue = 0.0;
  double mean_eigenvalue = 0.0;
  int worst_point = -1;
};

inline EllipticityReport sample_ellipticity(const NCFields& f, int directions_per_axis_pair = 8) {
  const int n = f.grid.n;
  std::vector<RealVector> dirs;
  for (int mu = 0; mu < n; ++mu) {
    RealVector e = RealVector::Zero(n);
    e[mu] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  SplitMix64 rng(0x5eedf1e1d5ULL);
  const int total = 2 * n * directions_per_axis_pair;
  while (static_cast<int>(dirs.size()) < total) {
    RealVector d(n);
    for (int mu = 0; mu < n; ++mu) d[mu] = rng.normal();
    const double nrm = d.norm();
    if (nrm < 1e-8) continue;
    dirs.push_back(d / nrm);
  }
  EllipticityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::int64_t count = 0;
  for (int pt = 0; pt < f.grid.npoints; ++pt) {
    for (const auto& d : dirs) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(symbol_H(f, pt, d));
      const double lo = es.eigenvalues().minCoeff();
      sum += es.eigenvalues().sum();
      count += es.eigenvalues().size();
      if (lo < rep.min_eigenvalue) {
        rep.min_eigenvalue = lo;
        rep.worst_point = pt;
      }
    }
  }
  rep.mean_eigenvalue = sum / static_cast<double>(count);
  return rep;
}

inline EllipticityReport require_elliptic(const NCFields& f, double eps_pd = 1e-6) {
  const EllipticityReport rep = sample_ellipticity(f);
  if (!(rep.min_eigenvalue > eps_pd * rep.mean_eigenvalue))
    throw EllipticityError("sampled symbol eigenvalue " + std::to_string(rep.min_eigenvalue) +
                           " below threshold at point " + std::to_string(rep.worst_point));
  return rep;
}

// --------------------------------------------------------------------------
// covariant matrix metric: blockwise inverse of the n N x n N Hermitian
// matrix with blocks a^{mu nu}; symmetry of the result in (mu, nu) after
// conjugate transposition is automatic
// --------------------------------------------------------------------------

inline std::vector<std::vector<GridMatrix>> inverse_b(const NCFields& f, double cond_cap = 1e12) {
  const int n = f.grid.n;
  const int N = f.rep.N;
  std::vector<std::vector<GridMatrix>> b(n, std::vector<GridMatrix>(n, GridMatrix(f.grid.npoints)));
  Matrix M(n * N, n * N);
  for (int pt = 0; pt < f.grid.npoints; ++pt) {
    for (int mu = 0; mu < n; ++mu)
      for (int nu = 0; nu < n; ++nu) M.block(mu * N, nu * N, N, N) = f.a[mu][nu][pt];
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.adjoint()));
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    const double lo = es.eigenvalues().cwiseAbs().minCoeff();
    if (!(lo > 0.0) || hi / lo > cond_cap)
      throw SingularAMap("block metric not invertible at point " + std::to_string(pt));
    const Matrix Minv = M.inverse();
    for (int mu = 0; mu < n; ++mu)
      for (int nu = 0; nu < n; ++nu) b[mu][nu][pt] = Minv.block(mu * N, nu * N, N, N);
  }
  return b;
}

// --------------------------------------------------------------------------
// gauge transformation by a unitary matrix field
// --------------------------------------------------------------------------

inline NCFields gauge_transform(const NCFields& in, const GridMatrix& U) {
  if (static_cast<int>(U.size()) != in.grid.npoints) throw InputError("gauge field has wrong size");
  const int n = in.grid.n;
  NCFields f = in;
  for (int pt = 0; pt < in.grid.npoints; ++pt) {
    const double defect = (U[pt] * U[pt].adjoint() - Matrix::Identity(in.rep.N, in.rep.N))
                              .cwiseAbs()
                              .maxCoeff();
    if (defect > 1e-10) throw InputError("gauge field is not unitary at point " + std::to_string(pt));
  }
  for (int pt = 0; pt < in.grid.npoints; ++pt) {
    const Matrix Ud = U[pt].adjoint();
    for (int mu = 0; mu < n; ++mu) {
      f.Gamma[mu][pt] = U[pt] * in.Gamma[mu][pt] * Ud;
      for (int nu = 0; nu < n; ++nu) f.a[mu][nu][pt] = U[pt] * in.a[mu][nu][pt] * Ud;
      f.B[mu][pt] = U[pt] * in.B[mu][pt] * Ud;
    }
    f.rho[pt] = U[pt] * in.rho[pt] * Ud;
    f.rho_inv[pt] = U[pt] * in.rho_inv[pt] * Ud;
  }
  for (int mu = 0; mu < n; ++mu) {
    const GridMatrix dU = derivative(in.grid, U, mu, in.stencil_order);
    for (int pt = 0; pt < in.grid.npoints; ++pt) f.B[mu][pt] -= dU[pt] * U[pt].adjoint();
  }
  return f;
}

}  // namespace ncgeom
