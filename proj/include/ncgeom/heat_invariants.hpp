#pragma once

#include <map>

#include "ncgeom/operators.hpp"
#include "ncgeom/quadrature.hpp"

namespace ncgeom {

struct QuadratureSpec {
  int hermite_order = 24;     // must be even so the node set splits under reflection
  int tau_outer = 16;         // reference-path proper-time rule
  int tau_inner = 16;
  double eig_degeneracy_tol = 1e-9;  // diagnostic only; the closed forms need no branch switch
  bool use_fast_path = true;
};

// momentum rule: rescaled Gauss-Hermite nodes with the Gaussian reweighting
// and volume factors folded into the weights
struct XiRule {
  std::vector<RealVector> nodes;
  std::vector<double> weights;
};

// average of the normalized symbol trace over the grid; sets the momentum
// rescaling so the integrand is close to a unit Gaussian
inline RealMatrix mean_symbol_matrix(const NCFields& f) {
  const int n = f.grid.n;
  RealMatrix c = RealMatrix::Zero(n, n);
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu) {
      double acc = 0.0;
      for (int pt = 0; pt < f.grid.npoints; ++pt) acc += f.a[mu][nu][pt].trace().real();
      c(mu, nu) = acc / (f.grid.npoints * f.rep.N);
    }
  return 0.5 * (c + c.transpose());
}

inline XiRule build_xi_rule(const NCFields& f, const QuadratureSpec& q) {
  const int n = f.grid.n;
  if (q.hermite_order < 4) throw InputError("momentum rule order must be at least 4");
  if (q.hermite_order % 2 != 0) throw InputError("momentum rule order must be even");
  const RealMatrix c = mean_symbol_matrix(f);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(c);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw EllipticityError("mean symbol matrix is not positive definite");
  RealMatrix c_inv_sqrt = RealMatrix::Zero(n, n);
  double det_c = 1.0;
  for (int i = 0; i < n; ++i) {
    det_c *= es.eigenvalues()[i];
    c_inv_sqrt += (1.0 / std::sqrt(es.eigenvalues()[i])) *
                  (es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose());
  }
  const QuadRule gh = gauss_hermite(q.hermite_order);
  // weights with the Gaussian divided back out, so generic integrands of
  // near-Gaussian decay are handled accurately
  std::vector<double> rw(q.hermite_order);
  for (int i = 0; i < q.hermite_order; ++i) rw[i] = gh.weights[i] * std::exp(gh.nodes[i] * gh.nodes[i]);

  const double prefactor = 2.0 / (std::sqrt(det_c) * std::pow(M_PI, 0.5 * n));
  XiRule rule;
  std::vector<int> idx(n, 0);
  // reflection symmetry: keep nodes with positive leading component, double weight
  idx[0] = q.hermite_order / 2;
  while (true) {
    RealVector eta(n);
    double w = prefactor;
    for (int k = 0; k < n; ++k) {
      eta[k] = gh.nodes[idx[k]];
      w *= rw[idx[k]];
    }
    rule.nodes.push_back(c_inv_sqrt * eta);
    rule.weights.push_back(w);
    int k = n - 1;
    for (; k >= 0; --k) {
      ++idx[k];
      if (idx[k] < q.hermite_order) break;
      idx[k] = (k == 0) ? q.hermite_order : 0;
    }
    if (k < 0 || idx[0] >= q.hermite_order) break;
  }
  return rule;
}

namespace detail {

inline Matrix expm_scaled(const EigH& e, double s) {
  Matrix out = Matrix::Zero(e.V.rows(), e.V.rows());
  for (int i = 0; i < e.lam.size(); ++i)
    out += std::exp(s * e.lam[i]) * (e.V.col(i) * e.V.col(i).adjoint());
  return out;
}

struct WEntry {
  int target;
  Matrix W;
};
using WRow = std::vector<WEntry>;

// first-order stencil kernels of the operator and its adjoint, with aligned
// entry layouts so combinations can be formed row by row
inline void first_order_stencils(const NCFields& f, std::vector<WRow>& wd, std::vector<WRow>& wdbar) {
  const int npt = f.grid.npoints;
  const int N = f.rep.N;
  const Stencil st = Stencil::central(f.stencil_order);
  wd.assign(npt, {});
  wdbar.assign(npt, {});
  for (int pt = 0; pt < npt; ++pt) {
    Matrix dd = Matrix::Zero(N, N), db = Matrix::Zero(N, N);
    for (int mu = 0; mu < f.grid.n; ++mu) {
      dd += II * f.Gamma[mu][pt] * (f.rho[pt] * f.B[mu][pt] * f.rho_inv[pt]);
      db += II * f.rho_inv[pt] * (f.B[mu][pt] * f.rho[pt] * f.Gamma[mu][pt]);
    }
    wd[pt].push_back({pt, dd});
    wdbar[pt].push_back({pt, db});
    for (int mu = 0; mu < f.grid.n; ++mu) {
      const double invh = 1.0 / f.grid.spacing[mu];
      for (int j = -st.radius; j <= st.radius; ++j) {
        if (j == 0) continue;
        const double cj = (j > 0 ? st.taps[j - 1] : -st.taps[-j - 1]) * invh;
        const auto [tgt, ph] = f.grid.neighbor(pt, mu, j, f.twist);
        wd[pt].push_back({tgt, (II * cj * ph) * f.Gamma[mu][pt] * (f.rho[pt] * f.rho_inv[tgt])});
        wdbar[pt].push_back({tgt, (II * cj * ph) * f.rho_inv[pt] * (f.rho[tgt] * f.Gamma[mu][tgt])});
      }
    }
  }
}

// stencil kernel of the composed second-order operator; entries landing on the
// same site after wrapping are merged
inline std::vector<WRow> second_order_stencil(const std::vector<WRow>& wd,
                                              const std::vector<WRow>& wdbar) {
  const int npt = static_cast<int>(wd.size());
  std::vector<WRow> w2(npt);
  for (int x = 0; x < npt; ++x) {
    std::map<int, Matrix> acc;
    for (const auto& e1 : wdbar[x])
      for (const auto& e2 : wd[e1.target]) {
        auto it = acc.find(e2.target);
        if (it == acc.end())
          acc.emplace(e2.target, e1.W * e2.W);
        else
          it->second += e1.W * e2.W;
      }
    w2[x].reserve(acc.size());
    for (auto& [tgt, W] : acc) w2[x].push_back({tgt, std::move(W)});
  }
  return w2;
}

// stencil kernel of the momentum insertion -G(xi) D - Dbar G(xi)
inline std::vector<WRow> insertion_stencil(const std::vector<WRow>& wd,
                                           const std::vector<WRow>& wdbar, const GridMatrix& Gxi) {
  const int npt = static_cast<int>(wd.size());
  std::vector<WRow> wk(npt);
  for (int x = 0; x < npt; ++x) {
    wk[x].reserve(wd[x].size());
    for (size_t k = 0; k < wd[x].size(); ++k) {
      const int tgt = wd[x][k].target;
      wk[x].push_back({tgt, -Gxi[x] * wd[x][k].W - wdbar[x][k].W * Gxi[tgt]});
    }
  }
  return wk;
}

}  // namespace detail

// insertion operator acting on a matrix field: -G(xi)(D f) - Dbar(G(xi) f)
inline GridMatrix K_apply(const NCFields& f, const RealVector& xi, const GridMatrix& field) {
  const int npt = f.grid.npoints;
  const GridMatrix d = apply_dirac(f, field);
  GridMatrix gf(npt);
  for (int pt = 0; pt < npt; ++pt) gf[pt] = symbol_gamma(f, pt, xi) * field[pt];
  const GridMatrix db = apply_dirac_adjoint(f, gf);
  GridMatrix out(npt);
  for (int pt = 0; pt < npt; ++pt) out[pt] = -symbol_gamma(f, pt, xi) * d[pt] - db[pt];
  return out;
}

struct InvariantDensities {
  GridMatrix a0;
  GridMatrix a1;
  double a0_hermiticity_defect = 0.0;
  double a1_hermiticity_defect = 0.0;  // before forced symmetrization
};

namespace detail {

inline InvariantDensities densities_core(const NCFields& f, const QuadratureSpec& q,
                                         const std::vector<int>& xs_in) {
  require_elliptic(f);
  const int npt = f.grid.npoints;
  const int N = f.rep.N;
  std::vector<int> xs = xs_in;
  if (xs.empty()) {
    xs.resize(npt);
    for (int i = 0; i < npt; ++i) xs[i] = i;
  }

  const XiRule rule = build_xi_rule(f, q);
  std::vector<WRow> wd, wdbar;
  first_order_stencils(f, wd, wdbar);
  std::vector<WRow> w2;
  if (q.use_fast_path) w2 = second_order_stencil(wd, wdbar);

  // points whose local symbol data a sweep over xs can touch; the reference
  // path applies operators to whole fields, so it always needs every point
  std::vector<char> needed(npt, 0);
  if (static_cast<int>(xs.size()) == npt || !q.use_fast_path) {
    std::fill(needed.begin(), needed.end(), 1);
  } else {
    for (int x : xs) {
      needed[x] = 1;
      for (const auto& e1 : wd[x]) {
        needed[e1.target] = 1;
        for (const auto& e2 : wd[e1.target]) needed[e2.target] = 1;
      }
    }
  }

  InvariantDensities out;
  out.a0.assign(npt, Matrix::Zero(N, N));
  GridMatrix raw(npt, Matrix::Zero(N, N));
  std::vector<EigH> eig(npt);
  GridMatrix Gxi(npt);

  const QuadRule glo = gauss_legendre(q.tau_outer);
  const QuadRule gli = gauss_legendre(q.tau_inner);

  for (size_t node = 0; node < rule.nodes.size(); ++node) {
    const RealVector& xi = rule.nodes[node];
    const double w = rule.weights[node];
    for (int pt = 0; pt < npt; ++pt)
      if (needed[pt]) eig[pt] = eig_h(symbol_H(f, pt, xi));
    for (int x : xs) out.a0[x] += w * detail::expm_scaled(eig[x], -1.0);

    if (q.use_fast_path) {
      for (int pt = 0; pt < npt; ++pt)
        if (needed[pt]) Gxi[pt] = symbol_gamma(f, pt, xi);
      const std::vector<WRow> wk = insertion_stencil(wd, wdbar, Gxi);
      for (int x : xs) {
        Matrix t2 = Matrix::Zero(N, N);
        for (const auto& e : w2[x]) t2 += duhamel1_pre(eig[x], eig[e.target], e.W);
        Matrix t1 = Matrix::Zero(N, N);
        for (const auto& e1 : wk[x])
          for (const auto& e2 : wk[e1.target])
            t1 += duhamel2_pre(eig[x], eig[e1.target], eig[e2.target], e1.W, e2.W);
        raw[x] += w * (t1 - t2);
      }
    } else {
      // proper-time quadrature reference: exponentials evaluated as local
      // matrix functions, operators applied to whole matrix fields
      GridMatrix t2(npt, Matrix::Zero(N, N));
      for (int i = 0; i < q.tau_outer; ++i) {
        const double tau = glo.nodes[i];
        GridMatrix G(npt);
        for (int pt = 0; pt < npt; ++pt) G[pt] = detail::expm_scaled(eig[pt], -tau);
        const GridMatrix F = apply_operator(f, OperatorKind::dbar_d, G);
        for (int x : xs) t2[x] += glo.weights[i] * detail::expm_scaled(eig[x], -(1.0 - tau)) * F[x];
      }
      GridMatrix t1(npt, Matrix::Zero(N, N));
      for (int i = 0; i < q.tau_outer; ++i) {
        const double t2v = glo.nodes[i];
        for (int j = 0; j < q.tau_inner; ++j) {
          const double t1v = t2v * gli.nodes[j];
          const double wgt = glo.weights[i] * gli.weights[j] * t2v;  // simplex jacobian
          GridMatrix psi(npt);
          for (int pt = 0; pt < npt; ++pt) psi[pt] = detail::expm_scaled(eig[pt], -t1v);
          psi = K_apply(f, xi, psi);
          for (int pt = 0; pt < npt; ++pt)
            psi[pt] = detail::expm_scaled(eig[pt], -(t2v - t1v)) * psi[pt];
          psi = K_apply(f, xi, psi);
          for (int x : xs) t1[x] += wgt * detail::expm_scaled(eig[x], -(1.0 - t2v)) * psi[x];
        }
      }
      for (int x : xs) raw[x] += w * (t1[x] - t2[x]);
    }
  }

  out.a1.assign(npt, Matrix::Zero(N, N));
  for (int x : xs) {
    out.a0_hermiticity_defect = std::max(
        out.a0_hermiticity_defect, (out.a0[x] - out.a0[x].adjoint()).cwiseAbs().maxCoeff());
    out.a1_hermiticity_defect = std::max(
        out.a1_hermiticity_defect, (raw[x] - raw[x].adjoint()).cwiseAbs().maxCoeff());
    out.a0[x] = 0.5 * (out.a0[x] + out.a0[x].adjoint()).eval();
    out.a1[x] = 0.5 * (raw[x] + raw[x].adjoint());
  }
  return out;
}

}  // namespace detail

inline Matrix a0_density(const NCFields& f, int point, const QuadratureSpec& q) {
  require_elliptic(f);
  const XiRule rule = build_xi_rule(f, q);
  Matrix out = Matrix::Zero(f.rep.N, f.rep.N);
  for (size_t node = 0; node < rule.nodes.size(); ++node)
    out += rule.weights[node] * detail::expm_scaled(eig_h(symbol_H(f, point, rule.nodes[node])), -1.0);
  return 0.5 * (out + out.adjoint()).eval();
}

inline Matrix a1_density(const NCFields& f, int point, const QuadratureSpec& q) {
  return detail::densities_core(f, q, {point}).a1[point];
}

inline InvariantDensities invariant_densities(const NCFields& f, const QuadratureSpec& q) {
  return detail::densities_core(f, q, {});
}

// grid of zeroth densities alone; skips the first-order sweep when only the
// volume coefficient is needed
inline GridMatrix zeroth_density_grid(const NCFields& f, const QuadratureSpec& q) {
  require_elliptic(f);
  const XiRule rule = build_xi_rule(f, q);
  GridMatrix out(f.grid.npoints, Matrix::Zero(f.rep.N, f.rep.N));
  for (size_t node = 0; node < rule.nodes.size(); ++node)
    for (int pt = 0; pt < f.grid.npoints; ++pt)
      out[pt] +=
          rule.weights[node] * detail::expm_scaled(eig_h(symbol_H(f, pt, rule.nodes[node])), -1.0);
  for (auto& m : out) m = 0.5 * (m + m.adjoint()).eval();
  return out;
}

inline double global_a0(const NCFields& f, const QuadratureSpec& q, const GridMatrix* smear = nullptr) {
  const GridMatrix grid_a0 = zeroth_density_grid(f, q);
  const double cell = f.grid.cell_volume();
  double acc = 0.0;
  for (int pt = 0; pt < f.grid.npoints; ++pt)
    acc += (smear ? ((*smear)[pt] * grid_a0[pt]).trace() : grid_a0[pt].trace()).real() * cell;
  return acc;
}

struct InvariantReport {
  double A0 = 0.0;
  double A1 = 0.0;
  double A0_imag = 0.0;
  double A1_imag = 0.0;
  InvariantDensities densities;
  bool refined = false;
  double refine_delta_A0 = 0.0;
  double refine_delta_A1 = 0.0;
};

// grid totals of the smeared density traces; the volume element lives inside
// the densities, so the measure here is the plain cell volume
inline InvariantReport global_invariants(const NCFields& f, const QuadratureSpec& q,
                                         bool refine = false, const GridMatrix* smear = nullptr) {
  InvariantReport rep;
  rep.densities = invariant_densities(f, q);
  const double cell = f.grid.cell_volume();
  cdouble A0 = 0.0, A1 = 0.0;
  for (int pt = 0; pt < f.grid.npoints; ++pt) {
    const Matrix F = smear ? (*smear)[pt] : Matrix(Matrix::Identity(f.rep.N, f.rep.N));
    A0 += (F * rep.densities.a0[pt]).trace() * cell;
    A1 += (F * rep.densities.a1[pt]).trace() * cell;
  }
  rep.A0 = A0.real();
  rep.A1 = A1.real();
  rep.A0_imag = A0.imag();
  rep.A1_imag = A1.imag();
  if (refine) {
    QuadratureSpec q2 = q;
    q2.hermite_order += 8;
    const InvariantReport finer = global_invariants(f, q2, false, smear);
    rep.refined = true;
    rep.refine_delta_A0 = finer.A0 - rep.A0;
    rep.refine_delta_A1 = finer.A1 - rep.A1;
  }
  return rep;
}

struct HeatTraceCheck {
  double A0_fit = 0.0;
  double A1_fit = 0.0;
  double residual_rms = 0.0;
  bool window_warning = false;
};

// small-time fit of the rescaled heat trace of the dense second-order
// operator against the first two expansion coefficients; an optional smearing
// field S replaces tr exp(-tM) by tr(S exp(-tM))
inline HeatTraceCheck heat_trace_crosscheck(const NCFields& f, const std::vector<double>& t_list,
                                            int cap = 8192, const GridMatrix* smear = nullptr) {
  if (t_list.size() < 2) throw InputError("heat trace fit needs at least two times");
  const Matrix raw = assemble_matrix(f, OperatorKind::dbar_d, cap);
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (raw + raw.adjoint())));
  const RealVector& lam = es.eigenvalues();
  RealVector mode_weight = RealVector::Ones(lam.size());
  if (smear) {
    const int N = f.rep.N;
    for (int i = 0; i < lam.size(); ++i) {
      cdouble acc = 0.0;
      for (int pt = 0; pt < f.grid.npoints; ++pt) {
        const Vector v = es.eigenvectors().col(i).segment(pt * N, N);
        acc += v.dot((*smear)[pt] * v);
      }
      mode_weight[i] = acc.real();
    }
  }
  const int n = f.grid.n;
  const int m = static_cast<int>(t_list.size());
  RealMatrix X(m, 2);
  RealVector y(m);
  for (int k = 0; k < m; ++k) {
    const double t = t_list[k];
    double tr = 0.0;
    for (int i = static_cast<int>(lam.size()) - 1; i >= 0; --i) tr += mode_weight[i] * std::exp(-t * lam[i]);
    y[k] = std::pow(4.0 * M_PI * t, 0.5 * n) * tr;
    X(k, 0) = 1.0;
    X(k, 1) = t;
  }
  const RealVector beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  HeatTraceCheck out;
  out.A0_fit = beta[0];
  out.A1_fit = beta[1];
  out.residual_rms = std::sqrt((X * beta - y).squaredNorm() / m);
  out.window_warning = out.residual_rms > 1e-2 * std::max(1e-12, std::abs(out.A0_fit));
  return out;
}

}  // namespace ncgeom
