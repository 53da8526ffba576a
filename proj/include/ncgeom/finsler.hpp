#pragma once

// Direction-dependent geometry carried by the eigenvalue branches of the
// quadratic matrix symbol: each simple branch h(xi) defines a metric as half
// its momentum Hessian, with raising/lowering between xi and its image u.

#include <limits>

#include "nc_fields.hpp"

namespace ncgeom {

struct BranchSet {
  RealVector values;  // ascending eigenvalues of the symbol at (x, xi)
  RealVector gaps;    // distance to the nearest adjacent eigenvalue
};

inline BranchSet eigen_branches(const NCFields& f, int point, const RealVector& xi) {
  if (xi.size() != f.grid.n) throw InputError("direction has wrong dimension");
  if (xi.norm() == 0.0) throw InputError("branch evaluation needs a nonzero direction");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symbol_H(f, point, xi));
  BranchSet out;
  out.values = es.eigenvalues();
  if (out.values.minCoeff() <= 0.0)
    throw EllipticityError("symbol has a non-positive eigenvalue along a probe direction");
  const int m = static_cast<int>(out.values.size());
  out.gaps.resize(m);
  for (int i = 0; i < m; ++i) {
    double gap = std::numeric_limits<double>::infinity();
    if (i > 0) gap = std::min(gap, out.values[i] - out.values[i - 1]);
    if (i + 1 < m) gap = std::min(gap, out.values[i + 1] - out.values[i]);
    out.gaps[i] = gap;
  }
  return out;
}

namespace detail {

// relative gap below which a branch counts as an exact multiplet; such
// clusters are smooth in sorted order as long as they do not split
constexpr double kMultipletTol = 1e-8;

struct BranchProbe {
  const NCFields& f;
  int point;
  int branch;
  double max_gap = 0.0;

  double operator()(const RealVector& xi) {
    const BranchSet bs = eigen_branches(f, point, xi);
    max_gap = std::max(max_gap, bs.gaps[branch] == std::numeric_limits<double>::infinity()
                                    ? 0.0
                                    : bs.gaps[branch]);
    return bs.values[branch];
  }
};

// one central-difference Hessian at absolute step s
inline RealMatrix hessian_at_step(BranchProbe& probe, const RealVector& xi, double s) {
  const int n = xi.size();
  const double h0 = probe(xi);
  RealMatrix hess(n, n);
  for (int mu = 0; mu < n; ++mu) {
    RealVector up = xi, dn = xi;
    up[mu] += s;
    dn[mu] -= s;
    hess(mu, mu) = (probe(up) - 2.0 * h0 + probe(dn)) / (s * s);
    for (int nu = mu + 1; nu < n; ++nu) {
      RealVector pp = xi, pm = xi, mp = xi, mm = xi;
      pp[mu] += s; pp[nu] += s;
      pm[mu] += s; pm[nu] -= s;
      mp[mu] -= s; mp[nu] += s;
      mm[mu] -= s; mm[nu] -= s;
      hess(mu, nu) = (probe(pp) - probe(pm) - probe(mp) + probe(mm)) / (4.0 * s * s);
      hess(nu, mu) = hess(mu, nu);
    }
  }
  return hess;
}

}  // namespace detail

struct FinslerBranch {
  int branch_index = 0;
  double h = 0.0;
  double gap = 0.0;
  RealMatrix g_up;    // contravariant metric: half the momentum Hessian
  RealVector u;       // raised direction g_up * xi
  RealMatrix g_down;  // inverse metric
  double reconstruction_residual = 0.0;  // max |g_down * u - xi|
  bool metric_positive = true;
  double metric_min_eigenvalue = 0.0;
};

inline RealMatrix finsler_metric(const NCFields& f, int point, const RealVector& xi, int branch,
                                 double fd_step = 1e-4, bool* positive = nullptr,
                                 double* min_eigenvalue = nullptr) {
  const BranchSet base = eigen_branches(f, point, xi);
  if (branch < 0 || branch >= base.values.size()) throw InputError("branch index out of range");
  const double h = base.values[branch];
  const double scale = base.values.maxCoeff();
  const double gap = std::isinf(base.gaps[branch]) ? scale : base.gaps[branch];
  const bool multiplet = gap <= detail::kMultipletTol * scale;
  const double s = fd_step * xi.norm();
  const double slope = 2.0 * h / xi.norm();  // degree-2 homogeneity sets the local slope scale
  if (!multiplet && gap <= 10.0 * s * slope)
    throw DegenerateBranch("branch gap too small for stable momentum differentiation");

  detail::BranchProbe probe{f, point, branch};
  const RealMatrix coarse = detail::hessian_at_step(probe, xi, s);
  const RealMatrix fine = detail::hessian_at_step(probe, xi, 0.5 * s);
  if (multiplet && probe.max_gap > detail::kMultipletTol * scale)
    throw DegenerateBranch("degenerate branch splits under momentum probes");

  RealMatrix g = 0.5 * (4.0 * fine - coarse) / 3.0;
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(g);
  if (min_eigenvalue) *min_eigenvalue = es.eigenvalues().minCoeff();
  if (positive) *positive = es.eigenvalues().minCoeff() > 0.0;
  return g;
}

struct RaisedDirection {
  RealVector u;
  RealMatrix g_down;
  double residual = 0.0;
};

inline RaisedDirection finsler_covariant(const RealMatrix& g_up, const RealVector& xi) {
  Eigen::FullPivLU<RealMatrix> lu(g_up);
  if (!lu.isInvertible()) throw MetricError("direction metric is singular");
  RaisedDirection out;
  out.u = g_up * xi;
  out.g_down = lu.inverse();
  out.residual = (out.g_down * out.u - xi).cwiseAbs().maxCoeff();
  return out;
}

inline FinslerBranch finsler_branch(const NCFields& f, int point, const RealVector& xi, int branch,
                                    double fd_step = 1e-4) {
  FinslerBranch out;
  out.branch_index = branch;
  const BranchSet base = eigen_branches(f, point, xi);
  if (branch < 0 || branch >= base.values.size()) throw InputError("branch index out of range");
  out.h = base.values[branch];
  out.gap = std::isinf(base.gaps[branch]) ? 0.0 : base.gaps[branch];
  out.g_up = finsler_metric(f, point, xi, branch, fd_step, &out.metric_positive,
                            &out.metric_min_eigenvalue);
  const RaisedDirection raised = finsler_covariant(out.g_up, xi);
  out.u = raised.u;
  out.g_down = raised.g_down;
  out.reconstruction_residual = raised.residual;
  return out;
}

// evenly spread unit directions for identity sweeps; in two dimensions a
// circle, otherwise low-discrepancy points on the sphere
inline std::vector<RealVector> direction_sample(int n, int count) {
  if (n < 1 || count < 1) throw InputError("direction sample needs positive dimension and count");
  std::vector<RealVector> dirs;
  dirs.reserve(count);
  if (n == 1) {
    for (int i = 0; i < count; ++i) dirs.push_back(RealVector::Constant(1, i % 2 == 0 ? 1.0 : -1.0));
    return dirs;
  }
  if (n == 2) {
    for (int i = 0; i < count; ++i) {
      const double th = 2.0 * M_PI * (i + 0.5) / count;
      RealVector v(2);
      v << std::cos(th), std::sin(th);
      dirs.push_back(v);
    }
    return dirs;
  }
  SplitMix64 rng(2654435769u);
  for (int i = 0; i < count; ++i) {
    RealVector v(n);
    double nrm = 0.0;
    do {
      for (int k = 0; k < n; ++k) v[k] = rng.normal();
      nrm = v.norm();
    } while (nrm < 1e-8);
    dirs.push_back(v / nrm);
  }
  return dirs;
}

}  // namespace ncgeom
