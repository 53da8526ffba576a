#pragma once

// Classical Riemannian machinery on periodic grids: metric fields, triangular
// vielbeins, the torsion-free metric spin connection, curvature from
// coordinate derivatives, and the two global heat invariants of the scalar
// reference theory.  Everything here is the commutative baseline the matrix
// calculus is checked against.

#include "clifford.hpp"
#include "grid.hpp"

namespace ncgeom {

struct MetricField {
  TorusGrid grid;
  GridRealMatrix g;  // symmetric positive definite per point

  static MetricField flat(const TorusGrid& grid, const RealMatrix& constant) {
    MetricField m;
    m.grid = grid;
    m.g.assign(static_cast<std::size_t>(grid.npoints), constant);
    m.validate();
    return m;
  }

  // conformal metric exp(2 sigma) * delta
  static MetricField conformal(const TorusGrid& grid, const GridReal& sigma) {
    if (static_cast<int>(sigma.size()) != grid.npoints) throw InputError("conformal factor has wrong size");
    MetricField m;
    m.grid = grid;
    m.g.resize(sigma.size());
    for (std::size_t p = 0; p < sigma.size(); ++p)
      m.g[p] = std::exp(2.0 * sigma[p]) * RealMatrix::Identity(grid.n, grid.n);
    return m;
  }

  void validate() const {
    for (const RealMatrix& gp : g) {
      if (gp.rows() != grid.n || gp.cols() != grid.n) throw MetricError("metric block has wrong dimension");
      if ((gp - gp.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + gp.cwiseAbs().maxCoeff()))
        throw MetricError("metric is not symmetric");
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(gp);
      if (es.eigenvalues().minCoeff() <= 0.0) throw MetricError("metric is not positive definite");
    }
  }

  GridReal sqrt_det() const {
    GridReal out(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) out[p] = std::sqrt(g[p].determinant());
    return out;
  }

  GridRealMatrix inverse() const {
    GridRealMatrix out(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) out[p] = g[p].inverse();
    return out;
  }
};

struct VielbeinField {
  TorusGrid grid;
  GridRealMatrix e;      // e(a, mu), lower triangular, e^T e = g
  GridRealMatrix e_inv;  // e_inv(mu, a), inverse frame
};

// lower-triangular frame from the reversed Cholesky factorisation of g
inline VielbeinField vielbein_from_metric(const MetricField& metric) {
  metric.validate();
  const int n = metric.grid.n;
  RealMatrix P = RealMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) P(i, n - 1 - i) = 1.0;
  VielbeinField v;
  v.grid = metric.grid;
  v.e.resize(metric.g.size());
  v.e_inv.resize(metric.g.size());
  for (std::size_t p = 0; p < metric.g.size(); ++p) {
    const RealMatrix flipped = P * metric.g[p] * P;
    Eigen::LLT<RealMatrix> llt(flipped);
    if (llt.info() != Eigen::Success) throw MetricError("Cholesky factorisation failed");
    const RealMatrix L = llt.matrixL();
    v.e[p] = P * L.transpose() * P;  // lower triangular with e^T e = g
    v.e_inv[p] = v.e[p].inverse();
  }
  return v;
}

// spin connection coefficients omega^{ab}_mu from antisymmetrised frame
// derivatives; returned as omega[point][mu](a, b), antisymmetric in (a, b)
inline std::vector<std::vector<RealMatrix>> spin_connection(const VielbeinField& v, int order = 4) {
  const TorusGrid& grid = v.grid;
  const int n = grid.n;
  // de[nu][point](a, mu) = partial_nu e^a_mu
  std::vector<GridRealMatrix> de(n);
  for (int nu = 0; nu < n; ++nu) {
    de[nu].resize(v.e.size());
    GridReal comp(grid.npoints);
    for (int a = 0; a < n; ++a)
      for (int mu = 0; mu < n; ++mu) {
        for (int p = 0; p < grid.npoints; ++p) comp[p] = v.e[p](a, mu);
        const GridReal d = derivative(grid, comp, nu, order);
        for (int p = 0; p < grid.npoints; ++p) {
          if (a == 0 && mu == 0) de[nu][p] = RealMatrix::Zero(n, n);
          de[nu][p](a, mu) = d[p];
        }
      }
  }
  std::vector<std::vector<RealMatrix>> omega(v.e.size(), std::vector<RealMatrix>(n));
  for (std::size_t p = 0; p < v.e.size(); ++p) {
    const RealMatrix& einv = v.e_inv[p];  // einv(nu, a) = e^{a nu}
    auto antisym_d = [&](int nu, int b, int mu) {  // partial_{[nu} e^b_{mu]}
      return 0.5 * (de[nu][p](b, mu) - de[mu][p](b, nu));
    };
    for (int mu = 0; mu < n; ++mu) {
      RealMatrix om = RealMatrix::Zero(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double val = 0.0;
          for (int nu = 0; nu < n; ++nu) {
            val += einv(nu, a) * antisym_d(nu, b, mu);
            val -= einv(nu, b) * antisym_d(nu, a, mu);
          }
          for (int c = 0; c < n; ++c)
            for (int nu = 0; nu < n; ++nu)
              for (int lam = 0; lam < n; ++lam)
                val += v.e[p](c, mu) * einv(nu, a) * einv(lam, b) * antisym_d(nu, c, lam);
          om(a, b) = val;
        }
      omega[p][mu] = om;
    }
  }
  return omega;
}

// Christoffel symbols Gamma^lam_{mu nu} per point
inline std::vector<std::vector<RealMatrix>> christoffels(const MetricField& metric, int order = 4) {
  const TorusGrid& grid = metric.grid;
  const int n = grid.n;
  std::vector<GridRealMatrix> dg(n);  // dg[sigma][p](mu, nu)
  GridReal comp(grid.npoints);
  for (int s = 0; s < n; ++s) {
    dg[s].assign(metric.g.size(), RealMatrix::Zero(n, n));
    for (int mu = 0; mu < n; ++mu)
      for (int nu = mu; nu < n; ++nu) {
        for (int p = 0; p < grid.npoints; ++p) comp[p] = metric.g[p](mu, nu);
        const GridReal d = derivative(grid, comp, s, order);
        for (int p = 0; p < grid.npoints; ++p) {
          dg[s][p](mu, nu) = d[p];
          dg[s][p](nu, mu) = d[p];
        }
      }
  }
  const GridRealMatrix ginv = metric.inverse();
  std::vector<std::vector<RealMatrix>> gam(metric.g.size(), std::vector<RealMatrix>(n));
  for (std::size_t p = 0; p < metric.g.size(); ++p)
    for (int lam = 0; lam < n; ++lam) {
      RealMatrix m = RealMatrix::Zero(n, n);
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) {
          double val = 0.0;
          for (int s = 0; s < n; ++s)
            val += 0.5 * ginv[p](lam, s) * (dg[mu][p](s, nu) + dg[nu][p](s, mu) - dg[s][p](mu, nu));
          m(mu, nu) = val;
        }
      gam[p][lam] = m;
    }
  return gam;
}

// Ricci tensor R_{mu nu} from coordinate derivatives of the Christoffels
inline GridRealMatrix ricci_tensor(const MetricField& metric, int order = 4) {
  const TorusGrid& grid = metric.grid;
  const int n = grid.n;
  const auto gam = christoffels(metric, order);
  // dgam[s][p][lam](mu, nu) = partial_s Gamma^lam_{mu nu}
  std::vector<std::vector<std::vector<RealMatrix>>> dgam(
      n, std::vector<std::vector<RealMatrix>>(metric.g.size(),
                                              std::vector<RealMatrix>(n, RealMatrix::Zero(n, n))));
  GridReal comp(grid.npoints);
  for (int s = 0; s < n; ++s)
    for (int lam = 0; lam < n; ++lam)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = mu; nu < n; ++nu) {
          for (int p = 0; p < grid.npoints; ++p) comp[p] = gam[p][lam](mu, nu);
          const GridReal d = derivative(grid, comp, s, order);
          for (int p = 0; p < grid.npoints; ++p) {
            dgam[s][p][lam](mu, nu) = d[p];
            dgam[s][p][lam](nu, mu) = d[p];
          }
        }
  GridRealMatrix ric(metric.g.size());
  for (std::size_t p = 0; p < metric.g.size(); ++p) {
    RealMatrix r = RealMatrix::Zero(n, n);
    for (int s = 0; s < n; ++s)
      for (int nu = 0; nu < n; ++nu) {
        double val = 0.0;
        for (int mu = 0; mu < n; ++mu) {
          val += dgam[mu][p][mu](nu, s) - dgam[nu][p][mu](mu, s);
          for (int a = 0; a < n; ++a)
            val += gam[p][mu](mu, a) * gam[p][a](nu, s) - gam[p][mu](nu, a) * gam[p][a](mu, s);
        }
        r(s, nu) = val;
      }
    ric[p] = 0.5 * (r + r.transpose());
  }
  return ric;
}

inline GridReal scalar_curvature(const MetricField& metric, int order = 4) {
  const GridRealMatrix ric = ricci_tensor(metric, order);
  const GridRealMatrix ginv = metric.inverse();
  GridReal out(metric.g.size());
  for (std::size_t p = 0; p < metric.g.size(); ++p) out[p] = (ginv[p] * ric[p]).trace();
  return out;
}

struct CommutativeInvariants {
  double a0 = 0.0;  // N * integral of sqrt(det g)
  double a1 = 0.0;  // -(N/12) * integral of R sqrt(det g)
};

inline CommutativeInvariants commutative_invariants(const MetricField& metric, int spinor_dim, int order = 4) {
  const GridReal sg = metric.sqrt_det();
  const GridReal R = scalar_curvature(metric, order);
  const double dv = metric.grid.cell_volume();
  CommutativeInvariants inv;
  for (std::size_t p = 0; p < sg.size(); ++p) {
    inv.a0 += spinor_dim * sg[p] * dv;
    inv.a1 += -(spinor_dim / 12.0) * R[p] * sg[p] * dv;
  }
  return inv;
}

}  // namespace ncgeom
