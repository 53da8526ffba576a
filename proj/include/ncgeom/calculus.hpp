#pragma once

// Metric calculus for matrix-valued forms: the rank-p kernel built from
// antisymmetrized products of the matrix metric, the index raising/lowering
// maps it induces, Hodge-type star operators, covariant derivatives, gauge
// curvature, and the sesquilinear inner product on forms.

#include "nc_fields.hpp"

namespace ncgeom {

namespace detail {

// all permutations of {0..p-1} with their signs, lexicographic order
inline const std::vector<std::pair<std::vector<int>, int>>& permutations_with_sign(int p) {
  static std::vector<std::vector<std::pair<std::vector<int>, int>>> cache;
  if (static_cast<int>(cache.size()) <= p) cache.resize(p + 1);
  if (cache[p].empty()) {
    std::vector<int> perm(p);
    for (int i = 0; i < p; ++i) perm[i] = i;
    do {
      std::vector<int> copy = perm;
      const int sign = sort_sign(copy);
      cache[p].push_back({perm, sign});
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (p == 0) cache[p].push_back({{}, 1});
  }
  return cache[p];
}

}  // namespace detail

// rank-p kernel block: (1/p!) sum over row and column permutations of the
// signed slot-ordered product t^{I_sig(1) J_tau(1)} ... t^{I_sig(p) J_tau(p)}
inline Matrix kernel_block(const std::vector<std::vector<GridMatrix>>& t, int point,
                           const std::vector<int>& I, const std::vector<int>& J, int N) {
  const int p = static_cast<int>(I.size());
  if (p == 0) return Matrix::Identity(N, N);
  const auto& perms = detail::permutations_with_sign(p);
  Matrix out = Matrix::Zero(N, N);
  double fact = 1.0;
  for (int i = 2; i <= p; ++i) fact *= i;
  for (const auto& [sig, ssign] : perms) {
    for (const auto& [tau, tsign] : perms) {
      Matrix prod = t[I[sig[0]]][J[tau[0]]][point];
      for (int slot = 1; slot < p; ++slot) prod = prod * t[I[sig[slot]]][J[tau[slot]]][point];
      out += (static_cast<double>(ssign * tsign) / fact) * prod;
    }
  }
  return out;
}

// index raising on rank-p fields: out^I = sum_J K^{IJ} phi_J
inline MatrixPForm map_A(const NCFields& f, const MatrixPForm& in) {
  if (in.variance != Variance::lower) throw InputError("index raising expects lower indices");
  const int n = f.grid.n;
  MatrixPForm out = MatrixPForm::zero(f.grid, in.p, Variance::upper, in.weight, in.matrix_dim);
  const auto tuples = increasing_tuples(n, in.p);
  for (const auto& I : tuples) {
    const int cI = tuple_rank(I, n);
    for (const auto& J : tuples) {
      const int cJ = tuple_rank(J, n);
      for (int pt = 0; pt < f.grid.npoints; ++pt)
        out.comp[cI][pt] += kernel_block(f.a, pt, I, J, f.rep.N) * in.comp[cJ][pt];
    }
  }
  return out;
}

// index lowering through the blockwise-inverse metric (pass the inverse in;
// computing it is a per-point dense factorization)
inline MatrixPForm map_B(const NCFields& f, const std::vector<std::vector<GridMatrix>>& b,
                         const MatrixPForm& in) {
  if (in.variance != Variance::upper) throw InputError("index lowering expects upper indices");
  const int n = f.grid.n;
  MatrixPForm out = MatrixPForm::zero(f.grid, in.p, Variance::lower, in.weight, in.matrix_dim);
  const auto tuples = increasing_tuples(n, in.p);
  for (const auto& I : tuples) {
    const int cI = tuple_rank(I, n);
    for (const auto& J : tuples) {
      const int cJ = tuple_rank(J, n);
      for (int pt = 0; pt < f.grid.npoints; ++pt)
        out.comp[cI][pt] += kernel_block(b, pt, I, J, f.rep.N) * in.comp[cJ][pt];
    }
  }
  return out;
}

inline MatrixPForm map_B(const NCFields& f, const MatrixPForm& in) { return map_B(f, inverse_b(f), in); }

// exact inverse of the index raising map by a per-point dense solve; this is
// not the same as lowering with the blockwise inverse once p > 1
inline MatrixPForm map_A_inverse(const NCFields& f, const MatrixPForm& in) {
  if (in.variance != Variance::upper) throw InputError("inverse raising expects upper indices");
  const int n = f.grid.n;
  const int N = f.rep.N;
  MatrixPForm out = MatrixPForm::zero(f.grid, in.p, Variance::lower, in.weight, in.matrix_dim);
  const auto tuples = increasing_tuples(n, in.p);
  const int C = static_cast<int>(tuples.size());
  Matrix big(C * N, C * N);
  Matrix rhs(C * N, N);
  for (int pt = 0; pt < f.grid.npoints; ++pt) {
    for (int cI = 0; cI < C; ++cI)
      for (int cJ = 0; cJ < C; ++cJ)
        big.block(cI * N, cJ * N, N, N) = kernel_block(f.a, pt, tuples[cI], tuples[cJ], N);
    for (int cJ = 0; cJ < C; ++cJ) rhs.block(cJ * N, 0, N, N) = in.comp[cJ][pt];
    Eigen::FullPivLU<Matrix> lu(big);
    if (!lu.isInvertible())
      throw SingularAMap("rank-" + std::to_string(in.p) + " kernel singular at point " + std::to_string(pt));
    const Matrix sol = lu.solve(rhs);
    for (int cI = 0; cI < C; ++cI) out.comp[cI][pt] = sol.block(cI * N, 0, N, N);
  }
  return out;
}

// --------------------------------------------------------------------------
// top-rank kernel and the derived density factor rho = eta^{-1/4}
// --------------------------------------------------------------------------

struct EtaRho {
  GridMatrix eta;
  GridMatrix rho;
  GridMatrix rho_inv;
};

inline EtaRho eta_and_rho(const NCFields& f) {
  const int n = f.grid.n;
  const int N = f.rep.N;
  std::vector<int> full(n);
  for (int i = 0; i < n; ++i) full[i] = i;
  EtaRho out;
  out.eta.resize(f.grid.npoints);
  out.rho.resize(f.grid.npoints);
  out.rho_inv.resize(f.grid.npoints);
  for (int pt = 0; pt < f.grid.npoints; ++pt) {
    const Matrix eta = kernel_block(f.a, pt, full, full, N);
    out.eta[pt] = eta;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (eta + eta.adjoint()));
    if (!(es.eigenvalues().minCoeff() > 0.0))
      throw NonPositiveEta("top-rank kernel not positive definite at point " + std::to_string(pt));
    const auto lam = es.eigenvalues();
    Matrix root = Matrix::Zero(N, N);
    Matrix root_inv = Matrix::Zero(N, N);
    for (int i = 0; i < N; ++i) {
      root += std::pow(lam[i], -0.25) * (es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint());
      root_inv += std::pow(lam[i], 0.25) * (es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint());
    }
    out.rho[pt] = root;
    out.rho_inv[pt] = root_inv;
  }
  return out;
}

// --------------------------------------------------------------------------
// star operators
// --------------------------------------------------------------------------

// lower rank p to lower rank n-p, weight preserved: flip(rho . raise(rho .))
inline MatrixPForm star(const NCFields& f, const MatrixPForm& in) {
  return epsilon_map(multiply_left(f.rho, map_A(f, multiply_left(f.rho, in, 0.5)), 0.5));
}

// the inverse-flavored star: rho^{-1} . unraise(rho^{-1} . flip)
inline MatrixPForm star_tilde(const NCFields& f, const MatrixPForm& in) {
  return multiply_left(f.rho_inv, map_A_inverse(f, multiply_left(f.rho_inv, epsilon_tilde_map(in), -0.5)),
                       -0.5);
}

// --------------------------------------------------------------------------
// covariant derivatives and curvature
// --------------------------------------------------------------------------

// degree-raising covariant derivative rho (d + B wedge) rho^{-1}
inline MatrixPForm covariant_D(const NCFields& f, const MatrixPForm& in) {
  const MatrixPForm inner = multiply_left(f.rho_inv, in, -0.5);
  return multiply_left(f.rho, add(exterior_d(inner, f.stencil_order), wedge_field(f.B, inner)), 0.5);
}

// degree-lowering covariant derivative rho^{-1} (dt + B contraction) rho
inline MatrixPForm covariant_Dtilde(const NCFields& f, const MatrixPForm& in) {
  const MatrixPForm inner = multiply_left(f.rho, in, 0.5);
  return multiply_left(f.rho_inv,
                       add(coderivative_dtilde(inner, f.stencil_order), contract_field(f.B, inner)), -0.5);
}

// adjoint-side derivative on lower forms: minus the raised-lowered conjugate
inline MatrixPForm covariant_Dbar(const NCFields& f, const MatrixPForm& in) {
  return scale(map_A_inverse(f, covariant_Dtilde(f, map_A(f, in))), -1.0);
}

// curvature two-form of the connection: dB plus the one-sided square
inline MatrixPForm gauge_curvature(const NCFields& f) {
  const int n = f.grid.n;
  MatrixPForm out = MatrixPForm::zero(f.grid, 2, Variance::lower, 0.0, f.rep.N);
  const auto tuples = increasing_tuples(n, 2);
  std::vector<std::vector<GridMatrix>> dB(n);
  for (int mu = 0; mu < n; ++mu) {
    dB[mu].resize(n);
    for (int nu = 0; nu < n; ++nu)
      if (nu != mu) dB[mu][nu] = derivative(f.grid, f.B[nu], mu, f.stencil_order);
  }
  for (const auto& I : tuples) {
    const int mu = I[0], nu = I[1];
    const int c = tuple_rank(I, n);
    for (int pt = 0; pt < f.grid.npoints; ++pt)
      out.comp[c][pt] = dB[mu][nu][pt] - dB[nu][mu][pt] + f.B[mu][pt] * f.B[nu][pt] -
                        f.B[nu][pt] * f.B[mu][pt];
  }
  return out;
}

// --------------------------------------------------------------------------
// inner product of lower rank-p fields through the rank-p kernel
// --------------------------------------------------------------------------

inline cdouble inner_product_pforms(const NCFields& f, const MatrixPForm& psi, const MatrixPForm& phi) {
  if (psi.variance != Variance::lower || phi.variance != Variance::lower)
    throw InputError("inner product expects lower-index fields");
  if (psi.grid != phi.grid || psi.p != phi.p || psi.matrix_dim != phi.matrix_dim)
    throw InputError("inner product shapes do not match");
  const int n = f.grid.n;
  const auto tuples = increasing_tuples(n, psi.p);
  cdouble acc(0.0, 0.0);
  for (const auto& I : tuples) {
    const int cI = tuple_rank(I, n);
    for (const auto& J : tuples) {
      const int cJ = tuple_rank(J, n);
      for (int pt = 0; pt < f.grid.npoints; ++pt)
        acc += (psi.comp[cI][pt].adjoint() * kernel_block(f.a, pt, I, J, f.rep.N) * phi.comp[cJ][pt])
                   .trace();
    }
  }
  return acc * f.grid.cell_volume();
}

}  // namespace ncgeom
