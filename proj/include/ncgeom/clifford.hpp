#pragma once

// Complex Clifford algebra with delta metric: generators gamma_a are Hermitian,
// unitary and pairwise anticommuting, realised as N x N matrices with
// N = 2^floor(n/2).  For odd n the irreducible block identifies each grade k
// with grade n-k, so expansions are reported on the even grades only (those
// span the full matrix algebra and stay orthonormal under the normalised trace).

#include <algorithm>
#include <cmath>
#include <utility>

#include "core.hpp"

namespace ncgeom {

struct GammaRep {
  int n = 0;  // number of generators
  int N = 0;  // matrix size, 2^floor(n/2)
  std::vector<Matrix> gamma;  // generators, 0-based: gamma[a] is gamma_{a+1}
  Matrix chirality;           // i^{n(n-1)/2} gamma_1 ... gamma_n

  bool odd() const { return n % 2 != 0; }
  // grades on which expansions live: all grades for even n, even grades otherwise
  bool expansion_grade(int k) const { return odd() ? (k % 2 == 0) : true; }
};

// coefficient table of A in the antisymmetrised basis, one entry per
// increasing multi-index; reassembly is the plain sum over stored entries
// (equivalent to the 1/k! contraction with fully antisymmetric arrays)
struct CliffordExpansion {
  int n = 0;
  std::vector<std::vector<cdouble>> coeff;  // coeff[k][rank of tuple]

  static CliffordExpansion zero(int n) {
    CliffordExpansion e;
    e.n = n;
    e.coeff.resize(n + 1);
    for (int k = 0; k <= n; ++k) e.coeff[k].assign(static_cast<std::size_t>(binomial(n, k)), cdouble(0.0));
    return e;
  }

  // signed accessor for an arbitrary (possibly unsorted) index tuple
  cdouble component(const std::vector<int>& idx) const {
    std::vector<int> s = idx;
    const int sign = sort_sign(s);
    if (sign == 0) return 0.0;
    const int k = static_cast<int>(s.size());
    return static_cast<double>(sign) * coeff[k][tuple_rank(s, n)];
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& level : coeff)
      for (const cdouble& c : level) m = std::max(m, std::abs(c));
    return m;
  }
};

namespace detail {

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix pauli(int k) {
  Matrix s(2, 2);
  switch (k) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -II, II, 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}

}  // namespace detail

// chirality normalisation i^{n(n-1)/2} gamma_1...gamma_n applied literally
inline Matrix chirality_of(int n, const std::vector<Matrix>& gamma) {
  const int N = static_cast<int>(gamma.empty() ? 1 : gamma[0].rows());
  Matrix prod = Matrix::Identity(N, N);
  for (const Matrix& g : gamma) prod = prod * g;
  const int r = ((n * (n - 1)) / 2) % 4;
  static const cdouble phases[4] = {cdouble(1, 0), II, cdouble(-1, 0), -II};
  return phases[r] * prod;
}

// builds the representation by tensor recursion: base pair (sigma1, sigma2),
// each step appends the base pair and twists the old generators by the base
// chirality; odd n reuses the even rep below it and appends its chirality.
inline GammaRep build_gamma_rep(int n) {
  if (n < 1 || n > 10) throw InputError("clifford dimension must be in 1..10, got " + std::to_string(n));
  GammaRep rep;
  rep.n = n;
  const int m = n / 2;
  std::vector<Matrix> g;
  if (n == 1) {
    g.push_back(Matrix::Identity(1, 1));
  } else {
    g = {detail::pauli(1), detail::pauli(2)};
    for (int step = 1; step < m; ++step) {
      const Matrix gc = chirality_of(2 * step, g);
      const int dim = static_cast<int>(gc.rows());
      std::vector<Matrix> next;
      next.reserve(g.size() + 2);
      for (const Matrix& old : g) next.push_back(detail::kron(old, -detail::pauli(3)));
      // the recursion twist equals kron(chirality, *) only at the first step;
      // tensoring with -sigma3 keeps every generator anticommuting with the new pair
      next.push_back(detail::kron(Matrix::Identity(dim, dim), detail::pauli(1)));
      next.push_back(detail::kron(Matrix::Identity(dim, dim), detail::pauli(2)));
      g = std::move(next);
    }
    if (n % 2 == 1) g.push_back(chirality_of(2 * m, g));
  }
  rep.gamma = std::move(g);
  rep.N = static_cast<int>(rep.gamma[0].rows());
  rep.chirality = chirality_of(n, rep.gamma);
  return rep;
}

// antisymmetrised basis element gamma_{a1...ak}; duplicate indices give zero.
// indices are 0-based
inline Matrix gamma_antisym(const GammaRep& rep, const std::vector<int>& idx) {
  for (int a : idx)
    if (a < 0 || a >= rep.n) throw InputError("gamma index out of range");
  std::vector<int> s = idx;
  const int sign = sort_sign(s);
  Matrix out = Matrix::Zero(rep.N, rep.N);
  if (sign == 0) return out;
  out = Matrix::Identity(rep.N, rep.N);
  for (int a : s) out = out * rep.gamma[a];
  return static_cast<double>(sign) * out;
}

// normalised trace, the projection onto the identity component
inline cdouble pr0(const GammaRep& rep, const Matrix& A) {
  return A.trace() / static_cast<double>(rep.N);
}

inline Matrix reassemble(const GammaRep& rep, const CliffordExpansion& e) {
  Matrix out = Matrix::Zero(rep.N, rep.N);
  for (int k = 0; k <= rep.n; ++k) {
    const auto tuples = increasing_tuples(rep.n, k);
    for (std::size_t r = 0; r < tuples.size(); ++r) {
      const cdouble c = e.coeff[k][r];
      if (c != cdouble(0.0)) out += c * gamma_antisym(rep, tuples[r]);
    }
  }
  return out;
}

// coefficients <gamma^I, A> = Pr0(tau(gamma_I) A) on the expansion grades
inline CliffordExpansion clifford_expand(const GammaRep& rep, const Matrix& A) {
  if (A.rows() != rep.N || A.cols() != rep.N) throw InputError("clifford_expand: matrix size mismatch");
  CliffordExpansion e = CliffordExpansion::zero(rep.n);
  for (int k = 0; k <= rep.n; ++k) {
    if (!rep.expansion_grade(k)) continue;
    const double tau_sign = ((k * (k - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    const auto tuples = increasing_tuples(rep.n, k);
    for (std::size_t r = 0; r < tuples.size(); ++r)
      e.coeff[k][r] = tau_sign * pr0(rep, gamma_antisym(rep, tuples[r]) * A);
  }
  return e;
}

enum class InvolutionKind { Alpha, Tau, Star };

// grade involutions: alpha flips odd grades, tau reverses factor order,
// star additionally conjugates coefficients
inline Matrix involution(const GammaRep& rep, const Matrix& A, InvolutionKind kind) {
  CliffordExpansion e = clifford_expand(rep, A);
  for (int k = 0; k <= rep.n; ++k) {
    double sign = 1.0;
    switch (kind) {
      case InvolutionKind::Alpha: sign = (k % 2 == 0) ? 1.0 : -1.0; break;
      case InvolutionKind::Tau: sign = ((k * (k - 1) / 2) % 2 == 0) ? 1.0 : -1.0; break;
      case InvolutionKind::Star: sign = ((k * (k + 1) / 2) % 2 == 0) ? 1.0 : -1.0; break;
    }
    for (cdouble& c : e.coeff[k]) {
      if (kind == InvolutionKind::Star) c = std::conj(c);
      c *= sign;
    }
  }
  return reassemble(rep, e);
}

namespace detail {

// scalar value of the central element gamma_1...gamma_n in the odd block:
// gamma_1...gamma_n = i^{-m(2m-1)} Id with m = (n-1)/2
inline cdouble odd_central_scalar(int n) {
  const int m = (n - 1) / 2;
  const int r = ((m * (2 * m - 1)) % 4 + 4) % 4;
  static const cdouble inv_phases[4] = {cdouble(1, 0), -II, cdouble(-1, 0), II};
  return inv_phases[r];
}

}  // namespace detail

// expansion of gamma_{a1..ak} gamma^{b1..bj} computed combinatorially: after
// antisymmetrising both factors, every index common to the two blades must be
// contracted away (schemes leaving a repeated index hit a vanishing basis
// element), and each removal contributes the parity of the gammas it crosses.
// no matrix products are formed
inline CliffordExpansion basis_product(const GammaRep& rep, const std::vector<int>& idx_k,
                                       const std::vector<int>& idx_j) {
  for (int a : idx_k)
    if (a < 0 || a >= rep.n) throw InputError("basis_product: index out of range");
  for (int b : idx_j)
    if (b < 0 || b >= rep.n) throw InputError("basis_product: index out of range");

  CliffordExpansion e = CliffordExpansion::zero(rep.n);
  std::vector<int> left = idx_k, right = idx_j;
  const int sl = sort_sign(left), sr = sort_sign(right);
  if (sl == 0 || sr == 0) return e;
  double sign = static_cast<double>(sl * sr);

  // contract every shared index, processing them in order of position in left
  std::vector<int> l = left, r = right;
  for (std::size_t i = 0; i < l.size();) {
    const int v = l[i];
    auto it = std::find(r.begin(), r.end(), v);
    if (it == r.end()) {
      ++i;
      continue;
    }
    const int cross = static_cast<int>(l.size() - i - 1) + static_cast<int>(it - r.begin());
    if (cross % 2 != 0) sign = -sign;
    l.erase(l.begin() + static_cast<std::ptrdiff_t>(i));
    r.erase(it);
  }

  std::vector<int> rest = l;
  rest.insert(rest.end(), r.begin(), r.end());
  const int ms = sort_sign(rest);
  if (ms == 0) return e;  // cannot happen after full contraction
  sign *= static_cast<double>(ms);

  cdouble value(sign, 0.0);
  if (rep.odd() && static_cast<int>(rest.size()) % 2 != 0) {
    // odd block: replace an odd-grade blade by its complement,
    // gamma_K = s * zeta * (-1)^{q(q-1)/2} gamma_{K^c} with q = n - |K|
    std::vector<int> comp;
    for (int v = 0; v < rep.n; ++v)
      if (std::find(rest.begin(), rest.end(), v) == rest.end()) comp.push_back(v);
    const int q = static_cast<int>(comp.size());
    const int s = merge_sign(rest, comp) == 1 ? 1 : -1;
    // merge_sign assumes disjoint sorted tuples in concatenation order K, K^c
    double rev = ((q * (q - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    value *= static_cast<double>(s) * rev * detail::odd_central_scalar(rep.n);
    rest = std::move(comp);
  }
  const int k = static_cast<int>(rest.size());
  e.coeff[k][tuple_rank(rest, rep.n)] += value;
  return e;
}

// largest residual of the quadratic commutation identities
//   [gamma_ab, gamma_cd] = 2(-d_ac g_bd - d_bd g_ac + d_bc g_ad + d_ad g_bc)
//   {gamma_ab, gamma_cd} = 2(gamma_abcd - d_ac d_bd + d_bc d_ad)
inline double commutator_so_n_check(const GammaRep& rep) {
  double worst = 0.0;
  auto d = [](int x, int y) { return x == y ? 1.0 : 0.0; };
  for (int a = 0; a < rep.n; ++a)
    for (int b = a + 1; b < rep.n; ++b)
      for (int c = 0; c < rep.n; ++c)
        for (int e = c + 1; e < rep.n; ++e) {
          const Matrix gab = gamma_antisym(rep, {a, b});
          const Matrix gce = gamma_antisym(rep, {c, e});
          const Matrix comm = gab * gce - gce * gab;
          const Matrix comm_expect =
              2.0 * (-d(a, c) * gamma_antisym(rep, {b, e}) - d(b, e) * gamma_antisym(rep, {a, c}) +
                     d(b, c) * gamma_antisym(rep, {a, e}) + d(a, e) * gamma_antisym(rep, {b, c}));
          worst = std::max(worst, (comm - comm_expect).cwiseAbs().maxCoeff());
          const Matrix anti = gab * gce + gce * gab;
          const Matrix id = Matrix::Identity(rep.N, rep.N);
          const Matrix anti_expect =
              2.0 * (gamma_antisym(rep, {a, b, c, e}) - (d(a, c) * d(b, e) - d(b, c) * d(a, e)) * id);
          worst = std::max(worst, (anti - anti_expect).cwiseAbs().maxCoeff());
        }
  return worst;
}

// Hermitian-eigenbasis exponential of an anti-Hermitian argument
inline Matrix exp_anti_hermitian(const Matrix& X) {
  const Matrix H = II * X;  // Hermitian when X is anti-Hermitian
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success) throw Error("eigensolver failed in exp_anti_hermitian");
  Vector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases[i] = std::exp(-II * es.eigenvalues()[i]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// T = exp(-1/4 theta_ab gamma^{ab}) for real antisymmetric theta
inline Matrix spin_exp(const GammaRep& rep, const RealMatrix& theta) {
  if (theta.rows() != rep.n || theta.cols() != rep.n) throw InputError("spin_exp: theta must be n x n");
  if ((theta + theta.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + theta.cwiseAbs().maxCoeff()))
    throw InputError("spin_exp: theta must be antisymmetric");
  Matrix X = Matrix::Zero(rep.N, rep.N);
  for (int a = 0; a < rep.n; ++a)
    for (int b = a + 1; b < rep.n; ++b)
      X += -0.5 * theta(a, b) * gamma_antisym(rep, {a, b});
  return exp_anti_hermitian(X);
}

// parity of an invertible element from its expansion support; for odd n the
// block carries no odd grading and every element counts as even
inline int parity(const GammaRep& rep, const Matrix& T) {
  if (rep.odd()) return +1;
  const CliffordExpansion e = clifford_expand(rep, T);
  double even = 0.0, odd = 0.0;
  for (int k = 0; k <= rep.n; ++k)
    for (const cdouble& c : e.coeff[k]) (k % 2 == 0 ? even : odd) = std::max(k % 2 == 0 ? even : odd, std::abs(c));
  const double tol = 1e-10 * std::max(1.0, std::max(even, odd));
  if (odd <= tol) return +1;
  if (even <= tol) return -1;
  throw ParityError("element has mixed even/odd expansion support");
}

// vector representation rho^a_b(T) = eps(T) Pr0(T gamma^a T^{-1} gamma_b)
inline RealMatrix vector_rep(const GammaRep& rep, const Matrix& T) {
  const double det_scale = std::abs(T.determinant());
  if (det_scale < 1e-12) throw InputError("vector_rep: T is not invertible");
  const int eps = parity(rep, T);
  const Matrix Tinv = T.inverse();
  RealMatrix rho(rep.n, rep.n);
  double imag_worst = 0.0;
  for (int a = 0; a < rep.n; ++a) {
    const Matrix conj = T * rep.gamma[a] * Tinv;
    for (int b = 0; b < rep.n; ++b) {
      const cdouble v = static_cast<double>(eps) * pr0(rep, conj * rep.gamma[b]);
      rho(a, b) = v.real();
      imag_worst = std::max(imag_worst, std::abs(v.imag()));
    }
  }
  if (imag_worst > 1e-9) throw InputError("vector_rep: non-real rotation coefficients");
  return rho;
}

// exp of a real antisymmetric matrix through its Hermitian form
inline RealMatrix exp_antisymmetric(const RealMatrix& theta) {
  Matrix X = theta.cast<cdouble>();
  return exp_anti_hermitian(X).real();
}

}  // namespace ncgeom
