#pragma once

// Matrix-valued antisymmetric tensor fields on a periodic grid.  A rank-p
// field stores one N x N complex matrix per grid point for each of the
// C(n,p) strictly increasing index tuples; general index values are reached
// through permutation signs.  Fields carry an upper/lower index flavor and a
// density weight, and the degree-flip maps between them are pure sign tables.

#include "grid.hpp"

namespace ncgeom {

enum class Variance { upper, lower };

struct MatrixPForm {
  const TorusGrid* grid = nullptr;
  int p = 0;
  Variance variance = Variance::lower;
  double weight = 0.0;
  int matrix_dim = 0;
  std::vector<GridMatrix> comp;  // comp[c][point], c = lexicographic tuple rank

  static MatrixPForm zero(const TorusGrid& g, int p, Variance variance, double weight, int matrix_dim) {
    if (p < 0 || p > g.n) throw InputError("form degree must lie in [0, n]");
    MatrixPForm f;
    f.grid = &g;
    f.p = p;
    f.variance = variance;
    f.weight = weight;
    f.matrix_dim = matrix_dim;
    f.comp.assign(binomial(g.n, p), GridMatrix(g.npoints, Matrix::Zero(matrix_dim, matrix_dim)));
    return f;
  }

  int components() const { return static_cast<int>(comp.size()); }

  // component for an arbitrary (possibly unsorted) index tuple
  Matrix at(const std::vector<int>& idx, int point) const {
    std::vector<int> s = idx;
    const int sign = sort_sign(s);
    if (sign == 0) return Matrix::Zero(matrix_dim, matrix_dim);
    return static_cast<double>(sign) * comp[tuple_rank(s, grid->n)][point];
  }
};

inline void check_same_shape(const MatrixPForm& a, const MatrixPForm& b) {
  const bool same_grid =
      a.grid == b.grid || (a.grid->sizes == b.grid->sizes && a.grid->lengths == b.grid->lengths);
  if (!same_grid || a.p != b.p || a.variance != b.variance || a.matrix_dim != b.matrix_dim)
    throw InputError("form shapes do not match");
}

inline MatrixPForm add(const MatrixPForm& a, const MatrixPForm& b) {
  check_same_shape(a, b);
  MatrixPForm out = a;
  for (int c = 0; c < out.components(); ++c)
    for (int pt = 0; pt < a.grid->npoints; ++pt) out.comp[c][pt] += b.comp[c][pt];
  return out;
}

inline MatrixPForm scale(const MatrixPForm& a, cdouble s) {
  MatrixPForm out = a;
  for (auto& g : out.comp)
    for (auto& m : g) m *= s;
  return out;
}

inline double form_max_diff(const MatrixPForm& a, const MatrixPForm& b) {
  check_same_shape(a, b);
  double m = 0.0;
  for (int c = 0; c < a.components(); ++c)
    for (int pt = 0; pt < a.grid->npoints; ++pt)
      m = std::max(m, (a.comp[c][pt] - b.comp[c][pt]).cwiseAbs().maxCoeff());
  return m;
}

inline double form_max_abs(const MatrixPForm& a) {
  double m = 0.0;
  for (const auto& g : a.comp)
    for (const auto& mat : g) m = std::max(m, mat.cwiseAbs().maxCoeff());
  return m;
}

namespace detail {

inline std::vector<int> tuple_complement(const std::vector<int>& idx, int n) {
  std::vector<int> out;
  out.reserve(n - idx.size());
  std::size_t k = 0;
  for (int v = 0; v < n; ++v) {
    if (k < idx.size() && idx[k] == v) { ++k; continue; }
    out.push_back(v);
  }
  return out;
}

// insert axis into a sorted tuple; returns the 0-based insertion slot
inline int tuple_insert(std::vector<int>& idx, int axis) {
  int pos = 0;
  while (pos < static_cast<int>(idx.size()) && idx[pos] < axis) ++pos;
  idx.insert(idx.begin() + pos, axis);
  return pos;
}

}  // namespace detail

// degree flip, contravariant rank p -> covariant rank n-p, weight drops by one:
// out_J = sign(J, J^c) * in^{J^c} with sign the (J, J^c) interleaving parity
inline MatrixPForm epsilon_map(const MatrixPForm& in) {
  if (in.variance != Variance::upper) throw InputError("degree flip expects upper indices");
  const int n = in.grid->n;
  MatrixPForm out = MatrixPForm::zero(*in.grid, n - in.p, Variance::lower, in.weight - 1.0, in.matrix_dim);
  const auto tuples = increasing_tuples(n, n - in.p);
  for (const auto& J : tuples) {
    const auto Jc = detail::tuple_complement(J, n);
    const double sign = merge_sign(J, Jc);
    const int c_out = tuple_rank(J, n);
    const int c_in = tuple_rank(Jc, n);
    for (int pt = 0; pt < in.grid->npoints; ++pt) out.comp[c_out][pt] = sign * in.comp[c_in][pt];
  }
  return out;
}

// inverse-flavored flip, covariant rank p -> contravariant rank n-p, weight up
// by one; same sign table, so composing the two flips gives (-1)^{p(n-p)}
inline MatrixPForm epsilon_tilde_map(const MatrixPForm& in) {
  if (in.variance != Variance::lower) throw InputError("degree flip expects lower indices");
  const int n = in.grid->n;
  MatrixPForm out = MatrixPForm::zero(*in.grid, n - in.p, Variance::upper, in.weight + 1.0, in.matrix_dim);
  const auto tuples = increasing_tuples(n, n - in.p);
  for (const auto& J : tuples) {
    const auto Jc = detail::tuple_complement(J, n);
    const double sign = merge_sign(J, Jc);
    const int c_out = tuple_rank(J, n);
    const int c_in = tuple_rank(Jc, n);
    for (int pt = 0; pt < in.grid->npoints; ++pt) out.comp[c_out][pt] = sign * in.comp[c_in][pt];
  }
  return out;
}

// antisymmetrized derivative on covariant forms:
// (d phi)_{i_1..i_{p+1}} = sum_k (-1)^{k-1} del_{i_k} phi_{..without i_k..}
inline MatrixPForm exterior_d(const MatrixPForm& in, int order) {
  if (in.variance != Variance::lower) throw InputError("exterior derivative expects lower indices");
  if (in.p >= in.grid->n) throw InputError("exterior derivative of a top form");
  const int n = in.grid->n;
  MatrixPForm out = MatrixPForm::zero(*in.grid, in.p + 1, Variance::lower, in.weight, in.matrix_dim);
  const auto tuples = increasing_tuples(n, in.p + 1);
  for (const auto& I : tuples) {
    const int c_out = tuple_rank(I, n);
    for (int i = 0; i <= in.p; ++i) {
      std::vector<int> sub = I;
      sub.erase(sub.begin() + i);
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      const GridMatrix d = derivative(*in.grid, in.comp[tuple_rank(sub, n)], I[i], order);
      for (int pt = 0; pt < in.grid->npoints; ++pt) out.comp[c_out][pt] += sign * d[pt];
    }
  }
  return out;
}

// divergence-type derivative on contravariant forms:
// (dt phi)^I = sum_{mu not in I} (-1)^{j-1} del_mu phi^{sort(mu, I)} where j is
// the 1-based slot mu takes after sorting; equals the sign-weighted flip
// composition (-1)^{np+1} eps_tilde d eps (verified as a test identity)
inline MatrixPForm coderivative_dtilde(const MatrixPForm& in, int order) {
  if (in.variance != Variance::upper) throw InputError("coderivative expects upper indices");
  if (in.p <= 0) throw InputError("coderivative of a rank-0 field");
  const int n = in.grid->n;
  MatrixPForm out = MatrixPForm::zero(*in.grid, in.p - 1, Variance::upper, in.weight, in.matrix_dim);
  const auto tuples = increasing_tuples(n, in.p - 1);
  for (const auto& I : tuples) {
    const int c_out = tuple_rank(I, n);
    for (int mu = 0; mu < n; ++mu) {
      if (std::find(I.begin(), I.end(), mu) != I.end()) continue;
      std::vector<int> full = I;
      const int slot = detail::tuple_insert(full, mu);
      const double sign = (slot % 2 == 0) ? 1.0 : -1.0;
      const GridMatrix d = derivative(*in.grid, in.comp[tuple_rank(full, n)], mu, order);
      for (int pt = 0; pt < in.grid->npoints; ++pt) out.comp[c_out][pt] += sign * d[pt];
    }
  }
  return out;
}

// the flip-composed route to the coderivative, kept as an independent oracle
inline MatrixPForm coderivative_via_flips(const MatrixPForm& in, int order) {
  const int n = in.grid->n;
  const double sign = ((n * in.p + 1) % 2 == 0) ? 1.0 : -1.0;
  return scale(epsilon_tilde_map(exterior_d(epsilon_map(in), order)), sign);
}

// wedge action of a one-index matrix field by left multiplication:
// (B ^ phi)_{i_1..i_{p+1}} = sum_k (-1)^{k-1} B_{i_k} phi_{..without i_k..}
inline MatrixPForm wedge_field(const std::vector<GridMatrix>& B, const MatrixPForm& in) {
  if (in.variance != Variance::lower) throw InputError("wedge expects lower indices");
  const int n = in.grid->n;
  if (static_cast<int>(B.size()) != n) throw InputError("wedge field needs one component per axis");
  MatrixPForm out = MatrixPForm::zero(*in.grid, in.p + 1, Variance::lower, in.weight, in.matrix_dim);
  const auto tuples = increasing_tuples(n, in.p + 1);
  for (const auto& I : tuples) {
    const int c_out = tuple_rank(I, n);
    for (int i = 0; i <= in.p; ++i) {
      std::vector<int> sub = I;
      sub.erase(sub.begin() + i);
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      const int c_in = tuple_rank(sub, n);
      for (int pt = 0; pt < in.grid->npoints; ++pt)
        out.comp[c_out][pt] += sign * (B[I[i]][pt] * in.comp[c_in][pt]);
    }
  }
  return out;
}

// contraction action mirroring the coderivative index pattern, with the
// derivative replaced by left multiplication
inline MatrixPForm contract_field(const std::vector<GridMatrix>& B, const MatrixPForm& in) {
  if (in.variance != Variance::upper) throw InputError("contraction expects upper indices");
  if (in.p <= 0) throw InputError("contraction of a rank-0 field");
  const int n = in.grid->n;
  if (static_cast<int>(B.size()) != n) throw InputError("contraction field needs one component per axis");
  MatrixPForm out = MatrixPForm::zero(*in.grid, in.p - 1, Variance::upper, in.weight, in.matrix_dim);
  const auto tuples = increasing_tuples(n, in.p - 1);
  for (const auto& I : tuples) {
    const int c_out = tuple_rank(I, n);
    for (int mu = 0; mu < n; ++mu) {
      if (std::find(I.begin(), I.end(), mu) != I.end()) continue;
      std::vector<int> full = I;
      const int slot = detail::tuple_insert(full, mu);
      const double sign = (slot % 2 == 0) ? 1.0 : -1.0;
      const int c_in = tuple_rank(full, n);
      for (int pt = 0; pt < in.grid->npoints; ++pt)
        out.comp[c_out][pt] += sign * (B[mu][pt] * in.comp[c_in][pt]);
    }
  }
  return out;
}

// left multiplication by a matrix field, shifting the density weight
inline MatrixPForm multiply_left(const GridMatrix& m, const MatrixPForm& in, double weight_shift) {
  MatrixPForm out = in;
  out.weight += weight_shift;
  for (int c = 0; c < out.components(); ++c)
    for (int pt = 0; pt < in.grid->npoints; ++pt) out.comp[c][pt] = m[pt] * in.comp[c][pt];
  return out;
}

// coordinate-cell pairing of a covariant with a contravariant field of equal
// rank: sum over points and components of tr(alpha_I^dag beta^I) * cell
inline cdouble trace_pairing(const MatrixPForm& low, const MatrixPForm& up) {
  if (low.variance != Variance::lower || up.variance != Variance::upper)
    throw InputError("pairing expects a lower and an upper field");
  if (low.grid != up.grid || low.p != up.p || low.matrix_dim != up.matrix_dim)
    throw InputError("pairing shapes do not match");
  cdouble acc(0.0, 0.0);
  for (int c = 0; c < low.components(); ++c)
    for (int pt = 0; pt < low.grid->npoints; ++pt)
      acc += (low.comp[c][pt].adjoint() * up.comp[c][pt]).trace();
  return acc * low.grid->cell_volume();
}

}  // namespace ncgeom
