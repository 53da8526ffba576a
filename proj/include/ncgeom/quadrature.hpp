#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "ncgeom/core.hpp"

namespace ncgeom {

struct QuadRule {
  RealVector nodes;
  RealVector weights;
};

namespace detail {

// nodes and weights from the symmetric tridiagonal Jacobi matrix
inline QuadRule golub_welsch(const RealVector& diag, const RealVector& sub, double total_mass) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es;
  es.computeFromTridiagonal(diag, sub);
  QuadRule q;
  q.nodes = es.eigenvalues();
  q.weights = RealVector(diag.size());
  for (int i = 0; i < diag.size(); ++i) {
    const double v0 = es.eigenvectors()(0, i);
    q.weights[i] = total_mass * v0 * v0;
  }
  return q;
}

}  // namespace detail

// Gauss-Legendre rule on [0,1]
inline QuadRule gauss_legendre(int order) {
  if (order < 1) throw InputError("quadrature order must be positive");
  RealVector diag = RealVector::Zero(order);
  RealVector sub(order - 1 > 0 ? order - 1 : 0);
  for (int k = 1; k < order; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  QuadRule q = detail::golub_welsch(diag, sub, 2.0);
  for (int i = 0; i < order; ++i) {
    q.nodes[i] = 0.5 * (q.nodes[i] + 1.0);
    q.weights[i] *= 0.5;
  }
  return q;
}

// Gauss-Hermite rule for the weight exp(-x^2) on the real line
inline QuadRule gauss_hermite(int order) {
  if (order < 1) throw InputError("quadrature order must be positive");
  RealVector diag = RealVector::Zero(order);
  RealVector sub(order - 1 > 0 ? order - 1 : 0);
  for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(0.5 * k);
  return detail::golub_welsch(diag, sub, std::sqrt(M_PI));
}

// first divided difference of exp(-x): (e^{-a} - e^{-b})/(b - a)
inline double exp_dd1(double a, double b) {
  const double m = 0.5 * (a + b);
  const double d = 0.5 * (b - a);
  double ratio;  // sinh(d)/d
  if (std::abs(d) < 1e-5) {
    const double d2 = d * d;
    ratio = 1.0 + d2 / 6.0 * (1.0 + d2 / 20.0);
  } else {
    ratio = std::sinh(d) / d;
  }
  return std::exp(-m) * ratio;
}

namespace detail {

// series for the shifted second divided difference of exp(-x):
// sum_{k>=2} (-1)^k/k! h_{k-2}(y) with h_j the complete homogeneous
// symmetric polynomials; valid for small spreads
inline double exp_dd2_series(double y0, double y1, double y2) {
  const std::array<double, 3> y{y0, y1, y2};
  double total = 0.0;
  double inv_fact = 0.5;  // 1/2!
  int small_terms = 0;
  for (int k = 2; k <= 60; ++k) {
    if (k > 2) inv_fact /= k;
    const int j = k - 2;
    std::vector<double> dp(j + 1, 0.0);  // dp[d] = h_d over the variables so far
    dp[0] = 1.0;
    for (int v = 0; v < 3; ++v)
      for (int d = 1; d <= j; ++d) dp[d] += y[v] * dp[d - 1];
    const double t = ((k % 2 == 0) ? inv_fact : -inv_fact) * dp[j];
    total += t;
    // centered inputs make single terms vanish identically, so stop only
    // after two negligible terms in a row
    if (std::abs(t) < 1e-18 * std::abs(total)) {
      if (++small_terms >= 2) break;
    } else {
      small_terms = 0;
    }
  }
  return total;
}

}  // namespace detail

// second divided difference of exp(-x), symmetric in its arguments
inline double exp_dd2(double a, double b, double c) {
  const double m = (a + b + c) / 3.0;
  double y[3] = {a - m, b - m, c - m};
  const double spread = std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2])});
  if (spread < 0.5) return std::exp(-m) * detail::exp_dd2_series(y[0], y[1], y[2]);
  std::sort(y, y + 3);
  // widest outer separation keeps the recursive form well conditioned
  return std::exp(-m) * (exp_dd1(y[0], y[1]) - exp_dd1(y[1], y[2])) / (y[2] - y[0]);
}

struct EigH {
  RealVector lam;
  Matrix V;
};

inline EigH eig_h(const Matrix& H) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.adjoint()));
  return {es.eigenvalues(), es.eigenvectors()};
}

// integral over tau in [0,1] of e^{-(1-tau)A} W e^{-tau B}
inline Matrix duhamel1_pre(const EigH& A, const EigH& B, const Matrix& W) {
  const Matrix What = A.V.adjoint() * W * B.V;
  Matrix R(What.rows(), What.cols());
  for (int i = 0; i < R.rows(); ++i)
    for (int j = 0; j < R.cols(); ++j) R(i, j) = What(i, j) * exp_dd1(A.lam[i], B.lam[j]);
  return A.V * R * B.V.adjoint();
}

inline Matrix duhamel1(const Matrix& H, const Matrix& W) {
  const EigH e = eig_h(H);
  return duhamel1_pre(e, e, W);
}

// double integral over the ordered simplex 0 <= t1 <= t2 <= 1 of
// e^{-(1-t2)A} M e^{-(t2-t1)B} N e^{-t1 C}
inline Matrix duhamel2_pre(const EigH& A, const EigH& B, const EigH& C, const Matrix& M,
                           const Matrix& N) {
  const Matrix Mh = A.V.adjoint() * M * B.V;
  const Matrix Nh = B.V.adjoint() * N * C.V;
  Matrix R = Matrix::Zero(Mh.rows(), Nh.cols());
  for (int i = 0; i < R.rows(); ++i)
    for (int k = 0; k < R.cols(); ++k) {
      cdouble acc = 0.0;
      for (int j = 0; j < Mh.cols(); ++j)
        acc += Mh(i, j) * Nh(j, k) * exp_dd2(A.lam[i], B.lam[j], C.lam[k]);
      R(i, k) = acc;
    }
  return A.V * R * C.V.adjoint();
}

inline Matrix duhamel2(const Matrix& H, const Matrix& M, const Matrix& N) {
  const EigH e = eig_h(H);
  return duhamel2_pre(e, e, e, M, N);
}

}  // namespace ncgeom
