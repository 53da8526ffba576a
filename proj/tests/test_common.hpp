#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "ncgeom/core.hpp"

namespace ncgeom_test {

using ncgeom::cdouble;
using ncgeom::Matrix;
using ncgeom::SplitMix64;

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline Matrix random_matrix(int n, SplitMix64& rng) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cdouble(rng.normal(), rng.normal());
  return m;
}

inline Matrix random_hermitian(int n, SplitMix64& rng) {
  Matrix m = random_matrix(n, rng);
  return 0.5 * (m + m.adjoint()).eval();
}

inline Matrix random_unitary(int n, SplitMix64& rng) {
  const Eigen::HouseholderQR<Matrix> qr(random_matrix(n, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

}  // namespace ncgeom_test
