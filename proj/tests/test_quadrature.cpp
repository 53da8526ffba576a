#include "test_common.hpp"

#include "ncgeom/quadrature.hpp"

using namespace ncgeom;
using ncgeom_test::max_abs_diff;
using ncgeom_test::random_matrix;
using ncgeom_test::random_hermitian;

namespace {

Matrix exp_of(const EigH& e, double s) {
  Matrix out = Matrix::Zero(e.V.rows(), e.V.rows());
  for (int i = 0; i < e.lam.size(); ++i)
    out += std::exp(s * e.lam[i]) * (e.V.col(i) * e.V.col(i).adjoint());
  return out;
}

// reference simplex quadrature for the ordered double integral
Matrix simplex_reference(const Matrix& Ha, const Matrix& Hb, const Matrix& Hc, const Matrix& M,
                         const Matrix& N, int order) {
  const QuadRule gl = gauss_legendre(order);
  const EigH ea = eig_h(Ha), eb = eig_h(Hb), ec = eig_h(Hc);
  Matrix acc = Matrix::Zero(M.rows(), N.cols());
  for (int i = 0; i < order; ++i) {
    const double t2 = gl.nodes[i];
    for (int j = 0; j < order; ++j) {
      const double t1 = t2 * gl.nodes[j];
      const double w = gl.weights[i] * gl.weights[j] * t2;  // jacobian of t1 = t2*r
      acc += w * exp_of(ea, -(1.0 - t2)) * M * exp_of(eb, -(t2 - t1)) * N * exp_of(ec, -t1);
    }
  }
  return acc;
}

Matrix hermitian_with_spectrum(const RealVector& lam, SplitMix64& rng) {
  const int n = static_cast<int>(lam.size());
  const Matrix A = random_matrix(n, rng);
  Eigen::HouseholderQR<Matrix> qr(A);
  const Matrix Q = qr.householderQ();
  return Q * lam.asDiagonal() * Q.adjoint();
}

}  // namespace

TEST_CASE("legendre_rule_integrates_polynomials_exactly", "[quadrature]") {
  const QuadRule gl = gauss_legendre(16);
  REQUIRE(gl.weights.sum() == Catch::Approx(1.0).epsilon(1e-14));
  for (int k = 0; k <= 31; ++k) {
    double acc = 0.0;
    for (int i = 0; i < 16; ++i) acc += gl.weights[i] * std::pow(gl.nodes[i], k);
    REQUIRE(acc == Catch::Approx(1.0 / (k + 1)).epsilon(1e-12));
  }
}

TEST_CASE("hermite_rule_matches_gaussian_moments", "[quadrature]") {
  const QuadRule gh = gauss_hermite(24);
  REQUIRE(gh.weights.sum() == Catch::Approx(std::sqrt(M_PI)).epsilon(1e-13));
  double moment = std::sqrt(M_PI);  // integral of x^0 exp(-x^2)
  for (int m = 1; m <= 23; ++m) {
    moment *= (2.0 * m - 1.0) / 2.0;  // double factorial over powers of two
    double acc = 0.0;
    for (int i = 0; i < 24; ++i) acc += gh.weights[i] * std::pow(gh.nodes[i], 2 * m);
    // high moments lose a few digits to node rounding amplified by x^46
    REQUIRE(acc == Catch::Approx(moment).epsilon(1e-8));
    double odd = 0.0;
    for (int i = 0; i < 24; ++i) odd += gh.weights[i] * std::pow(gh.nodes[i], 2 * m - 1);
    REQUIRE(std::abs(odd) < 1e-8 * moment);
  }
  // node symmetry about the origin
  for (int i = 0; i < 24; ++i) {
    REQUIRE(gh.nodes[i] == Catch::Approx(-gh.nodes[23 - i]).margin(1e-12));
    REQUIRE(gh.weights[i] == Catch::Approx(gh.weights[23 - i]).epsilon(1e-7).margin(1e-18));
  }
}

TEST_CASE("first_divided_difference_reproduces_frozen_values", "[quadrature]") {
  REQUIRE(exp_dd1(1.0, 1.0) == Catch::Approx(std::exp(-1.0)).epsilon(1e-14));
  REQUIRE(exp_dd1(0.0, 1.0) == Catch::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  REQUIRE(exp_dd1(0.0, 0.0) == Catch::Approx(1.0).epsilon(1e-15));
  SplitMix64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const double a = 4.0 * rng.normal(), b = 4.0 * rng.normal();
    REQUIRE(exp_dd1(a, b) == Catch::Approx(exp_dd1(b, a)).epsilon(1e-14));
    // smooth across near-degeneracy
    REQUIRE(exp_dd1(a, a + 1e-12) == Catch::Approx(std::exp(-a)).epsilon(1e-10));
  }
}

TEST_CASE("second_divided_difference_is_symmetric_and_branch_consistent", "[quadrature]") {
  REQUIRE(exp_dd2(0.0, 0.0, 0.0) == Catch::Approx(0.5).epsilon(1e-14));
  for (double a : {-2.0, 0.3, 1.7})
    REQUIRE(exp_dd2(a, a, a) == Catch::Approx(0.5 * std::exp(-a)).epsilon(1e-13));
  SplitMix64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const double a = 3.0 * rng.normal(), b = 3.0 * rng.normal(), c = 3.0 * rng.normal();
    const double ref = exp_dd2(a, b, c);
    REQUIRE(exp_dd2(b, a, c) == Catch::Approx(ref).epsilon(1e-12));
    REQUIRE(exp_dd2(c, b, a) == Catch::Approx(ref).epsilon(1e-12));
    REQUIRE(exp_dd2(b, c, a) == Catch::Approx(ref).epsilon(1e-12));
  }
  // the series and the recursive evaluation agree in the band where both are
  // well conditioned, so the branch switch cannot introduce a jump
  for (int t = 0; t < 30; ++t) {
    double y0 = 0.7 * (rng.uniform() - 0.5), y1 = 0.7 * (rng.uniform() - 0.5);
    double y2 = -(y0 + y1);  // centered triple
    double y[3] = {y0, y1, y2};
    std::sort(y, y + 3);
    if (y[2] - y[0] < 0.05) continue;
    const double series = detail::exp_dd2_series(y[0], y[1], y[2]);
    const double recursive = (exp_dd1(y[0], y[1]) - exp_dd1(y[1], y[2])) / (y[2] - y[0]);
    REQUIRE(series == Catch::Approx(recursive).epsilon(1e-11));
  }
}

TEST_CASE("closed_form_single_insertion_matches_dense_quadrature", "[quadrature]") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 5);
    const Matrix H = 3.0 * random_hermitian(n, rng);
    const Matrix W = random_matrix(n, rng);
    const Matrix fast = duhamel1(H, W);
    const EigH e = eig_h(H);
    const QuadRule gl = gauss_legendre(32);
    Matrix ref = Matrix::Zero(n, n);
    for (int i = 0; i < 32; ++i)
      ref += gl.weights[i] * exp_of(e, -(1.0 - gl.nodes[i])) * W * exp_of(e, -gl.nodes[i]);
    REQUIRE(max_abs_diff(fast, ref) < 1e-11 * (1.0 + ref.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("closed_form_double_insertion_matches_simplex_quadrature", "[quadrature]") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 7);
    Matrix H;
    if (trial % 3 == 0) {
      // force repeated eigenvalues
      RealVector lam(n);
      for (int i = 0; i < n; ++i) lam[i] = (i % 2 == 0) ? 0.7 : -1.3;
      H = hermitian_with_spectrum(lam, rng);
    } else {
      H = 2.5 * random_hermitian(n, rng);
    }
    const Matrix M = random_matrix(n, rng);
    const Matrix N = random_matrix(n, rng);
    const Matrix fast = duhamel2(H, M, N);
    const Matrix ref = simplex_reference(H, H, H, M, N, 32);
    REQUIRE(max_abs_diff(fast, ref) < 1e-10 * (1.0 + ref.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("three_argument_insertion_handles_distinct_generators", "[quadrature]") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 4);
    const Matrix Ha = 2.0 * random_hermitian(n, rng);
    const Matrix Hb = 2.0 * random_hermitian(n, rng);
    const Matrix Hc = 2.0 * random_hermitian(n, rng);
    const Matrix M = random_matrix(n, rng);
    const Matrix N = random_matrix(n, rng);
    const Matrix fast = duhamel2_pre(eig_h(Ha), eig_h(Hb), eig_h(Hc), M, N);
    const Matrix ref = simplex_reference(Ha, Hb, Hc, M, N, 32);
    REQUIRE(max_abs_diff(fast, ref) < 1e-10 * (1.0 + ref.cwiseAbs().maxCoeff()));

    const Matrix fast1 = duhamel1_pre(eig_h(Ha), eig_h(Hb), M);
    const QuadRule gl = gauss_legendre(32);
    const EigH ea = eig_h(Ha), eb = eig_h(Hb);
    Matrix ref1 = Matrix::Zero(n, n);
    for (int i = 0; i < 32; ++i)
      ref1 += gl.weights[i] * exp_of(ea, -(1.0 - gl.nodes[i])) * M * exp_of(eb, -gl.nodes[i]);
    REQUIRE(max_abs_diff(fast1, ref1) < 1e-11 * (1.0 + ref1.cwiseAbs().maxCoeff()));
  }
}
