#include "ncgeom/clifford.hpp"

#include "test_common.hpp"

using namespace ncgeom;
using ncgeom_test::max_abs_diff;
using ncgeom_test::random_matrix;

namespace {

Matrix pauli1() {
  Matrix s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}
Matrix pauli2() {
  Matrix s(2, 2);
  s << 0, -II, II, 0;
  return s;
}
Matrix pauli3() {
  Matrix s(2, 2);
  s << 1, 0, 0, -1;
  return s;
}

}  // namespace

TEST_CASE("generator_matrices_match_fixed_low_dim_values", "[clifford]") {
  const GammaRep r1 = build_gamma_rep(1);
  CHECK(r1.N == 1);
  CHECK(std::abs(r1.gamma[0](0, 0) - cdouble(1.0)) < 1e-15);
  CHECK(std::abs(r1.chirality(0, 0) - cdouble(1.0)) < 1e-15);

  const GammaRep r2 = build_gamma_rep(2);
  CHECK(r2.N == 2);
  CHECK(max_abs_diff(r2.gamma[0], pauli1()) < 1e-15);
  CHECK(max_abs_diff(r2.gamma[1], pauli2()) < 1e-15);
  CHECK(max_abs_diff(r2.chirality, -pauli3()) < 1e-15);

  const GammaRep r5 = build_gamma_rep(5);
  CHECK(r5.N == 4);
  CHECK(static_cast<int>(r5.gamma.size()) == 5);
}

TEST_CASE("generators_are_hermitian_unitary_and_anticommute", "[clifford]") {
  for (int n = 2; n <= 6; ++n) {
    const GammaRep rep = build_gamma_rep(n);
    const Matrix id = Matrix::Identity(rep.N, rep.N);
    for (int a = 0; a < n; ++a) {
      CHECK(max_abs_diff(rep.gamma[a], rep.gamma[a].adjoint()) < 1e-12);
      for (int b = 0; b < n; ++b) {
        const Matrix anti = rep.gamma[a] * rep.gamma[b] + rep.gamma[b] * rep.gamma[a];
        CHECK(max_abs_diff(anti, (a == b ? 2.0 : 0.0) * id) < 1e-12);
      }
    }
  }
}

TEST_CASE("chirality_squares_to_identity_with_expected_parity_behaviour", "[clifford]") {
  for (int n = 1; n <= 6; ++n) {
    const GammaRep rep = build_gamma_rep(n);
    const Matrix id = Matrix::Identity(rep.N, rep.N);
    CHECK(max_abs_diff(rep.chirality * rep.chirality, id) < 1e-12);
    CHECK(max_abs_diff(rep.chirality, rep.chirality.adjoint()) < 1e-12);
    for (int a = 0; a < n; ++a) {
      const Matrix g = rep.gamma[a];
      if (n % 2 == 0)
        CHECK(max_abs_diff(rep.chirality * g, -g * rep.chirality) < 1e-12);
      else
        CHECK(max_abs_diff(rep.chirality * g, g * rep.chirality) < 1e-12);
    }
  }
  // odd-dimension chirality collapses to (-1)^m times the identity
  CHECK(max_abs_diff(build_gamma_rep(3).chirality, -Matrix::Identity(2, 2)) < 1e-12);
  CHECK(max_abs_diff(build_gamma_rep(5).chirality, Matrix::Identity(4, 4)) < 1e-12);
}

TEST_CASE("antisymmetrised_basis_elements", "[clifford]") {
  const GammaRep rep = build_gamma_rep(2);
  Matrix g12_expected(2, 2);
  g12_expected << II, 0, 0, -II;  // gamma_1 gamma_2 = i sigma_3
  CHECK(max_abs_diff(gamma_antisym(rep, {0, 1}), g12_expected) < 1e-15);
  CHECK(max_abs_diff(gamma_antisym(rep, {1, 0}), -g12_expected) < 1e-15);
  CHECK(gamma_antisym(rep, {0, 0}).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(max_abs_diff(gamma_antisym(rep, {}), Matrix::Identity(2, 2)) < 1e-15);

  const GammaRep r4 = build_gamma_rep(4);
  // grade-4 element equals the chirality up to the fixed phase i^{n(n-1)/2}
  const Matrix g1234 = gamma_antisym(r4, {0, 1, 2, 3});
  CHECK(max_abs_diff(r4.chirality, cdouble(-1.0, 0.0) * g1234) < 1e-12);
}

TEST_CASE("pr0_projects_onto_identity_component", "[clifford]") {
  const GammaRep rep = build_gamma_rep(2);
  CHECK(std::abs(pr0(rep, rep.gamma[0])) < 1e-15);
  CHECK(std::abs(pr0(rep, gamma_antisym(rep, {0, 1}))) < 1e-15);
  CHECK(std::abs(pr0(rep, Matrix::Identity(2, 2)) - cdouble(1.0)) < 1e-15);
  SplitMix64 rng(11);
  const Matrix A = random_matrix(2, rng), B = random_matrix(2, rng);
  const cdouble lhs = pr0(rep, A + 2.5 * B);
  CHECK(std::abs(lhs - (pr0(rep, A) + 2.5 * pr0(rep, B))) < 1e-13);
}

TEST_CASE("expansion_basis_is_orthonormal", "[clifford]") {
  for (int n = 2; n <= 5; ++n) {
    const GammaRep rep = build_gamma_rep(n);
    for (int k = 0; k <= n; ++k) {
      if (!rep.expansion_grade(k)) continue;
      for (int j = 0; j <= n; ++j) {
        if (!rep.expansion_grade(j)) continue;
        const auto tk = increasing_tuples(n, k);
        const auto tj = increasing_tuples(n, j);
        for (std::size_t a = 0; a < tk.size(); ++a)
          for (std::size_t b = 0; b < tj.size(); ++b) {
            const double tau_sign = ((k * (k - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
            const cdouble ip = tau_sign * pr0(rep, gamma_antisym(rep, tk[a]) * gamma_antisym(rep, tj[b]));
            const double expected = (k == j && a == b) ? 1.0 : 0.0;
            CHECK(std::abs(ip - cdouble(expected)) < 1e-12);
          }
      }
    }
  }
}

TEST_CASE("expansion_recovers_coefficients_and_reassembles", "[clifford]") {
  const GammaRep r2 = build_gamma_rep(2);
  const CliffordExpansion e2 = clifford_expand(r2, r2.gamma[1]);
  CHECK(std::abs(e2.coeff[1][0]) < 1e-14);
  CHECK(std::abs(e2.coeff[1][1] - cdouble(1.0)) < 1e-14);
  CHECK(std::abs(e2.coeff[0][0]) < 1e-14);

  SplitMix64 rng(29);
  for (int n = 2; n <= 5; ++n) {
    const GammaRep rep = build_gamma_rep(n);
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix A = random_matrix(rep.N, rng);
      const CliffordExpansion e = clifford_expand(rep, A);
      CHECK(max_abs_diff(reassemble(rep, e), A) < 1e-11);
      if (rep.odd())
        for (int k = 1; k <= n; k += 2)
          for (const cdouble& c : e.coeff[k]) CHECK(std::abs(c) == 0.0);
    }
  }
}

TEST_CASE("involutions_apply_documented_grade_signs", "[clifford]") {
  for (int n = 2; n <= 5; ++n) {
    const GammaRep rep = build_gamma_rep(n);
    for (int k = 0; k <= n; ++k) {
      if (!rep.expansion_grade(k)) continue;
      const auto tuples = increasing_tuples(n, k);
      const Matrix g = gamma_antisym(rep, tuples[0]);
      const double sa = (k % 2 == 0) ? 1.0 : -1.0;
      const double st = ((k * (k - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
      const double ss = ((k * (k + 1) / 2) % 2 == 0) ? 1.0 : -1.0;
      CHECK(max_abs_diff(involution(rep, g, InvolutionKind::Alpha), sa * g) < 1e-12);
      CHECK(max_abs_diff(involution(rep, g, InvolutionKind::Tau), st * g) < 1e-12);
      CHECK(max_abs_diff(involution(rep, g, InvolutionKind::Star), ss * g) < 1e-12);
    }
  }
}

TEST_CASE("involution_composition_rules_on_random_elements", "[clifford]") {
  const GammaRep rep = build_gamma_rep(4);
  SplitMix64 rng(47);
  const Matrix A = random_matrix(rep.N, rng);
  const Matrix B = random_matrix(rep.N, rng);
  // alpha is an automorphism, tau and star are antiautomorphisms
  CHECK(max_abs_diff(involution(rep, A * B, InvolutionKind::Alpha),
                     involution(rep, A, InvolutionKind::Alpha) * involution(rep, B, InvolutionKind::Alpha)) < 1e-10);
  CHECK(max_abs_diff(involution(rep, A * B, InvolutionKind::Tau),
                     involution(rep, B, InvolutionKind::Tau) * involution(rep, A, InvolutionKind::Tau)) < 1e-10);
  CHECK(max_abs_diff(involution(rep, A * B, InvolutionKind::Star),
                     involution(rep, B, InvolutionKind::Star) * involution(rep, A, InvolutionKind::Star)) < 1e-10);
  // all three are involutive
  for (auto kind : {InvolutionKind::Alpha, InvolutionKind::Tau, InvolutionKind::Star})
    CHECK(max_abs_diff(involution(rep, involution(rep, A, kind), kind), A) < 1e-10);
  // tau agrees with reversing the factor order of a product of generators
  const Matrix prod = rep.gamma[0] * rep.gamma[2] * rep.gamma[3];
  const Matrix rev = rep.gamma[3] * rep.gamma[2] * rep.gamma[0];
  CHECK(max_abs_diff(involution(rep, prod, InvolutionKind::Tau), rev) < 1e-10);
}

TEST_CASE("blade_product_on_fixed_pairs", "[clifford]") {
  const GammaRep r4 = build_gamma_rep(4);
  // gamma_12 gamma^12 = -Id: the two grade-4 and grade-2 contraction channels vanish
  const CliffordExpansion p = basis_product(r4, {0, 1}, {0, 1});
  CHECK(std::abs(p.coeff[0][0] - cdouble(-1.0)) < 1e-15);
  for (int k = 1; k <= 4; ++k)
    for (const cdouble& c : p.coeff[k]) CHECK(std::abs(c) < 1e-15);

  // disjoint blades concatenate with the merge sign
  const CliffordExpansion q = basis_product(r4, {0, 1}, {2, 3});
  CHECK(std::abs(q.coeff[4][0] - cdouble(1.0)) < 1e-15);

  // one shared index contracts away
  const CliffordExpansion s = basis_product(r4, {0, 1}, {0, 2});
  const Matrix lhs = gamma_antisym(r4, {0, 1}) * gamma_antisym(r4, {0, 2});
  CHECK(max_abs_diff(reassemble(r4, s), lhs) < 1e-13);
}

TEST_CASE("blade_product_matches_matrix_multiplication_oracle", "[clifford]") {
  SplitMix64 rng(101);
  for (int n = 2; n <= 6; ++n) {
    const GammaRep rep = build_gamma_rep(n);
    for (int trial = 0; trial < 200; ++trial) {
      const int k = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n + 1));
      const int j = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n + 1));
      std::vector<int> idx_k(k), idx_j(j);
      for (int& v : idx_k) v = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
      for (int& v : idx_j) v = static_cast<int>(rng.next() % static_cast<std::uint64_t>(n));
      const CliffordExpansion combinatorial = basis_product(rep, idx_k, idx_j);
      const Matrix direct = gamma_antisym(rep, idx_k) * gamma_antisym(rep, idx_j);
      const CliffordExpansion expected = clifford_expand(rep, direct);
      for (int g = 0; g <= n; ++g)
        for (std::size_t r = 0; r < expected.coeff[g].size(); ++r)
          CHECK(std::abs(combinatorial.coeff[g][r] - expected.coeff[g][r]) < 1e-12);
    }
  }
}

TEST_CASE("quadratic_commutation_identities_hold", "[clifford]") {
  for (int n = 2; n <= 6; ++n) CHECK(commutator_so_n_check(build_gamma_rep(n)) < 1e-12);
}
