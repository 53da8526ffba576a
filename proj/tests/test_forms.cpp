#include "test_common.hpp"

#include "ncgeom/forms.hpp"

using namespace ncgeom;
using ncgeom_test::random_matrix;

namespace {

MatrixPForm random_form(const TorusGrid& g, int p, Variance variance, double weight, int N,
                        SplitMix64& rng) {
  MatrixPForm f = MatrixPForm::zero(g, p, variance, weight, N);
  for (int c = 0; c < f.components(); ++c)
    for (int pt = 0; pt < g.npoints; ++pt) f.comp[c][pt] = random_matrix(N, rng);
  return f;
}

}  // namespace

TEST_CASE("degree_flips_compose_to_the_permutation_sign", "[forms]") {
  SplitMix64 rng(101);
  for (int n : {2, 3}) {
    TorusGrid g(std::vector<int>(n, 4), std::vector<double>(n, 1.0));
    for (int p = 0; p <= n; ++p) {
      const double sign = ((p * (n - p)) % 2 == 0) ? 1.0 : -1.0;
      MatrixPForm up = random_form(g, p, Variance::upper, 0.5, 2, rng);
      MatrixPForm round = epsilon_tilde_map(epsilon_map(up));
      REQUIRE(round.variance == Variance::upper);
      REQUIRE(round.p == p);
      REQUIRE(round.weight == Catch::Approx(up.weight));
      REQUIRE(form_max_diff(round, scale(up, sign)) == 0.0);

      MatrixPForm low = random_form(g, p, Variance::lower, 0.5, 2, rng);
      MatrixPForm round2 = epsilon_map(epsilon_tilde_map(low));
      REQUIRE(round2.variance == Variance::lower);
      REQUIRE(form_max_diff(round2, scale(low, sign)) == 0.0);
    }
  }
}

TEST_CASE("degree_flip_signs_match_hand_worked_three_dimensional_table", "[forms]") {
  TorusGrid g({4, 4, 4}, {1.0, 1.0, 1.0});
  SplitMix64 rng(7);
  const Matrix M = random_matrix(2, rng);
  // a contravariant one-index field concentrated in a single slot maps to the
  // complementary two-index slot with the interleaving parity as its sign
  struct Case { int slot; std::vector<int> out; double sign; };
  const std::vector<Case> cases = {{0, {1, 2}, 1.0}, {1, {0, 2}, -1.0}, {2, {0, 1}, 1.0}};
  for (const auto& c : cases) {
    MatrixPForm up = MatrixPForm::zero(g, 1, Variance::upper, 1.0, 2);
    for (int pt = 0; pt < g.npoints; ++pt) up.comp[c.slot][pt] = M;
    MatrixPForm low = epsilon_map(up);
    REQUIRE(low.p == 2);
    REQUIRE(low.weight == Catch::Approx(0.0));
    const int rank = tuple_rank(c.out, 3);
    REQUIRE(ncgeom_test::max_abs_diff(low.comp[rank][0], c.sign * M) == 0.0);
  }
}

TEST_CASE("component_accessor_antisymmetrizes_and_kills_repeats", "[forms]") {
  TorusGrid g({4, 4}, {1.0, 1.0});
  SplitMix64 rng(11);
  MatrixPForm f = random_form(g, 2, Variance::lower, 0.0, 2, rng);
  REQUIRE(ncgeom_test::max_abs_diff(f.at({1, 0}, 3), -f.at({0, 1}, 3)) == 0.0);
  REQUIRE(f.at({0, 0}, 3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("second_exterior_derivative_vanishes_on_arbitrary_data", "[forms]") {
  SplitMix64 rng(23);
  for (int n : {2, 3}) {
    TorusGrid g(std::vector<int>(n, 8), std::vector<double>(n, 1.0));
    for (int p = 0; p <= n - 2; ++p) {
      MatrixPForm f = random_form(g, p, Variance::lower, 0.0, 2, rng);
      const MatrixPForm dd = exterior_d(exterior_d(f, 4), 4);
      REQUIRE(form_max_abs(dd) < 1e-12 * (1.0 + form_max_abs(f)) * g.sizes[0] * g.sizes[0]);
    }
  }
}

TEST_CASE("second_coderivative_vanishes_on_arbitrary_data", "[forms]") {
  SplitMix64 rng(29);
  for (int n : {2, 3}) {
    TorusGrid g(std::vector<int>(n, 8), std::vector<double>(n, 1.0));
    for (int p = 2; p <= n; ++p) {
      MatrixPForm f = random_form(g, p, Variance::upper, 1.0, 2, rng);
      const MatrixPForm dd = coderivative_dtilde(coderivative_dtilde(f, 4), 4);
      REQUIRE(form_max_abs(dd) < 1e-12 * (1.0 + form_max_abs(f)) * g.sizes[0] * g.sizes[0]);
    }
  }
}

TEST_CASE("coderivative_direct_and_flip_composed_routes_agree", "[forms]") {
  SplitMix64 rng(31);
  for (int n : {2, 3}) {
    TorusGrid g(std::vector<int>(n, 8), std::vector<double>(n, 1.0));
    for (int p = 1; p <= n; ++p) {
      MatrixPForm f = random_form(g, p, Variance::upper, 1.0, 2, rng);
      const MatrixPForm direct = coderivative_dtilde(f, 4);
      const MatrixPForm composed = coderivative_via_flips(f, 4);
      REQUIRE(composed.variance == Variance::upper);
      REQUIRE(composed.p == p - 1);
      REQUIRE(composed.weight == Catch::Approx(1.0));
      REQUIRE(form_max_diff(direct, composed) < 1e-12 * (1.0 + form_max_abs(direct)) * g.sizes[0]);
    }
  }
}

TEST_CASE("derivative_pairing_obeys_summation_by_parts_with_a_minus_sign", "[forms]") {
  SplitMix64 rng(37);
  for (int n : {2, 3}) {
    TorusGrid g(std::vector<int>(n, 8), std::vector<double>(n, 1.0));
    for (int p = 0; p < n; ++p) {
      MatrixPForm alpha = random_form(g, p, Variance::lower, 0.0, 2, rng);
      MatrixPForm gamma = random_form(g, p + 1, Variance::upper, 1.0, 2, rng);
      const cdouble lhs = trace_pairing(exterior_d(alpha, 4), gamma);
      const cdouble rhs = -trace_pairing(alpha, coderivative_dtilde(gamma, 4));
      REQUIRE(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("contraction_matches_its_flip_composed_wedge_route", "[forms]") {
  SplitMix64 rng(41);
  for (int n : {2, 3}) {
    TorusGrid g(std::vector<int>(n, 4), std::vector<double>(n, 1.0));
    std::vector<GridMatrix> B(n, GridMatrix(g.npoints));
    for (int mu = 0; mu < n; ++mu)
      for (int pt = 0; pt < g.npoints; ++pt) B[mu][pt] = random_matrix(2, rng);
    for (int p = 1; p <= n; ++p) {
      MatrixPForm f = random_form(g, p, Variance::upper, 1.0, 2, rng);
      const MatrixPForm direct = contract_field(B, f);
      const double sign = ((n * p + 1) % 2 == 0) ? 1.0 : -1.0;
      const MatrixPForm composed =
          scale(epsilon_tilde_map(wedge_field(B, epsilon_map(f))), sign);
      REQUIRE(form_max_diff(direct, composed) < 1e-12 * (1.0 + form_max_abs(direct)));
    }
  }
}

TEST_CASE("wedge_square_of_a_commuting_field_vanishes", "[forms]") {
  // a scalar-matrix field wedged twice cancels pairwise, mirroring d^2 = 0
  SplitMix64 rng(43);
  TorusGrid g({4, 4, 4}, {1.0, 1.0, 1.0});
  std::vector<GridMatrix> B(3, GridMatrix(g.npoints));
  const Matrix m = random_matrix(2, rng);
  // commuting components: powers of a single point-independent matrix
  for (int pt = 0; pt < g.npoints; ++pt) {
    B[0][pt] = m;
    B[1][pt] = m * m;
    B[2][pt] = m * m * m;
  }
  MatrixPForm f = random_form(g, 0, Variance::lower, 0.0, 2, rng);
  const MatrixPForm ww = wedge_field(B, wedge_field(B, f));
  REQUIRE(form_max_abs(ww) < 1e-10 * (1.0 + form_max_abs(f)));
}

TEST_CASE("mismatched_flavors_and_ranks_are_rejected", "[forms]") {
  TorusGrid g({4, 4}, {1.0, 1.0});
  SplitMix64 rng(47);
  MatrixPForm low = random_form(g, 1, Variance::lower, 0.0, 2, rng);
  MatrixPForm up = random_form(g, 1, Variance::upper, 1.0, 2, rng);
  REQUIRE_THROWS_AS(epsilon_map(low), InputError);
  REQUIRE_THROWS_AS(epsilon_tilde_map(up), InputError);
  REQUIRE_THROWS_AS(exterior_d(up, 4), InputError);
  REQUIRE_THROWS_AS(coderivative_dtilde(low, 4), InputError);
  MatrixPForm top = random_form(g, 2, Variance::lower, 0.0, 2, rng);
  REQUIRE_THROWS_AS(exterior_d(top, 4), InputError);
  MatrixPForm zero = random_form(g, 0, Variance::upper, 1.0, 2, rng);
  REQUIRE_THROWS_AS(coderivative_dtilde(zero, 4), InputError);
}
