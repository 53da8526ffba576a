#include "test_common.hpp"

#include "ncgeom/operators.hpp"

using namespace ncgeom;
using ncgeom_test::max_abs_diff;
using ncgeom_test::random_matrix;

namespace {

GridMatrix random_section(const TorusGrid& g, int N, int cols, SplitMix64& rng) {
  GridMatrix s(g.npoints);
  for (int pt = 0; pt < g.npoints; ++pt) {
    Matrix m(N, cols);
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = cdouble(rng.normal(), rng.normal());
    s[pt] = m;
  }
  return s;
}

NCFields flat_fields(int size = 8, int order = 4) {
  TorusGrid grid({size, size}, {1.0, 1.0});
  return commutative_fields(MetricField::flat(grid, RealMatrix::Identity(2, 2)),
                            build_gamma_rep(2), order);
}

NCFields deformed_fields(double kappa, int size = 8, int order = 4) {
  DeformationSpec spec;
  spec.kappa = kappa;
  spec.alpha = {{0, {1}, 1.0, {1, 0}, 0.2}, {1, {0, 1}, 0.8, {0, 1}, 0.0}};
  spec.phi = {{0.5, {1, 1}, 0.1}};
  spec.b = {{0, {0}, 0.6, {0, 1}, 0.0}, {1, {1}, 0.5, {1, 0}, 0.7}};
  return apply_deformation(flat_fields(size, order), spec);
}

double section_max_diff(const GridMatrix& a, const GridMatrix& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, max_abs_diff(a[i], b[i]));
  return m;
}

}  // namespace

TEST_CASE("flat_first_order_operator_is_the_bare_stencil_and_self_adjoint", "[operators]") {
  const NCFields f = flat_fields();
  SplitMix64 rng(7);
  const GridMatrix psi = random_section(f.grid, 2, 1, rng);
  const GridMatrix d = apply_dirac(f, psi);
  GridMatrix want(f.grid.npoints, Matrix::Zero(2, 1));
  for (int mu = 0; mu < 2; ++mu) {
    const GridMatrix dpsi = derivative(f.grid, psi, mu, 4);
    for (int pt = 0; pt < f.grid.npoints; ++pt) want[pt] += II * f.rep.gamma[mu] * dpsi[pt];
  }
  REQUIRE(section_max_diff(d, want) < 1e-12);
  REQUIRE(section_max_diff(d, apply_dirac_adjoint(f, psi)) < 1e-12);

  // linearity
  const GridMatrix phi = random_section(f.grid, 2, 1, rng);
  const cdouble ca(0.3, -1.1), cb(-0.2, 0.4);
  GridMatrix combo(f.grid.npoints);
  for (int pt = 0; pt < f.grid.npoints; ++pt) combo[pt] = ca * psi[pt] + cb * phi[pt];
  GridMatrix lin(f.grid.npoints);
  const GridMatrix dphi = apply_dirac(f, phi);
  for (int pt = 0; pt < f.grid.npoints; ++pt) lin[pt] = ca * d[pt] + cb * dphi[pt];
  REQUIRE(section_max_diff(apply_dirac(f, combo), lin) < 1e-12);
}

TEST_CASE("plane_waves_diagonalize_the_flat_operators_at_the_stencil_symbol", "[operators]") {
  const NCFields f = flat_fields();
  const Stencil st = Stencil::central(4);
  for (const auto& k : {std::array<int, 2>{1, 0}, std::array<int, 2>{2, 3}, std::array<int, 2>{5, 7}}) {
    GridMatrix psi(f.grid.npoints);
    Matrix v(2, 1);
    v << cdouble(0.8, 0.1), cdouble(-0.3, 0.55);
    for (int pt = 0; pt < f.grid.npoints; ++pt) {
      const auto x = f.grid.point(pt);
      psi[pt] = std::exp(II * 2.0 * M_PI * (k[0] * x[0] + k[1] * x[1])) * v;
    }
    double lam = 0.0;
    for (int mu = 0; mu < 2; ++mu) {
      const double theta = 2.0 * M_PI * k[mu] / f.grid.sizes[mu];
      const double s = st.symbol(theta) / f.grid.spacing[mu];
      lam += s * s;
    }
    GridMatrix want(f.grid.npoints);
    for (int pt = 0; pt < f.grid.npoints; ++pt) want[pt] = -lam * psi[pt];
    REQUIRE(section_max_diff(apply_laplacian(f, psi), want) < 1e-9 * (1.0 + lam));
    for (int pt = 0; pt < f.grid.npoints; ++pt) want[pt] = lam * psi[pt];
    REQUIRE(section_max_diff(apply_operator(f, OperatorKind::dbar_d, psi), want) < 1e-9 * (1.0 + lam));
  }
}

TEST_CASE("first_order_pair_is_mutually_adjoint_and_second_order_kinds_self_adjoint", "[operators]") {
  for (double kappa : {0.0, 0.05, 0.1}) {
    const NCFields f = deformed_fields(kappa);
    SplitMix64 rng(11 + static_cast<uint64_t>(kappa * 100));
    for (int trial = 0; trial < 20; ++trial) {
      const GridMatrix phi = random_section(f.grid, 2, 1, rng);
      const GridMatrix psi = random_section(f.grid, 2, 1, rng);
      const cdouble lhs = section_inner(f, phi, apply_dirac(f, psi));
      const cdouble rhs = section_inner(f, apply_dirac_adjoint(f, phi), psi);
      REQUIRE(std::abs(lhs - rhs) < 1e-11 * (1.0 + std::abs(lhs)));
      const cdouble la = section_inner(f, phi, apply_laplacian(f, psi));
      const cdouble lb = section_inner(f, apply_laplacian(f, phi), psi);
      REQUIRE(std::abs(la - lb) < 1e-11 * (1.0 + std::abs(la)));
    }
  }
}

TEST_CASE("deformed_configurations_separate_the_operator_from_its_adjoint", "[operators]") {
  const NCFields f = deformed_fields(0.2);
  SplitMix64 rng(19);
  double defect = 0.0, scale = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const GridMatrix psi = random_section(f.grid, 2, 1, rng);
    const GridMatrix d = apply_dirac(f, psi);
    defect = std::max(defect, section_max_diff(d, apply_dirac_adjoint(f, psi)));
    for (const auto& m : d) scale = std::max(scale, m.cwiseAbs().maxCoeff());
  }
  REQUIRE(defect > 1e-3 * scale);
}

TEST_CASE("composed_second_order_operators_share_their_nonzero_spectra", "[operators]") {
  const NCFields f = deformed_fields(0.1);
  const DenseOperator AB = dense_assembly(f, OperatorKind::dbar_d);
  const DenseOperator BA = dense_assembly(f, OperatorKind::d_dbar);
  const double scale = AB.eigenvalues.cwiseAbs().maxCoeff();
  REQUIRE(AB.symmetrization_defect < 1e-11 * (1.0 + scale));
  REQUIRE(BA.symmetrization_defect < 1e-11 * (1.0 + scale));
  REQUIRE(AB.eigenvalues.minCoeff() > -1e-10 * (1.0 + scale));
  REQUIRE(BA.eigenvalues.minCoeff() > -1e-10 * (1.0 + scale));

  const double threshold = 1e-8 * kernel_scale(f);
  const RealVector sa = nonzero_spectrum(AB.eigenvalues, threshold);
  const RealVector sb = nonzero_spectrum(BA.eigenvalues, threshold);
  REQUIRE(sa.size() == sb.size());
  double worst = 0.0;
  for (int i = 0; i < sa.size(); ++i)
    worst = std::max(worst, std::abs(sa[i] - sb[i]) / (1.0 + std::abs(sa[i])));
  REQUIRE(worst < 1e-8);

  // the composed assemblies agree with products of the first-order assemblies
  const Matrix D = assemble_matrix(f, OperatorKind::dirac);
  const Matrix Dbar = assemble_matrix(f, OperatorKind::dirac_adjoint);
  REQUIRE((Dbar * D - AB.matrix).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + scale));
  REQUIRE((D * Dbar - BA.matrix).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + scale));
  // and the pair really are mutual adjoints as matrices
  REQUIRE((D.adjoint() - Dbar).cwiseAbs().maxCoeff() < 1e-11 * (1.0 + D.cwiseAbs().maxCoeff()));
}

TEST_CASE("flat_dense_spectrum_matches_the_discrete_fourier_lattice", "[operators]") {
  const NCFields f = flat_fields();
  const DenseOperator op = dense_assembly(f, OperatorKind::dbar_d);
  const Stencil st = Stencil::central(4);
  std::vector<double> predicted;
  for (int k0 = 0; k0 < 8; ++k0)
    for (int k1 = 0; k1 < 8; ++k1) {
      double lam = 0.0;
      for (int mu = 0; mu < 2; ++mu) {
        const int k = mu == 0 ? k0 : k1;
        const double s = st.symbol(2.0 * M_PI * k / 8.0) / f.grid.spacing[mu];
        lam += s * s;
      }
      predicted.push_back(lam);
      predicted.push_back(lam);
    }
  std::sort(predicted.begin(), predicted.end());
  REQUIRE(op.eigenvalues.size() == static_cast<long>(predicted.size()));
  double worst = 0.0;
  for (int i = 0; i < op.eigenvalues.size(); ++i)
    worst = std::max(worst, std::abs(op.eigenvalues[i] - predicted[i]) / (1.0 + predicted[i]));
  REQUIRE(worst < 1e-10);
}

TEST_CASE("constant_gauge_transformations_preserve_spectra_and_commute_with_application", "[operators]") {
  const NCFields f = deformed_fields(0.1);
  SplitMix64 rng(27);
  const Matrix U0 = exp_anti_hermitian(II * ncgeom_test::random_hermitian(2, rng));
  const NCFields g = gauge_transform(f, GridMatrix(f.grid.npoints, U0));

  const GridMatrix psi = random_section(f.grid, 2, 1, rng);
  GridMatrix upsi(f.grid.npoints);
  for (int pt = 0; pt < f.grid.npoints; ++pt) upsi[pt] = U0 * psi[pt];
  for (OperatorKind kind : {OperatorKind::dirac, OperatorKind::dirac_adjoint,
                            OperatorKind::laplacian, OperatorKind::dbar_d}) {
    const GridMatrix a = apply_operator(g, kind, upsi);
    const GridMatrix b = apply_operator(f, kind, psi);
    GridMatrix ub(f.grid.npoints);
    for (int pt = 0; pt < f.grid.npoints; ++pt) ub[pt] = U0 * b[pt];
    REQUIRE(section_max_diff(a, ub) < 1e-10);
  }

  const DenseOperator sf = dense_assembly(f, OperatorKind::dbar_d);
  const DenseOperator sg = dense_assembly(g, OperatorKind::dbar_d);
  const double scale = sf.eigenvalues.cwiseAbs().maxCoeff();
  REQUIRE((sf.eigenvalues - sg.eigenvalues).cwiseAbs().maxCoeff() < 1e-9 * (1.0 + scale));
}

TEST_CASE("eigenvalues_continue_linearly_to_the_commutative_limit", "[operators]") {
  const RealVector base = dense_assembly(flat_fields(), OperatorKind::dbar_d).eigenvalues;
  auto shift = [&](double kappa) {
    const RealVector ev = dense_assembly(deformed_fields(kappa), OperatorKind::dbar_d).eigenvalues;
    return (ev - base).cwiseAbs().sum();
  };
  const double s1 = shift(0.008), s2 = shift(0.004), s3 = shift(0.002);
  REQUIRE(s1 / s2 == Catch::Approx(2.0).margin(0.25));
  REQUIRE(s2 / s3 == Catch::Approx(2.0).margin(0.25));
  // halving kappa halves the quadratic contamination of the ratio
  REQUIRE(std::abs(s2 / s3 - 2.0) < 0.75 * std::abs(s1 / s2 - 2.0));
}

TEST_CASE("commutative_limit_action_agrees_with_the_frame_operator", "[operators]") {
  TorusGrid grid({16, 16}, {1.0, 1.0});
  GridReal sigma(grid.npoints);
  for (int pt = 0; pt < grid.npoints; ++pt) {
    const auto x = grid.point(pt);
    sigma[pt] = 0.05 * std::sin(2.0 * M_PI * x[0]) * std::sin(2.0 * M_PI * x[1]);
  }
  const MetricField metric = MetricField::conformal(grid, sigma);
  const NCFields f = commutative_fields(metric, build_gamma_rep(2), 4);
  SplitMix64 rng(31);
  const GridMatrix psi = random_section(grid, 2, 1, rng);

  // conjugating by the density weight turns the section operator into the
  // frame-contracted covariant stencil operator
  GridMatrix rpsi(grid.npoints);
  for (int pt = 0; pt < grid.npoints; ++pt) rpsi[pt] = f.rho[pt] * psi[pt];
  const GridMatrix lhs = apply_dirac(f, rpsi);
  GridMatrix rhs(grid.npoints, Matrix::Zero(2, 1));
  for (int mu = 0; mu < 2; ++mu) {
    const GridMatrix dpsi = derivative(grid, psi, mu, 4);
    for (int pt = 0; pt < grid.npoints; ++pt)
      rhs[pt] += II * f.rho[pt] * (f.Gamma[mu][pt] * (dpsi[pt] + f.B[mu][pt] * psi[pt]));
  }
  REQUIRE(section_max_diff(lhs, rhs) < 1e-11);
}

TEST_CASE("kernel_counting_gives_zero_index_for_paired_and_gapped_configurations", "[operators]") {
  // periodic flat: paired constant zero modes on both sides
  REQUIRE(nc_index(flat_fields()) == 0);

  // antiperiodic twist on one axis gaps the operator entirely
  NCFields tw = deformed_fields(0.1);
  tw.twist = {0.5, 0.0};
  const double threshold = 1e-8 * kernel_scale(tw);
  const DenseOperator d = dense_assembly(tw, OperatorKind::dirac);
  REQUIRE(kernel_dimension(d.eigenvalues, threshold) == 0);
  REQUIRE(nc_index(tw) == 0);
}

TEST_CASE("second_order_defect_vanishes_flat_and_is_low_order_otherwise", "[operators]") {
  SplitMix64 rng(37);
  const NCFields flat = flat_fields();
  const GridMatrix psi = random_section(flat.grid, 2, 1, rng);
  REQUIRE(section_max_diff(second_order_defect(flat, psi),
                           GridMatrix(flat.grid.npoints, Matrix::Zero(2, 1))) < 1e-10);

  const NCFields f = deformed_fields(0.1);
  const GridMatrix psi2 = random_section(f.grid, 2, 1, rng);
  double defect = 0.0;
  for (const auto& m : second_order_defect(f, psi2)) defect = std::max(defect, m.cwiseAbs().maxCoeff());
  REQUIRE(defect > 1e-3);
}
