#include <gtest/gtest.h>

#include <algorithm>

#include <Eigen/Dense>

#include "qkverify/hpn_geometry.hpp"
#include "test_support.hpp"

using namespace qk;
using namespace qk::geometry;
using qk::test::max_abs;

namespace {

const HpnGeometry& geo2() {
  static const HpnGeometry g(2);
  return g;
}

// Generator of the isotropy algebra sp(n) + sp(1) of the origin.
KillingField isotropy_generator(int n) {
  QuatMatrix xi(n + 1, n + 1);
  xi(0, 0) = Quat(0.0, 0.3, -0.2, 0.5);
  xi(0, 1) = Quat(0.1, 0.4, 0.0, -0.3);
  xi(1, 0) = -1.0 * xi(0, 1).conj();
  xi(1, 1) = Quat(0.0, -0.1, 0.2, 0.1);
  xi(n, n) = Quat(0.0, 0.7, 0.1, -0.4);
  return KillingField::make(xi);
}

}  // namespace

TEST(Metric, OriginIsScalarAndCalibrated) {
  const auto& geo = geo2();
  const Mat g0 = geo.metric_at(Vec::Zero(8));
  EXPECT_GT(geo.scale(), 0.0);
  EXPECT_LT(max_abs(g0 - g0(0, 0) * Mat::Identity(8, 8)), 1e-15);
  EXPECT_NEAR(geo.scalar_curvature_at(Vec::Zero(8)), 32.0, 1e-6);
}

TEST(Metric, SymmetricAndIsotropyInvariant) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("metric");
  const QuatMatrix M = quat_exp(isotropy_generator(2).generator(), 0.8);
  for (int s = 0; s < 5; ++s) {
    const Vec p = sample_ball(rng, 8);
    const Mat g = geo.metric_at(p);
    EXPECT_EQ(max_abs(g - g.transpose()), 0.0);
    Eigen::VectorXd e1 = Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues();
    Eigen::VectorXd e2 = Eigen::SelfAdjointEigenSolver<Mat>(geo.metric_at(mobius(M, p))).eigenvalues();
    EXPECT_LT((e1 - e2).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Metric, ChartGuard) {
  const auto& geo = geo2();
  EXPECT_THROW(geo.metric_at(Vec::Zero(7)), std::exception);
  EXPECT_THROW(geo.metric_at(Vec::Constant(8, 1e4)), ChartError);
}

TEST(Frame, IsOrthonormalAndCarriesTheStandardStructure) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("frame");
  for (int s = 0; s < 5; ++s) {
    const Vec p = sample_ball(rng, 8);
    const Frame f = geo.frame_at(p);
    EXPECT_LT(max_abs(f.E.transpose() * geo.metric_at(p) * f.E - Mat::Identity(8, 8)), 1e-12);
    for (int i = 0; i < 3; ++i) EXPECT_LT(max_abs(f.endo_to_frame(f.J[i]) - geo.frame_structure().J(i)), 1e-12);
  }
}

TEST(ClosedForms, AgreeWithFiniteDifferences) {
  const auto& geo = geo2();
  const HpnGeometry fine = geo.with_fd({1e-3, true});
  Rng rng = test::rng_for("closed-forms");
  const auto basis = killing_basis(2);
  for (int s = 0; s < 3; ++s) {
    const Vec p = sample_ball(rng, 8);
    const Vec w = sample_unit_vector(rng, 8);
    // metric derivatives
    const auto dg = geo.metric_derivatives(p);
    for (int l = 0; l < 8; ++l)
      EXPECT_LT(max_abs(dg[l] - partial_derivative([&](const Vec& y) { return geo.metric_at(y); }, p, l, fine.fd())),
                1e-10);
    // Christoffel symbols
    const auto G1 = geo.christoffel_exact_at(p), G2 = fine.christoffel_at(p);
    for (int k = 0; k < 8; ++k) EXPECT_LT(max_abs(G1.upper[k] - G2.upper[k]), 1e-10);
    // frame differential
    const Mat dE = directional_derivative([&](const Vec& y) { return geo.frame_at(y).E; }, p, w, fine.fd());
    EXPECT_LT(max_abs(geo.frame_differential(p, w) - dE), 1e-10);
    // Killing jacobian
    const auto& xi = basis[static_cast<size_t>(5 * s + 2)];
    Mat J(8, 8);
    for (int i = 0; i < 8; ++i) J.col(i) = partial_derivative(xi.field(), p, i, fine.fd());
    EXPECT_LT(max_abs(xi.jacobian(p) - J), 1e-10);
  }
}

TEST(Curvature, MatchesModelAndEinsteinCondition) {
  const auto& geo = geo2();
  const auto model = algebra::model_curvature(geo.frame_structure(), 1.0);
  Rng rng = test::rng_for("curvature");
  for (int s = 0; s < 5; ++s) {
    const Vec p = sample_ball(rng, 8);
    const auto R = geo.riemann_at(p);
    EXPECT_LT(R.bianchi_defect(), 1e-6);
    const auto Rf = R.transformed(geo.frame_at(p).E);
    double m = 0.0;
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        for (int c = 0; c < 8; ++c)
          for (int d = 0; d < 8; ++d) m = std::max(m, std::abs(Rf(a, b, c, d) - model(a, b, c, d)));
    EXPECT_LT(m / model.max_abs(), 1e-6);
  }
  const Vec o = Vec::Zero(8);
  EXPECT_LT(max_abs(geo.ricci_at(o) - 4.0 * geo.metric_at(o)) / (4.0 * geo.metric_at(o)(0, 0)), 1e-6);
}

TEST(KillingBasis, Sizes) {
  EXPECT_EQ(killing_basis(2).size(), 21u);
  EXPECT_EQ(killing_basis(3).size(), 36u);
}

TEST(KillingBasis, RejectsNonSkewGenerators) {
  EXPECT_THROW(KillingField::make(QuatMatrix::identity(3)), std::invalid_argument);
}

TEST(KillingField, ValueExamples) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("killing-value");
  const Vec p = sample_ball(rng, 8);
  EXPECT_EQ(KillingField::zero(2).value(p).norm(), 0.0);
  EXPECT_LT(isotropy_generator(2).value(Vec::Zero(8)).norm(), 1e-15);

  const double eps = 1e-4;
  for (const auto& xi : killing_basis(2)) {
    const Vec flow = (killing_flow(xi, eps, p) - killing_flow(xi, -eps, p)) / (2 * eps);
    EXPECT_LT((flow - xi.value(p)).norm(), 1e-7);
    EXPECT_LT(geo.killing_defect(xi.field(), p), 1e-6);
  }
}

TEST(CovariantCalculus, ZeroFieldsAndMetricCompatibility) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("cov");
  const VectorField zero = [](const Vec&) { return Vec(Vec::Zero(8)); };
  const FormField zero_form = [](const Vec&) { return Mat(Mat::Zero(8, 8)); };
  for (int s = 0; s < 10; ++s) {
    const Vec p = sample_ball(rng, 8);
    EXPECT_EQ(geo.cov_deriv_vector(zero, p, sample_unit_vector(rng, 8)).norm(), 0.0);
    EXPECT_LT(geo.metric_compatibility_defect(p), 1e-7);
  }
  const Vec p = sample_ball(rng, 8);
  EXPECT_EQ(geo.exterior_d(zero_form, p).norm(), 0.0);
  EXPECT_EQ(geo.codifferential(zero_form, p).norm(), 0.0);
  EXPECT_EQ(max_abs(geo.laplacian(zero_form, p)), 0.0);
}

TEST(CovariantCalculus, DSquaredVanishes) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("dd");
  const Vec c = sample_gaussian(rng, 8);
  const Mat A = sample_gaussian(rng, 8, 8);
  const CovectorField alpha = [c, A](const Vec& y) { return Vec(c + A * y + 0.3 * y.squaredNorm() * y); };
  const FormField dalpha = [&geo, alpha](const Vec& y) { return geo.exterior_d(alpha, y); };
  const Vec p = sample_ball(rng, 8, 0.5);
  EXPECT_LT(geo.exterior_d(dalpha, p).norm(), 1e-5);
}

TEST(CovariantCalculus, HodgeAndWeitzenbockLaplaciansAgree) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("laplacians");
  const Mat A = algebra::TwoForm::skew_part(sample_gaussian(rng, 8, 8)).matrix();
  const Mat B = algebra::TwoForm::skew_part(sample_gaussian(rng, 8, 8)).matrix();
  const Vec w = sample_gaussian(rng, 8);
  const FormField psi = [A, B, w](const Vec& y) { return Mat(A + std::sin(w.dot(y)) * B); };
  for (int s = 0; s < 5; ++s) {
    const Vec p = sample_ball(rng, 8);
    const Mat h = geo.laplacian(psi, p), r = geo.weitzenbock_laplacian(psi, p);
    EXPECT_LT(geo.form_norm_at(h - r, p), 1e-3 * std::max(1.0, geo.form_norm_at(h, p)));
  }
}

TEST(Konstant, HoldsForKillingFieldsOnly) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("konstant");
  const Vec p = sample_ball(rng, 8);
  EXPECT_EQ(geo.konstant_residual(KillingField::zero(2), p, sample_unit_vector(rng, 8)), 0.0);
  for (const auto& xi : killing_basis(2)) EXPECT_LT(geo.konstant_residual(xi, p, sample_unit_vector(rng, 8)), 1e-5);
  const VectorField coordinate = [](const Vec&) { return Vec(Vec::Unit(8, 0)); };
  EXPECT_GT(geo.konstant_residual(coordinate, p, sample_unit_vector(rng, 8)), 1e-2);
  EXPECT_GT(geo.killing_defect([](const Vec& y) { return Vec(y); }, p), 1e-2);
}

TEST(QuaternionicBundle, IsParallel) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("q-parallel");
  for (int s = 0; s < 5; ++s) EXPECT_LT(geo.q_parallelism_defect(sample_ball(rng, 8), sample_unit_vector(rng, 8)), 1e-6);
}

TEST(FdConfigType, StepRange) {
  EXPECT_THROW(HpnGeometry(2, FdConfig{1e-7, false}), std::invalid_argument);
  EXPECT_THROW(HpnGeometry(2, FdConfig{0.5, false}), std::invalid_argument);
}
