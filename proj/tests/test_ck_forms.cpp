#include <gtest/gtest.h>

#include "qkverify/ck_forms.hpp"
#include "test_support.hpp"

using namespace qk;
using namespace qk::ckforms;
using geometry::killing_basis;
using qk::test::max_abs;

namespace {

const HpnGeometry& geo2() {
  static const HpnGeometry g(2);
  return g;
}

const std::vector<KillingField>& basis2() {
  static const auto b = killing_basis(2);
  return b;
}

CKForm constant_form(Rng& rng) {
  const Mat c = algebra::TwoForm::skew_part(sample_gaussian(rng, 8, 8)).matrix();
  return CKForm(KillingField::zero(2), [c](const Vec&) { return c; });
}

}  // namespace

TEST(Coefficients, NTwo) {
  const auto c = ck_coefficients(2);
  EXPECT_DOUBLE_EQ(c.s2h, -2.0 / 7.0);
  EXPECT_DOUBLE_EQ(c.s2e, 4.0 / 7.0);
  EXPECT_DOUBLE_EQ(integrated_dx_coefficient(2), 4.0 / 21.0);
  EXPECT_DOUBLE_EQ(ck_coefficients(3, 2.0).s2h, -2.0 / (2.0 * 11.0));
}

TEST(ZeroSource, EverythingVanishes) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("zero-source");
  const CKForm psi = build_ck_form(geo, KillingField::zero(2));
  const Vec p = sample_ball(rng, 8);
  const Vec Y = sample_unit_vector(rng, 8);
  EXPECT_EQ(max_abs(psi.at(p)), 0.0);
  EXPECT_EQ(ck_residual(geo, psi, p, Y), 0.0);
  EXPECT_EQ(lemma_ecd_residual(geo, psi, p, Y), 0.0);
  EXPECT_EQ(dpsi_residual(geo, psi, p), 0.0);
  EXPECT_EQ(integrated_residual(geo, psi, p), 0.0);
  EXPECT_EQ(codiff_check(geo, psi, p), 0.0);
  EXPECT_EQ(s2h_eigenform_residual(geo, KillingField::zero(2), p), 0.0);
}

TEST(BasisForms, FirstOrderResiduals) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("first-order");
  for (size_t i = 0; i < basis2().size(); i += 4) {
    const CKForm psi = build_ck_form(geo, basis2()[i]);
    const Vec p = sample_ball(rng, 8);
    const CkPointEvaluation ev(geo, psi, p);
    for (int k = 0; k < 3; ++k) {
      const Vec Y = sample_unit_vector(rng, 8);
      EXPECT_LT(ev.ck_residual(Y), 1e-5);
      EXPECT_LT(ev.lemma_ecd_residual(Y), 1e-5);
      EXPECT_NEAR(ev.ck_residual(Y), ck_residual(geo, psi, p, Y), 1e-15);
    }
    EXPECT_LT(ev.dpsi_residual(), 1e-5);
    EXPECT_LT(ev.codiff_check(), 1e-5);
    EXPECT_LT(rest_component(geo, psi, p), 1e-6);
    EXPECT_GT(ev.codifferential_norm(), 1e-3);
  }
}

TEST(BasisForms, ClosedFormsAreMutuallyConsistent) {
  Rng rng = test::rng_for("consistency");
  for (int s = 0; s < 20; ++s)
    EXPECT_LT(dpsi_cheie_consistency(2, sample_gaussian(rng, 8), sample_unit_vector(rng, 8)), 1e-6);
}

TEST(BasisForms, SecondOrderResiduals) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("second-order");
  const auto& xi = basis2()[7];
  const Vec p = sample_ball(rng, 8);
  EXPECT_LT(integrated_residual(geo, build_ck_form(geo, xi), p), 1e-3);
  EXPECT_LT(s2h_eigenform_relative_residual(geo, xi, p), 1e-3);
}

TEST(BasisForms, S2HPartIsALaplaceEigenformWithEigenvalueEight) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("eigenvalue");
  const auto& xi = basis2()[11];
  const auto A = nabla_x_part(geo, xi, Summand::S2H);
  const Vec p = sample_ball(rng, 8);
  const Mat a = A(p), la = geo.laplacian(A, p);
  const geometry::Frame f = geo.frame_at(p);
  const Mat ah = f.form_to_frame(a), lah = f.form_to_frame(la);
  EXPECT_NEAR((ah.array() * lah.array()).sum() / ah.squaredNorm(), 8.0, 1e-3);
}

TEST(Linearity, SumOfSources) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("linearity");
  const auto& a = basis2()[3];
  const auto& b = basis2()[16];
  const Vec p = sample_ball(rng, 8);
  const Mat sum = build_ck_form(geo, a + b).at(p);
  EXPECT_LT(max_abs(sum - build_ck_form(geo, a).at(p) - build_ck_form(geo, b).at(p)), 1e-10);
  const Vec d = geo.codifferential(build_ck_form(geo, a + b).field(), p);
  const Vec da = geo.codifferential(build_ck_form(geo, a).field(), p);
  const Vec db = geo.codifferential(build_ck_form(geo, b).field(), p);
  EXPECT_LT((d - da - db).norm(), 1e-8);
  EXPECT_LT(codiff_check(geo, build_ck_form(geo, a + b), p), 1e-5);
}

TEST(UResidual, Examples) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("u");
  const auto& xi = basis2()[9];
  const CKForm psi = build_ck_form(geo, xi);
  const Vec p = sample_ball(rng, 8);
  EXPECT_LT(u_residual(geo, psi, p), 1e-14);

  const CKForm c = constant_form(rng);
  const double eps = 1e-2;
  const CKForm perturbed(xi, [psi, c, eps](const Vec& y) { return Mat(psi.at(y) + eps * c.at(y)); });
  EXPECT_NEAR(u_residual(geo, perturbed, p), eps * geo.form_norm_at(c.at(p), p), 1e-12);

  const CKForm doubled(xi, [psi](const Vec& y) { return Mat(2.0 * psi.at(y)); });
  EXPECT_NEAR(u_residual(geo, doubled, p), geo.form_norm_at(psi.at(p), p), 1e-12);
}

TEST(NegativeControl, NonConformalKillingForms) {
  const auto& geo = geo2();
  Rng rng = test::rng_for("negative");
  const CKForm c = constant_form(rng);
  const Vec p = sample_ball(rng, 8);
  double ck = 0.0;
  for (int k = 0; k < 5; ++k) ck = std::max(ck, ck_residual(geo, c, p, sample_unit_vector(rng, 8)));
  EXPECT_GT(ck, 1e-2);
  EXPECT_GT(integrated_residual(geo, c, p), 1e-2);
}

TEST(Independence, RankTwentyOne) {
  const auto& geo = geo2();
  const auto r = independence_report(geo, 3, 42);
  EXPECT_EQ(r.dimension, 21);
  EXPECT_EQ(r.rank, 21);
  EXPECT_GT(r.smallest_kept_eigenvalue, 1e-8 * r.largest_eigenvalue);

  auto gens = basis2();
  gens.push_back(gens[4]);
  const auto d = independence_report(geo, gens, 3, 42);
  EXPECT_EQ(d.dimension, 22);
  EXPECT_EQ(d.rank, 21);
}

TEST(Independence, RejectsBadInput) {
  EXPECT_THROW(independence_report(geo2(), 0, 1), std::invalid_argument);
  EXPECT_THROW(independence_report(geo2(), std::vector<KillingField>{}, 3, 1), std::invalid_argument);
}
