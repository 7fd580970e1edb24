#pragma once

#include <cstdint>
#include <vector>

#include "qkverify/hpn_geometry.hpp"

namespace qk::ckforms {

using geometry::ChartPoint;
using geometry::FormField;
using geometry::HpnGeometry;
using geometry::KillingField;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// psi = c_s2h (nabla X)^{S^2H} + c_s2e (nabla X)^{S^2E}, with nu = 1.
struct CkCoefficients {
  double s2h;
  double s2e;
};
CkCoefficients ck_coefficients(int n, double nu = 1.0);

/// Prefactor of dX in the second-order form of the conformal-Killing equation.
double integrated_dx_coefficient(int n);

/// A candidate conformal-Killing 2-form paired with the Killing field it should come from.
class CKForm {
 public:
  CKForm(KillingField source, FormField field) : source_(std::move(source)), field_(std::move(field)) {}

  const KillingField& source() const { return source_; }
  const FormField& field() const { return field_; }
  /// Coordinate components at p.
  Mat at(const ChartPoint& p) const { return field_(p); }

 private:
  KillingField source_;
  FormField field_;
};

/// Coordinate field of (nabla X)^{S^2H} or (nabla X)^{S^2E}.
enum class Summand { S2H, S2E };
FormField nabla_x_part(const HpnGeometry& geo, const KillingField& xi, Summand part);

CKForm build_ck_form(const HpnGeometry& geo, const KillingField& xi);

/// First covariant derivatives of psi at one point, shared by the first-order residuals.
class CkPointEvaluation {
 public:
  CkPointEvaluation(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p);

  double ck_residual(const Vec& Y_frame) const;
  double lemma_ecd_residual(const Vec& Y_frame) const;
  double dpsi_residual() const;
  double codiff_check() const;
  double codifferential_norm() const;

 private:
  int n_;
  geometry::Frame frame_;
  Mat g_;
  std::vector<Mat> nabla_;  // nabla_{d_l} psi, coordinates
  algebra::ThreeForm dpsi_;
  Vec delta_;
  Vec X_;
  algebra::QuaternionicStructure std_;
};

/// |nabla_Y psi - (1/3) i_Y d psi + (1/(4n-1)) Y ^ delta psi|; Y in frame components.
double ck_residual(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p, const Vec& Y_frame);
/// |nabla_Y psi - (1/(4n-1))(X^Y + sum J_k X ^ J_k Y - sum omega_k(X,Y) omega_k)|.
double lemma_ecd_residual(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p, const Vec& Y_frame);
/// |d psi + (3/(4n-1)) sum J_i X ^ omega_i|.
double dpsi_residual(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p);
/// Algebraic check: inserting the closed-form d psi and delta psi = X into the conformal-Killing
/// equation reproduces the closed-form nabla_Y psi. Frame components; exact up to rounding.
double dpsi_cheie_consistency(int n, const Vec& X_frame, const Vec& Y_frame);
/// |(2/3) Delta psi - q(R) psi + c dX|.
double integrated_residual(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p);
/// |delta psi - X|_g.
double codiff_check(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p);
/// |Delta A - 2(n+2) A| for A = (nabla X)^{S^2H}.
double s2h_eigenform_residual(const HpnGeometry& geo, const KillingField& xi, const ChartPoint& p);
/// Same, divided by |2(n+2) A(p)|.
double s2h_eigenform_relative_residual(const HpnGeometry& geo, const KillingField& xi, const ChartPoint& p);
/// |u| with u = psi - c_s2h (nabla X)^{S^2H} - c_s2e (nabla X)^{S^2E}, X the declared source.
double u_residual(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p);
/// Norm of the S^2H (x) Lambda^2_0 E component of psi(p).
double rest_component(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p);
/// |delta psi|_g at p.
double codifferential_norm(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p);

struct IndependenceReport {
  int dimension = 0;       ///< number of forms tested
  int rank = 0;            ///< numerical rank of their Gram matrix
  int sample_count = 0;
  double largest_eigenvalue = 0.0;
  double smallest_kept_eigenvalue = 0.0;
  double largest_dropped_eigenvalue = 0.0;
};

/// Gram rank of the forms built from the Killing basis, sampled at `sample_count` points.
IndependenceReport independence_report(const HpnGeometry& geo, int sample_count, std::uint64_t seed,
                                       double threshold = 1e-8);
/// Same for an explicit list of generators (e.g. with duplicates appended).
IndependenceReport independence_report(const HpnGeometry& geo, const std::vector<KillingField>& generators,
                                       int sample_count, std::uint64_t seed, double threshold = 1e-8);

}  // namespace qk::ckforms
