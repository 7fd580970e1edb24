#include "qkverify/ck_forms.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "qkverify/sampling.hpp"

namespace qk::ckforms {

using algebra::TwoForm;
using algebra::ThreeForm;
using geometry::Frame;

CkCoefficients ck_coefficients(int n, double nu) {
  if (nu <= 0.0) throw std::invalid_argument("ck_coefficients: nu must be positive");
  const double m = nu * (4.0 * n - 1.0);
  return {-2.0 / m, 4.0 / m};
}

double integrated_dx_coefficient(int n) { return 4.0 * (n - 1) / (3.0 * (4.0 * n - 1.0)); }

namespace {

algebra::FormDecomposition frame_decomposition(const HpnGeometry& geo, const KillingField& xi,
                                               const ChartPoint& p, const Frame& f) {
  const Mat F = geo.nabla_form(xi.field(), p);
  return algebra::decompose(TwoForm::skew_part(f.form_to_frame(F)), geo.frame_structure());
}

// Norm of a coordinate 2-form measured in a given frame.
double frame_norm(const Frame& f, const Mat& psi) { return std::sqrt(0.5 * f.form_to_frame(psi).squaredNorm()); }

// Closed-form right-hand side for nabla_Y psi, frame components.
Mat ecd_rhs(const algebra::QuaternionicStructure& S, const Vec& X, const Vec& Y) {
  const int n = S.n();
  const auto omega = algebra::kaehler_forms(S);
  TwoForm out = algebra::wedge(S, X, Y);
  for (int k = 0; k < 3; ++k) {
    out += algebra::wedge(S, S.J(k) * X, S.J(k) * Y);
    out -= omega[static_cast<size_t>(k)].eval(X, Y) * omega[static_cast<size_t>(k)];
  }
  return out.matrix() / (4.0 * n - 1.0);
}

// Closed form of d psi in frame components: -(3/(4n-1)) sum J_i X ^ omega_i.
ThreeForm dpsi_closed_form(const algebra::QuaternionicStructure& S, const Vec& X) {
  const int n = S.n();
  const auto omega = algebra::kaehler_forms(S);
  ThreeForm out(S.dim());
  for (int i = 0; i < 3; ++i) out += algebra::wedge(S.metric() * (S.J(i) * X), omega[static_cast<size_t>(i)]);
  out *= -3.0 / (4.0 * n - 1.0);
  return out;
}

}  // namespace

FormField nabla_x_part(const HpnGeometry& geo, const KillingField& xi, Summand part) {
  return [geo, xi, part](const ChartPoint& p) -> Mat {
    const Frame f = geo.frame_at(p);
    const auto dec = frame_decomposition(geo, xi, p, f);
    return f.form_from_frame((part == Summand::S2H ? dec.s2h : dec.s2e).matrix());
  };
}

CKForm build_ck_form(const HpnGeometry& geo, const KillingField& xi) {
  const CkCoefficients c = ck_coefficients(geo.n());
  FormField field = [geo, xi, c](const ChartPoint& p) -> Mat {
    const Frame f = geo.frame_at(p);
    const auto dec = frame_decomposition(geo, xi, p, f);
    return f.form_from_frame((c.s2h * dec.s2h + c.s2e * dec.s2e).matrix());
  };
  return CKForm(xi, std::move(field));
}

CkPointEvaluation::CkPointEvaluation(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p)
    : n_(geo.n()), frame_(geo.frame_at(p)), g_(geo.metric_at(p)), std_(geo.frame_structure()) {
  const int d = geo.dim();
  nabla_ = geo.cov_deriv_form_all(psi.field(), p);
  dpsi_ = ThreeForm(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        dpsi_(a, b, c) = nabla_[static_cast<size_t>(a)](b, c) - nabla_[static_cast<size_t>(b)](a, c) +
                         nabla_[static_cast<size_t>(c)](a, b);
  const Mat gi = g_.inverse();
  Vec lower = Vec::Zero(d);
  for (int l = 0; l < d; ++l) lower -= nabla_[static_cast<size_t>(l)].transpose() * gi.col(l);
  delta_ = gi * lower;
  X_ = psi.source().value(p);
}

double CkPointEvaluation::ck_residual(const Vec& Y_frame) const {
  const Vec Y = frame_.from_frame(Y_frame);
  Mat nabla = Mat::Zero(g_.rows(), g_.cols());
  for (Eigen::Index l = 0; l < Y.size(); ++l) nabla += Y(l) * nabla_[static_cast<size_t>(l)];
  const Mat iyd = algebra::interior(Y, dpsi_).matrix();
  const Mat y_wedge_delta = algebra::wedge_covectors(g_ * Y, g_ * delta_).matrix();
  return frame_norm(frame_, nabla - iyd / 3.0 + y_wedge_delta / (4.0 * n_ - 1.0));
}

double CkPointEvaluation::lemma_ecd_residual(const Vec& Y_frame) const {
  const Vec Y = frame_.from_frame(Y_frame);
  Mat nabla = Mat::Zero(g_.rows(), g_.cols());
  for (Eigen::Index l = 0; l < Y.size(); ++l) nabla += Y(l) * nabla_[static_cast<size_t>(l)];
  const Mat d = frame_.form_to_frame(nabla) - ecd_rhs(std_, frame_.to_frame(X_), Y_frame);
  return std::sqrt(0.5 * d.squaredNorm());
}

double CkPointEvaluation::dpsi_residual() const {
  ThreeForm d = dpsi_.transformed(frame_.E);
  d += -1.0 * dpsi_closed_form(std_, frame_.to_frame(X_));
  return d.norm();
}

double CkPointEvaluation::codiff_check() const {
  const Vec e = delta_ - X_;
  return std::sqrt(std::max(0.0, e.dot(g_ * e)));
}

double CkPointEvaluation::codifferential_norm() const { return std::sqrt(std::max(0.0, delta_.dot(g_ * delta_))); }

double ck_residual(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p, const Vec& Y_frame) {
  return CkPointEvaluation(geo, psi, p).ck_residual(Y_frame);
}

double lemma_ecd_residual(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p, const Vec& Y_frame) {
  return CkPointEvaluation(geo, psi, p).lemma_ecd_residual(Y_frame);
}

double dpsi_residual(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p) {
  return CkPointEvaluation(geo, psi, p).dpsi_residual();
}

double dpsi_cheie_consistency(int n, const Vec& X_frame, const Vec& Y_frame) {
  const auto S = algebra::standard_structure(n);
  // conformal-Killing equation with d psi and delta psi = X substituted
  const Mat via_dpsi = algebra::interior(Y_frame, dpsi_closed_form(S, X_frame)).matrix() / 3.0 -
                       algebra::wedge(S, Y_frame, X_frame).matrix() / (4.0 * n - 1.0);
  const Mat d = via_dpsi - ecd_rhs(S, X_frame, Y_frame);
  return std::sqrt(0.5 * d.squaredNorm());
}

double integrated_residual(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p) {
  const Frame f = geo.frame_at(p);
  const Mat lap = geo.laplacian(psi.field(), p);
  const Mat qr = geo.q_of_R_at(psi.at(p), p);
  const Mat F = geo.nabla_form(psi.source().field(), p);
  const Mat dX = F - F.transpose();
  return frame_norm(f, (2.0 / 3.0) * lap - qr + integrated_dx_coefficient(geo.n()) * dX);
}

double codiff_check(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p) {
  return CkPointEvaluation(geo, psi, p).codiff_check();
}

double s2h_eigenform_residual(const HpnGeometry& geo, const KillingField& xi, const ChartPoint& p) {
  const FormField A = nabla_x_part(geo, xi, Summand::S2H);
  const double lambda = 2.0 * (geo.n() + 2);
  return geo.form_norm_at(geo.laplacian(A, p) - lambda * A(p), p);
}

double s2h_eigenform_relative_residual(const HpnGeometry& geo, const KillingField& xi, const ChartPoint& p) {
  const FormField A = nabla_x_part(geo, xi, Summand::S2H);
  const double lambda = 2.0 * (geo.n() + 2);
  const Mat a = A(p);
  const double scale = geo.form_norm_at(lambda * a, p);
  const double abs = geo.form_norm_at(geo.laplacian(A, p) - lambda * a, p);
  // A vanishes at isolated points; fall back to the absolute defect there.
  return scale > 1e-8 ? abs / scale : abs;
}

double u_residual(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p) {
  const Frame f = geo.frame_at(p);
  const CkCoefficients c = ck_coefficients(geo.n());
  const auto dec = frame_decomposition(geo, psi.source(), p, f);
  const Mat u = f.form_to_frame(psi.at(p)) - (c.s2h * dec.s2h + c.s2e * dec.s2e).matrix();
  return std::sqrt(0.5 * u.squaredNorm());
}

double rest_component(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p) {
  const Frame f = geo.frame_at(p);
  const auto dec = algebra::decompose(TwoForm::skew_part(f.form_to_frame(psi.at(p))), geo.frame_structure());
  return algebra::form_norm(geo.frame_structure(), dec.rest);
}

double codifferential_norm(const HpnGeometry& geo, const CKForm& psi, const ChartPoint& p) {
  return CkPointEvaluation(geo, psi, p).codifferential_norm();
}

IndependenceReport independence_report(const HpnGeometry& geo, int sample_count, std::uint64_t seed,
                                       double threshold) {
  return independence_report(geo, geometry::killing_basis(geo.n()), sample_count, seed, threshold);
}

IndependenceReport independence_report(const HpnGeometry& geo, const std::vector<KillingField>& generators,
                                       int sample_count, std::uint64_t seed, double threshold) {
  const int m = static_cast<int>(generators.size());
  if (m == 0) throw std::invalid_argument("independence_report: no generators");
  if (sample_count < 1) throw std::invalid_argument("independence_report: need at least one sample point");
  const int d = geo.dim();
  const int per_point = d * (d - 1) / 2;
  if (sample_count * per_point < m)
    throw std::invalid_argument("independence_report: fewer sampled components than forms");

  Rng rng = derive_rng(seed, "independence_report");
  std::vector<ChartPoint> points;
  for (int s = 0; s < sample_count; ++s) points.push_back(sample_ball(rng, d));

  // Each column holds the frame components of one form at all sample points.
  Mat samples(sample_count * per_point, m);
  for (int s = 0; s < sample_count; ++s) {
    const Frame f = geo.frame_at(points[static_cast<size_t>(s)]);
    for (int j = 0; j < m; ++j) {
      const CKForm psi = build_ck_form(geo, generators[static_cast<size_t>(j)]);
      const Mat hat = f.form_to_frame(psi.at(points[static_cast<size_t>(s)]));
      int row = s * per_point;
      for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) samples(row++, j) = hat(a, b);
    }
  }
  const Mat gram = samples.transpose() * samples;
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  const Vec ev = es.eigenvalues();  // ascending

  IndependenceReport r;
  r.dimension = m;
  r.sample_count = sample_count;
  r.largest_eigenvalue = ev(m - 1);
  const double cut = threshold * std::max(ev(m - 1), 0.0);
  for (int i = 0; i < m; ++i) {
    if (ev(i) > cut) {
      if (r.rank++ == 0) r.smallest_kept_eigenvalue = ev(i);
    } else {
      r.largest_dropped_eigenvalue = ev(i);
    }
  }
  return r;
}

}  // namespace qk::ckforms
