#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "qkverify/finite_difference.hpp"
#include "qkverify/quat_algebra.hpp"
#include "qkverify/quaternion.hpp"

namespace qk::geometry {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using algebra::CurvatureTensor;
using algebra::ThreeForm;
using algebra::TwoForm;

/// Coordinates of a point of the affine chart q -> [q : 1] (4n reals, quaternion-major).
using ChartPoint = Vec;
/// Coordinate components of fields on the chart.
using VectorField = std::function<Vec(const ChartPoint&)>;
using CovectorField = std::function<Vec(const ChartPoint&)>;
using FormField = std::function<Mat(const ChartPoint&)>;

/// Thrown when a point cannot be evaluated reliably in the affine chart.
class ChartError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Points beyond this coordinate norm are rejected (chart conditioning).
inline constexpr double kMaxChartNorm = 1e3;

void check_chart_point(const ChartPoint& p, int n);

/// Christoffel symbols Gamma^k_{ij} = upper[k](i, j).
struct Christoffel {
  std::vector<Mat> upper;

  int dim() const { return static_cast<int>(upper.size()); }
  /// (Gamma_Y)^k_j = Gamma^k_{ij} Y^i, the connection matrix along Y.
  Mat along(const Vec& Y) const;
  /// Gamma(U, V)^k = Gamma^k_{ij} U^i V^j.
  Vec apply(const Vec& U, const Vec& V) const;
};

/// Levi-Civita symbols from metric components g and their partials dg[l] = d_l g.
Christoffel christoffel_from(const std::vector<Mat>& dg, const Mat& g);
/// Riemann tensor of a coordinate metric, one finite-difference level above `christoffel`.
CurvatureTensor riemann_from(const std::function<Christoffel(const Vec&)>& christoffel, const Mat& g, const Vec& p,
                             const FdConfig& fd);

/// Orthonormal frame at a point together with the admissible basis of Q there.
struct Frame {
  Mat E;      ///< columns: frame vectors in chart coordinates
  Mat E_inv;  ///< coordinates -> frame components
  std::array<Mat, 3> J;  ///< J_i as endomorphisms in chart coordinates

  Vec to_frame(const Vec& v) const { return E_inv * v; }
  Vec from_frame(const Vec& v) const { return E * v; }
  /// Coordinate 2-form components -> frame components (E^T psi E).
  Mat form_to_frame(const Mat& psi) const { return E.transpose() * psi * E; }
  Mat form_from_frame(const Mat& psi_hat) const { return E_inv.transpose() * psi_hat * E_inv; }
  /// Endomorphism in coordinates -> frame components.
  Mat endo_to_frame(const Mat& A) const { return E_inv * A * E; }
  Mat endo_from_frame(const Mat& A_hat) const { return E * A_hat * E_inv; }
};

/// Element of sp(n+1), i.e. an (n+1)x(n+1) quaternionic matrix with xi + xi^* = 0,
/// together with the Killing field it induces on the chart.
class KillingField {
 public:
  static KillingField make(QuatMatrix xi, double tol = 1e-12);
  static KillingField zero(int n);

  int n() const { return xi_.rows() - 1; }
  const QuatMatrix& generator() const { return xi_; }

  /// Chart pushforward of the linear action: X(q) = xi11 q + xi12 - q (xi21 q + xi22).
  Vec value(const ChartPoint& q) const;
  /// Closed-form coordinate Jacobian dX at q (column i = d_i X).
  Mat jacobian(const ChartPoint& q) const;
  VectorField field() const;

  friend KillingField operator+(const KillingField& a, const KillingField& b);
  friend KillingField operator*(double s, const KillingField& a);

 private:
  explicit KillingField(QuatMatrix xi) : xi_(std::move(xi)) {}
  QuatMatrix xi_;
};

/// Standard basis of sp(n+1); exactly (n+1)(2n+3) elements.
std::vector<KillingField> killing_basis(int n);

/// Chart image of [M (q, 1)] for an invertible quaternionic (n+1)x(n+1) matrix M.
ChartPoint mobius(const QuatMatrix& M, const ChartPoint& q);
/// Differential of q -> mobius(M, q) at q, as a real 4n x 4n matrix.
Mat mobius_differential(const QuatMatrix& M, const ChartPoint& q);
/// exp(t xi) for a quaternionic matrix.
QuatMatrix quat_exp(const QuatMatrix& xi, double t);
/// Chart image of p under the flow of the Killing field for time t.
ChartPoint killing_flow(const KillingField& xi, double t, const ChartPoint& p);
/// Element of Sp(n+1) taking the chart origin to p (rotation in the plane of (p,0) and e_{n+1}).
QuatMatrix transvection(const ChartPoint& p);

/// Quaternionic projective space in the affine chart, metric normalized to reduced scalar curvature 1.
class HpnGeometry {
 public:
  explicit HpnGeometry(int n, FdConfig fd = {});

  int n() const { return n_; }
  int dim() const { return 4 * n_; }
  const FdConfig& fd() const { return fd_; }
  /// Calibrated multiple of the unit Fubini-Study form.
  double scale() const { return scale_; }
  /// Same geometry (same calibration) with a different finite-difference configuration.
  HpnGeometry with_fd(FdConfig fd) const;

  Mat metric_at(const ChartPoint& p) const;
  Christoffel christoffel_at(const ChartPoint& p) const;
  /// Same symbols from closed-form metric derivatives. For operators nested several
  /// finite-difference levels deep, where every saved level matters.
  Christoffel christoffel_exact_at(const ChartPoint& p) const;
  /// Closed-form d_l g, l = 0..4n-1.
  std::vector<Mat> metric_derivatives(const ChartPoint& p) const;
  CurvatureTensor riemann_at(const ChartPoint& p) const;
  Mat ricci_at(const ChartPoint& p) const;
  double scalar_curvature_at(const ChartPoint& p) const;
  Frame frame_at(const ChartPoint& p) const;
  /// Directional derivative of frame_at(p).E along w, in closed form.
  Mat frame_differential(const ChartPoint& p, const Vec& w) const;
  /// Admissible structure in frame components: always the standard model structure.
  const algebra::QuaternionicStructure& frame_structure() const { return std_; }

  // -- covariant calculus (coordinate components in and out) --

  /// N with N.col(i) = nabla_{d_i} X, so nabla_Y X = N Y.
  Mat cov_jacobian(const VectorField& X, const ChartPoint& p) const;
  Vec cov_deriv_vector(const VectorField& X, const ChartPoint& p, const Vec& Y) const;
  /// The 2-form (nabla X)(U, V) = g(nabla_U X, V) (not antisymmetrized).
  Mat nabla_form(const VectorField& X, const ChartPoint& p) const;

  Mat cov_deriv_form(const FormField& psi, const ChartPoint& p, const Vec& Y) const;
  /// Entry [l] is nabla_{d_l} psi.
  std::vector<Mat> cov_deriv_form_all(const FormField& psi, const ChartPoint& p) const;
  /// Entry [k][l] is (nabla^2 psi)(d_k, d_l) = (nabla_{d_k} nabla psi)(d_l).
  std::vector<std::vector<Mat>> second_cov_deriv_form(const FormField& psi, const ChartPoint& p) const;

  Mat exterior_d(const CovectorField& alpha, const ChartPoint& p) const;
  ThreeForm exterior_d(const FormField& psi, const ChartPoint& p) const;
  /// delta psi = -sum_i (nabla_{E_i} psi)(E_i, .), returned with its index raised.
  Vec codifferential(const FormField& psi, const ChartPoint& p) const;
  /// Hodge Laplacian d delta + delta d.
  Mat laplacian(const FormField& psi, const ChartPoint& p) const;
  /// nabla^* nabla psi + q(R) psi with the model curvature.
  Mat weitzenbock_laplacian(const FormField& psi, const ChartPoint& p) const;
  /// q(R) psi with the model curvature, coordinate components.
  Mat q_of_R_at(const Mat& psi, const ChartPoint& p) const;

  // -- residual evaluators --

  /// Largest |nabla_l g_{ij}|.
  double metric_compatibility_defect(const ChartPoint& p) const;
  /// Norm of the symmetric part of (nabla X) in the frame.
  double killing_defect(const VectorField& X, const ChartPoint& p) const;
  /// |nabla_Y(nabla X) - R(Y, X)| as endomorphisms (frame Frobenius norm); Y in frame components.
  double konstant_residual(const VectorField& X, const ChartPoint& p, const Vec& Y_frame) const;
  double konstant_residual(const KillingField& xi, const ChartPoint& p, const Vec& Y_frame) const;
  /// Largest component of nabla_Y omega_i orthogonal to span{omega_1, omega_2, omega_3}.
  double q_parallelism_defect(const ChartPoint& p, const Vec& Y_frame) const;

  /// Frame-induced norm of a coordinate 2-form at p.
  double form_norm_at(const Mat& psi, const ChartPoint& p) const;
  double vector_norm_at(const Vec& v, const ChartPoint& p) const;

 private:
  HpnGeometry(int n, FdConfig fd, double scale);
  Mat unit_metric(const ChartPoint& p) const;

  int n_;
  FdConfig fd_;
  double scale_ = 1.0;
  algebra::QuaternionicStructure std_;
  algebra::CurvatureTensor model_;
};

}  // namespace qk::geometry
