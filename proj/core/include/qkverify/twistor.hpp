#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qkverify/hpn_geometry.hpp"

namespace qk::twistor {

using geometry::ChartPoint;
using geometry::Christoffel;
using geometry::HpnGeometry;
using geometry::KillingField;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

/// A complex structure J = a J_1 + b J_2 + c J_3 on T_p M, the J_i being the frame structures at p.
struct TwistorPoint {
  ChartPoint base;
  Vec3 fiber;

  /// Throws std::invalid_argument unless |fiber| = 1 within `tol`.
  static TwistorPoint make(ChartPoint base, const Vec3& fiber, double tol = 1e-12);
};

/// Tangent vector at a twistor point split into its horizontal part (a tangent vector of the
/// base, chart components) and its vertical part (coefficients in J_1, J_2, J_3, orthogonal to
/// the fiber point).
struct TwistorTangent {
  Vec horizontal;
  Vec3 vertical = Vec3::Zero();
};

/// Twistor coordinates: 4n chart coordinates followed by stereographic coordinates of the fiber
/// point, taken from the pole (0, 0, 1).
Vec3 fiber_from_stereo(const Eigen::Vector2d& s);
Eigen::Vector2d stereo_from_fiber(const Vec3& a);

/// Split Levi-Civita formulas: which kinds of vector field are differentiated (derivative direction first).
enum class LcCase { HorizontalHorizontal, VerticalHorizontal, HorizontalVertical, VerticalVertical };

/// Arguments for the split Levi-Civita formulas. Y and V are base vectors (V is extended as a constant
/// coordinate field); B and C are Q-coefficients, extended with constant coefficients in the frame.
struct LcArguments {
  Vec Y;
  Vec V;
  Vec3 B = Vec3::Zero();
  Vec3 C = Vec3::Zero();
};

/// Second derivatives of the lifted Killing field and of the vertical field
/// induced by A = (nabla X)^{S^2H}.
enum class SecondDerivCase {
  XbarHHH,  // g(nabla^2 Xbar(Y, U), V)
  XbarHHV,  // g(nabla^2 Xbar(Y, U), B)
  XbarHVH,  // g(nabla^2 Xbar(Y, B), U)
  XbarVHH,  // g(nabla^2 Xbar(B, Y), U)
  XbarVHV,  // g(nabla^2 Xbar(B, Y), C)
  XbarVVH,  // g(nabla^2 Xbar(B, C), Y)
  XbarHVV,  // g(nabla^2 Xbar(Y, B), C)
  AHHH,     // g(nabla^2 A~(Y, U), V)
  AHHV,     // g(nabla^2 A~(Y, U), B)
  AHVH,     // g(nabla^2 A~(Y, B), U)
  AHVV,     // g(nabla^2 A~(Y, B), C)
  AVHH,     // g(nabla^2 A~(B, Y), U)
  AVHV,     // g(nabla^2 A~(B, Y), C)
  AVVH,     // g(nabla^2 A~(B, C), Y)
};
inline constexpr int kSecondDerivCaseCount = 14;
std::string to_string(SecondDerivCase c);

/// Horizontal base vectors Y, U, V and vertical vectors B, C (orthogonal to the fiber point).
struct SecondDerivArguments {
  Vec Y;
  Vec U;
  Vec V;
  Vec3 B = Vec3::Zero();
  Vec3 C = Vec3::Zero();
};

/// Scalar field on the twistor space in twistor coordinates.
using ScalarField = std::function<double(const Vec&)>;

/// Everything the checks need at one twistor point, all in coordinates.
struct LocalData {
  Vec z;
  Vec x;
  Vec3 a;
  geometry::Frame frame;
  Mat g;        ///< base metric at x
  Mat M;        ///< d a / d sigma (3 x 2)
  Mat C;        ///< vertical part of a horizontal coordinate vector: vert = M sdot + C xdot
  std::vector<Eigen::Matrix3d> theta;  ///< theta[mu](k, l) = <nabla_mu J_k, J_l>
  Mat J;        ///< the structure J = sum a_k J_k(x) in chart coordinates
  std::array<Vec3, 3> basis;  ///< admissible Q-basis with basis[0] = a
};

/// The twistor space of HP^n with its Kaehler-Einstein metric gbar and complex structure Jcal.
class TwistorSpace {
 public:
  /// Nested operators here stack up to four finite-difference levels; a coarser step than the
  /// base default keeps round-off below truncation error.
  static constexpr double kDefaultStep = 1e-2;

  explicit TwistorSpace(const HpnGeometry& base, FdConfig fd = {kDefaultStep, false});

  int n() const { return base_.n(); }
  int dim() const { return 4 * base_.n() + 2; }
  const HpnGeometry& base() const { return base_; }
  const FdConfig& fd() const { return fd_; }

  Vec to_coordinates(const TwistorPoint& z) const;
  TwistorPoint from_coordinates(const Vec& z) const;

  LocalData local(const Vec& z) const;
  Mat metric_at(const Vec& z) const;
  /// Jcal as an endomorphism of twistor coordinates.
  Mat complex_structure_at(const Vec& z) const;
  /// Kaehler form omega_bar(U, V) = gbar(Jcal U, V).
  Mat kaehler_form_at(const Vec& z) const;
  /// Levi-Civita symbols of gbar from finite differences of gbar.
  Christoffel christoffel_at(const Vec& z) const;
  algebra::CurvatureTensor riemann_at(const Vec& z) const;
  Mat ricci_at(const Vec& z) const;
  double scalar_curvature_at(const Vec& z) const;

  Vec assemble(const LocalData& L, const TwistorTangent& t) const;
  Vec assemble(const Vec& z, const TwistorTangent& t) const { return assemble(local(z), t); }
  TwistorTangent split(const LocalData& L, const Vec& v) const;
  TwistorTangent split(const Vec& z, const Vec& v) const { return split(local(z), v); }
  Vec horizontal_lift(const LocalData& L, const Vec& Y) const { return assemble(L, {Y, Vec3::Zero()}); }
  Vec vertical_vector(const LocalData& L, const Vec3& w) const { return assemble(L, {Vec::Zero(4 * n()), w}); }

  /// Norm of a tangent vector under gbar.
  double norm(const Vec& z, const Vec& v) const;

  // -- the lift of a Killing field --

  /// Coefficients of A = (nabla X)^{S^2H} in J_1, J_2, J_3 at the base point.
  Vec3 s2h_coefficients(const KillingField& xi, const Vec& x) const;
  /// X^Z = Xbar - 2 Jcal(A~).
  TwistorTangent lift_killing(const KillingField& xi, const TwistorPoint& z) const;
  /// Coordinate vector field of X^Z.
  Vec lift_killing_coords(const KillingField& xi, const Vec& z) const;
  /// Velocity of the flow of X acting on complex structures by conjugation (independent oracle).
  Vec natural_lift_coords(const KillingField& xi, const Vec& z) const;
  /// |[nabla X, J] + 2 J A~| as endomorphisms of T_p M (frame norm).
  double lift_commutator_residual(const KillingField& xi, const TwistorPoint& z) const;

  /// Covariant Jacobian of a coordinate vector field (column i = nabla_i W).
  Mat cov_jacobian(const std::function<Vec(const Vec&)>& W, const Vec& z) const;
  /// Norm of the symmetric part of gbar(nabla X^Z, .) in a gbar-orthonormal basis.
  double lift_killing_defect(const KillingField& xi, const Vec& z) const;
  /// Norm of the Lie derivative of Jcal along X^Z in a gbar-orthonormal basis.
  double lift_holomorphy_defect(const KillingField& xi, const Vec& z) const;

  /// Largest |nabla_E Jcal| over a gbar-orthonormal basis E (zero for a Kaehler structure).
  double kaehler_defect(const Vec& z) const;

  // -- Levi-Civita connection in split form --

  TwistorTangent lc_connection(const Vec& z, LcCase c, const LcArguments& args) const;
  /// The same covariant derivative from the coordinate Levi-Civita connection of gbar.
  TwistorTangent lc_fd(const Vec& z, LcCase c, const LcArguments& args) const;
  /// gbar-norm of lc_connection - lc_fd.
  double lc_residual(const Vec& z, LcCase c, const LcArguments& args) const;

  // -- Hamiltonian --

  /// f^X = -(1 / (2(n+1))) trace(Jcal nabla X^Z), the trace taken of the 2-form
  /// (U, V) -> gbar(nabla_U X^Z, Jcal V). With this reading X^Z = Jcal grad f^X.
  double hamiltonian(const KillingField& xi, const Vec& z) const;
  ScalarField hamiltonian_field(const KillingField& xi) const;
  /// |X^Z - Jcal grad f^X| under gbar.
  double gradient_check(const KillingField& xi, const Vec& z) const;

  // -- second derivatives --

  /// gbar(nabla^2 W(P, Q), R) with P, Q, R coordinate vectors; W = Xbar or A~.
  double second_deriv_fd(const KillingField& xi, const Vec& z, SecondDerivCase c, const SecondDerivArguments& args) const;
  double second_deriv_formula(const KillingField& xi, const Vec& z, SecondDerivCase c,
                              const SecondDerivArguments& args) const;
  double second_deriv_residual(const KillingField& xi, const Vec& z, SecondDerivCase c,
                               const SecondDerivArguments& args) const;

  // -- Obata --

  /// |4 nabla^2(df)(Y,U,V) + 2 df(Y) g(U,V) + df(U) g(Y,V) + df(V) g(Y,U) - df(JU) w(Y,V) - df(JV) w(Y,U)|,
  /// with coordinate vectors Y, U, V.
  double obata_residual(const ScalarField& f, const Vec& z, const Vec& Y, const Vec& U, const Vec& V) const;

  // -- curvature --

  /// Sectional curvature of gbar on the plane of two tangent vectors.
  double sectional_curvature(const Vec& z, const Vec& P, const Vec& Q) const;

 private:
  Vec3 s2h_coefficients(const KillingField& xi, const Vec& x, const geometry::Frame& f) const;
  Mat q_endomorphism(const LocalData& L, const Vec3& b) const;

  HpnGeometry base_;
  FdConfig fd_;
};

/// Oriented admissible basis of R^3 completing a unit vector: (a, e2, e3) with a x e2 = e3.
std::array<Vec3, 3> complete_basis(const Vec3& a);

}  // namespace qk::twistor
