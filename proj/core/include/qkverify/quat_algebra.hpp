#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace qk::algebra {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Antisymmetric bilinear form, stored as its component matrix psi(e_a, e_b).
class TwoForm {
 public:
  TwoForm() = default;
  explicit TwoForm(int dim) : m_(Mat::Zero(dim, dim)) {}

  /// Antisymmetric part (m - m^T) / 2 of an arbitrary component matrix.
  static TwoForm skew_part(const Mat& m) { return TwoForm(0.5 * (m - m.transpose())); }
  /// Accepts a matrix that is already antisymmetric up to `tol`; throws otherwise.
  static TwoForm from_antisymmetric(const Mat& m, double tol = 1e-9);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  double operator()(int a, int b) const { return m_(a, b); }
  double eval(const Vec& u, const Vec& v) const { return u.dot(m_ * v); }

  TwoForm& operator+=(const TwoForm& o) { m_ += o.m_; return *this; }
  TwoForm& operator-=(const TwoForm& o) { m_ -= o.m_; return *this; }
  TwoForm& operator*=(double s) { m_ *= s; return *this; }
  friend TwoForm operator+(TwoForm a, const TwoForm& b) { return a += b; }
  friend TwoForm operator-(TwoForm a, const TwoForm& b) { return a -= b; }
  friend TwoForm operator*(double s, TwoForm a) { return a *= s; }
  friend TwoForm operator*(TwoForm a, double s) { return a *= s; }

  /// Largest absolute component.
  double max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

 private:
  explicit TwoForm(Mat m) : m_(std::move(m)) {}
  Mat m_;
};

/// Totally antisymmetric trilinear form with dense dim^3 storage.
class ThreeForm {
 public:
  ThreeForm() = default;
  explicit ThreeForm(int dim) : dim_(dim), v_(static_cast<size_t>(dim * dim * dim), 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int a, int b, int c) { return v_[index(a, b, c)]; }
  double operator()(int a, int b, int c) const { return v_[index(a, b, c)]; }

  ThreeForm& operator+=(const ThreeForm& o);
  ThreeForm& operator*=(double s);
  friend ThreeForm operator+(ThreeForm a, const ThreeForm& b) { return a += b; }
  friend ThreeForm operator*(double s, ThreeForm a) { return a *= s; }

  /// (1/6) sum of squared components; components are taken in an orthonormal basis.
  double norm() const;
  /// Components in a new basis: T'(a,b,c) = T(E e_a, E e_b, E e_c).
  ThreeForm transformed(const Mat& E) const;
  /// Deviation from total antisymmetry (largest |T(a,b,c) + T(b,a,c)| etc.).
  double antisymmetry_defect() const;

 private:
  size_t index(int a, int b, int c) const { return static_cast<size_t>((a * dim_ + b) * dim_ + c); }
  int dim_ = 0;
  std::vector<double> v_;
};

/// Pointwise quaternionic-Hermitian structure (g, J1, J2, J3) on R^{4n}.
class QuaternionicStructure {
 public:
  /// Validates every invariant (quaternion relations, orientation J1 J2 = J3, g-isometry).
  static QuaternionicStructure make(int n, Mat g, std::array<Mat, 3> J, double tol = 1e-10);

  int n() const { return n_; }
  int dim() const { return 4 * n_; }
  const Mat& metric() const { return g_; }
  const Mat& metric_inverse() const { return g_inv_; }
  const Mat& J(int i) const { return J_[static_cast<size_t>(i)]; }
  const std::array<Mat, 3>& Js() const { return J_; }

  /// Q-inner product <P, R> = (1/4n) tr(P^T R) taken in a g-orthonormal basis.
  double q_inner(const Mat& P, const Mat& R) const;

 private:
  QuaternionicStructure(int n, Mat g, std::array<Mat, 3> J);
  int n_ = 0;
  Mat g_;
  Mat g_inv_;
  std::array<Mat, 3> J_;
};

/// Three-way split of a 2-form along S^2H, S^2E and the remaining summand.
struct FormDecomposition {
  TwoForm s2h;
  TwoForm s2e;
  TwoForm rest;
};

/// Flat model on H^n: g = Id, J_i = right multiplication by -i, -j, -k (so J1 J2 = J3).
QuaternionicStructure standard_structure(int n);

std::array<TwoForm, 3> kaehler_forms(const QuaternionicStructure& S);

/// <a, b> = (1/2) sum_{a,b} alpha(E_a, E_b) beta(E_a, E_b) over a g-orthonormal frame.
double form_inner(const QuaternionicStructure& S, const TwoForm& a, const TwoForm& b);
double form_norm(const QuaternionicStructure& S, const TwoForm& a);

/// (X ^ Y)(U, V) = g(X,U) g(Y,V) - g(Y,U) g(X,V).
TwoForm wedge(const QuaternionicStructure& S, const Vec& X, const Vec& Y);
/// Wedge of two 1-forms given by their components.
TwoForm wedge_covectors(const Vec& a, const Vec& b);
/// (alpha ^ beta)(Z0, Z1, Z2) = alpha(Z0) beta(Z1, Z2) - alpha(Z1) beta(Z0, Z2) + alpha(Z2) beta(Z0, Z1).
ThreeForm wedge(const Vec& alpha, const TwoForm& beta);
/// (i_Y T)(U, V) = T(Y, U, V).
TwoForm interior(const Vec& Y, const ThreeForm& T);

/// (J_i^* psi)(U, V) = psi(J_i U, J_i V).
TwoForm pullback(const QuaternionicStructure& S, int i, const TwoForm& psi);

FormDecomposition decompose(const TwoForm& psi, const QuaternionicStructure& S);

/// Closed-form S^2H and S^2E parts of X ^ Y.
std::pair<TwoForm, TwoForm> project_decomposable(const Vec& X, const Vec& Y, const QuaternionicStructure& S);

/// alpha -> A with g(A U, V) = alpha(U, V).
Mat form_to_endomorphism(const QuaternionicStructure& S, const TwoForm& alpha);
TwoForm endomorphism_to_form(const QuaternionicStructure& S, const Mat& A);

/// Coefficients c_i with alpha^{S^2H} = sum_i c_i omega_i; equivalently the Q-element sum_i c_i J_i.
Eigen::Vector3d s2h_coefficients(const TwoForm& alpha, const QuaternionicStructure& S);

/// (4,0)-curvature tensor R(X, Y, U, V) = g(R(X,Y) U, V).
class CurvatureTensor {
 public:
  CurvatureTensor() = default;
  explicit CurvatureTensor(int dim) : dim_(dim), v_(static_cast<size_t>(dim) * dim * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int a, int b, int c, int d) { return v_[index(a, b, c, d)]; }
  double operator()(int a, int b, int c, int d) const { return v_[index(a, b, c, d)]; }

  /// The 2-form R(X, Y)(., .).
  Mat form(const Vec& X, const Vec& Y) const;
  /// Components in a new basis: R'(a,b,c,d) = R(E a, E b, E c, E d).
  CurvatureTensor transformed(const Mat& E) const;

  /// Ric(Y, U) = trace of X -> R(X, Y) U.
  Mat ricci(const Mat& g_inv) const;
  double scalar(const Mat& g_inv) const;

  /// Largest violation of the pair antisymmetries and pair symmetry.
  double symmetry_defect() const;
  double bianchi_defect() const;
  double max_abs() const;

 private:
  size_t index(int a, int b, int c, int d) const {
    return static_cast<size_t>(((a * dim_ + b) * dim_ + c) * dim_ + d);
  }
  int dim_ = 0;
  std::vector<double> v_;
};

/// R(X,Y) = -(nu/4)(X^Y + sum_i J_i X ^ J_i Y + 2 sum_i omega_i(X,Y) omega_i).
CurvatureTensor model_curvature(const QuaternionicStructure& S, double nu);

/// Derivation action (R . psi)(U, V) = -psi(R U, V) - psi(U, R V) of an endomorphism.
TwoForm act_on_form(const Mat& endo, const TwoForm& psi);

/// q(R) psi = sum_{i,j} E_j ^ i_{E_i} R(E_i, E_j) psi, with frame columns E_a.
/// Throws std::invalid_argument if the frame is not g-orthonormal to 1e-10.
TwoForm q_of_R(const CurvatureTensor& R, const TwoForm& psi, const QuaternionicStructure& S, const Mat& frame);
/// Same, using the coordinate basis as frame (requires g = Id).
TwoForm q_of_R(const CurvatureTensor& R, const TwoForm& psi, const QuaternionicStructure& S);

}  // namespace qk::algebra
