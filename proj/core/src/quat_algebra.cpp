#include "qkverify/quat_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "qkverify/quaternion.hpp"

namespace qk::algebra {

TwoForm TwoForm::from_antisymmetric(const Mat& m, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("TwoForm: component matrix must be square");
  const double defect = m.size() == 0 ? 0.0 : (m + m.transpose()).cwiseAbs().maxCoeff();
  if (defect > tol) throw std::invalid_argument("TwoForm: matrix is not antisymmetric (defect " + std::to_string(defect) + ")");
  return skew_part(m);
}

ThreeForm& ThreeForm::operator+=(const ThreeForm& o) {
  if (o.dim_ != dim_) throw std::invalid_argument("ThreeForm: dimension mismatch");
  for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

ThreeForm& ThreeForm::operator*=(double s) {
  for (auto& x : v_) x *= s;
  return *this;
}

double ThreeForm::norm() const {
  double s = 0.0;
  for (double x : v_) s += x * x;
  return std::sqrt(s / 6.0);
}

ThreeForm ThreeForm::transformed(const Mat& E) const {
  const int d = dim_;
  if (E.rows() != d || E.cols() != d) throw std::invalid_argument("ThreeForm: basis change has wrong size");
  // one slot at a time keeps this at d^4
  ThreeForm a(d), b(d), c(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += (*this)(m, j, k) * E(m, i);
        a(i, j, k) = s;
      }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += a(i, m, k) * E(m, j);
        b(i, j, k) = s;
      }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += b(i, j, m) * E(m, k);
        c(i, j, k) = s;
      }
  return c;
}

double ThreeForm::antisymmetry_defect() const {
  double d = 0.0;
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b)
      for (int c = 0; c < dim_; ++c) {
        const double t = (*this)(a, b, c);
        d = std::max({d, std::abs(t + (*this)(b, a, c)), std::abs(t + (*this)(a, c, b))});
      }
  return d;
}

QuaternionicStructure::QuaternionicStructure(int n, Mat g, std::array<Mat, 3> J)
    : n_(n), g_(std::move(g)), g_inv_(g_.inverse()), J_(std::move(J)) {}

QuaternionicStructure QuaternionicStructure::make(int n, Mat g, std::array<Mat, 3> J, double tol) {
  if (n < 1) throw std::invalid_argument("QuaternionicStructure: n must be positive");
  const int dim = 4 * n;
  if (g.rows() != dim || g.cols() != dim) throw std::invalid_argument("QuaternionicStructure: metric has wrong shape");
  for (const auto& j : J)
    if (j.rows() != dim || j.cols() != dim) throw std::invalid_argument("QuaternionicStructure: J_i has wrong shape");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument("QuaternionicStructure: metric not symmetric");
  const Mat id = Mat::Identity(dim, dim);
  auto close = [&](const Mat& a, const Mat& b, double s) { return (a - b).cwiseAbs().maxCoeff() <= tol * s; };
  for (int i = 0; i < 3; ++i) {
    const Mat& Ji = J[static_cast<size_t>(i)];
    const double js = std::max(1.0, Ji.cwiseAbs().maxCoeff());
    if (!close(Ji * Ji, -id, js * js)) throw std::invalid_argument("QuaternionicStructure: J_i^2 != -Id");
    if (!close(Ji.transpose() * g * Ji, g, js * js * scale))
      throw std::invalid_argument("QuaternionicStructure: J_i is not a g-isometry");
    for (int k = i + 1; k < 3; ++k) {
      const Mat& Jk = J[static_cast<size_t>(k)];
      if (!close(Ji * Jk, -(Jk * Ji), js * js)) throw std::invalid_argument("QuaternionicStructure: J_i, J_j do not anticommute");
    }
  }
  if (!close(J[0] * J[1], J[2], 1.0)) throw std::invalid_argument("QuaternionicStructure: orientation J1 J2 = J3 violated");
  return QuaternionicStructure(n, std::move(g), std::move(J));
}

double QuaternionicStructure::q_inner(const Mat& P, const Mat& R) const {
  return (g_inv_ * P.transpose() * g_ * R).trace() / static_cast<double>(dim());
}

QuaternionicStructure standard_structure(int n) {
  if (n < 2) throw std::invalid_argument("standard_structure: quaternionic dimension n must be >= 2 (real dimension >= 8)");
  const int dim = 4 * n;
  std::array<Mat, 3> J;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Matrix4d block = right_mult_matrix(-1.0 * Quat::unit(i + 1));
    Mat m = Mat::Zero(dim, dim);
    for (int a = 0; a < n; ++a) m.block<4, 4>(4 * a, 4 * a) = block;
    J[static_cast<size_t>(i)] = m;
  }
  return QuaternionicStructure::make(n, Mat::Identity(dim, dim), std::move(J));
}

std::array<TwoForm, 3> kaehler_forms(const QuaternionicStructure& S) {
  std::array<TwoForm, 3> out;
  for (int i = 0; i < 3; ++i)
    out[static_cast<size_t>(i)] = TwoForm::from_antisymmetric(S.J(i).transpose() * S.metric(), 1e-8);
  return out;
}

double form_inner(const QuaternionicStructure& S, const TwoForm& a, const TwoForm& b) {
  const Mat& gi = S.metric_inverse();
  return 0.5 * (gi * a.matrix() * gi * b.matrix().transpose()).trace();
}

double form_norm(const QuaternionicStructure& S, const TwoForm& a) {
  return std::sqrt(std::max(0.0, form_inner(S, a, a)));
}

TwoForm wedge_covectors(const Vec& a, const Vec& b) {
  return TwoForm::skew_part(2.0 * (a * b.transpose()));
}

TwoForm wedge(const QuaternionicStructure& S, const Vec& X, const Vec& Y) {
  return wedge_covectors(S.metric() * X, S.metric() * Y);
}

ThreeForm wedge(const Vec& alpha, const TwoForm& beta) {
  const int d = beta.dim();
  ThreeForm out(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        out(a, b, c) = alpha(a) * beta(b, c) - alpha(b) * beta(a, c) + alpha(c) * beta(a, b);
  return out;
}

TwoForm interior(const Vec& Y, const ThreeForm& T) {
  const int d = T.dim();
  Mat m = Mat::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    if (Y(a) == 0.0) continue;
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) m(b, c) += Y(a) * T(a, b, c);
  }
  return TwoForm::skew_part(m);
}

TwoForm pullback(const QuaternionicStructure& S, int i, const TwoForm& psi) {
  return TwoForm::skew_part(S.J(i).transpose() * psi.matrix() * S.J(i));
}

Eigen::Vector3d s2h_coefficients(const TwoForm& alpha, const QuaternionicStructure& S) {
  const auto omega = kaehler_forms(S);
  Eigen::Vector3d c;
  for (int i = 0; i < 3; ++i) {
    const auto& w = omega[static_cast<size_t>(i)];
    c(i) = form_inner(S, alpha, w) / form_inner(S, w, w);
  }
  return c;
}

FormDecomposition decompose(const TwoForm& psi, const QuaternionicStructure& S) {
  const auto omega = kaehler_forms(S);
  const Eigen::Vector3d c = s2h_coefficients(psi, S);
  TwoForm s2h(S.dim());
  for (int i = 0; i < 3; ++i) s2h += c(i) * omega[static_cast<size_t>(i)];
  TwoForm s2e = psi;
  for (int i = 0; i < 3; ++i) s2e += pullback(S, i, psi);
  s2e *= 0.25;
  TwoForm rest = psi - s2h - s2e;
  return {std::move(s2h), std::move(s2e), std::move(rest)};
}

std::pair<TwoForm, TwoForm> project_decomposable(const Vec& X, const Vec& Y, const QuaternionicStructure& S) {
  const auto omega = kaehler_forms(S);
  TwoForm h(S.dim());
  for (const auto& w : omega) h += w.eval(X, Y) * w;
  h *= 1.0 / (2.0 * S.n());
  TwoForm e = wedge(S, X, Y);
  for (int i = 0; i < 3; ++i) e += wedge(S, S.J(i) * X, S.J(i) * Y);
  e *= 0.25;
  return {std::move(h), std::move(e)};
}

Mat form_to_endomorphism(const QuaternionicStructure& S, const TwoForm& alpha) {
  return S.metric_inverse() * alpha.matrix().transpose();
}

TwoForm endomorphism_to_form(const QuaternionicStructure& S, const Mat& A) {
  return TwoForm::skew_part(A.transpose() * S.metric());
}

Mat CurvatureTensor::form(const Vec& X, const Vec& Y) const {
  Mat m = Mat::Zero(dim_, dim_);
  for (int a = 0; a < dim_; ++a) {
    if (X(a) == 0.0) continue;
    for (int b = 0; b < dim_; ++b) {
      const double w = X(a) * Y(b);
      if (w == 0.0) continue;
      for (int c = 0; c < dim_; ++c)
        for (int d = 0; d < dim_; ++d) m(c, d) += w * (*this)(a, b, c, d);
    }
  }
  return m;
}

CurvatureTensor CurvatureTensor::transformed(const Mat& E) const {
  const int d = dim_;
  // Contract one slot at a time; each pass moves the transformed slot to the back.
  std::vector<double> cur = v_;
  std::vector<double> next(cur.size());
  for (int pass = 0; pass < 4; ++pass) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int a = 0; a < d; ++a) {
            double s = 0.0;
            for (int l = 0; l < d; ++l)
              s += cur[static_cast<size_t>(((l * d + i) * d + j) * d + k)] * E(l, a);
            next[static_cast<size_t>(((i * d + j) * d + k) * d + a)] = s;
          }
    std::swap(cur, next);
  }
  CurvatureTensor out(d);
  out.v_ = std::move(cur);
  return out;
}

Mat CurvatureTensor::ricci(const Mat& g_inv) const {
  Mat ric = Mat::Zero(dim_, dim_);
  for (int b = 0; b < dim_; ++b)
    for (int c = 0; c < dim_; ++c) {
      double s = 0.0;
      for (int a = 0; a < dim_; ++a)
        for (int d = 0; d < dim_; ++d) s += g_inv(a, d) * (*this)(a, b, c, d);
      ric(b, c) = s;
    }
  return ric;
}

double CurvatureTensor::scalar(const Mat& g_inv) const { return (g_inv * ricci(g_inv)).trace(); }

double CurvatureTensor::symmetry_defect() const {
  double m = 0.0;
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b)
      for (int c = 0; c < dim_; ++c)
        for (int d = 0; d < dim_; ++d) {
          const double r = (*this)(a, b, c, d);
          m = std::max({m, std::abs(r + (*this)(b, a, c, d)), std::abs(r + (*this)(a, b, d, c)),
                        std::abs(r - (*this)(c, d, a, b))});
        }
  return m;
}

double CurvatureTensor::bianchi_defect() const {
  double m = 0.0;
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b)
      for (int c = 0; c < dim_; ++c)
        for (int d = 0; d < dim_; ++d)
          m = std::max(m, std::abs((*this)(a, b, c, d) + (*this)(b, c, a, d) + (*this)(c, a, b, d)));
  return m;
}

double CurvatureTensor::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

CurvatureTensor model_curvature(const QuaternionicStructure& S, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("model_curvature: nu must be positive");
  const int d = S.dim();
  const auto omega = kaehler_forms(S);
  CurvatureTensor R(d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const Vec X = Vec::Unit(d, a);
      const Vec Y = Vec::Unit(d, b);
      TwoForm f = wedge(S, X, Y);
      for (int i = 0; i < 3; ++i) {
        f += wedge(S, S.J(i) * X, S.J(i) * Y);
        const auto& w = omega[static_cast<size_t>(i)];
        f += (2.0 * w.eval(X, Y)) * w;
      }
      f *= -nu / 4.0;
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          R(a, b, c, e) = f(c, e);
          R(b, a, c, e) = -f(c, e);
        }
    }
  return R;
}

TwoForm act_on_form(const Mat& endo, const TwoForm& psi) {
  return TwoForm::skew_part(-(endo.transpose() * psi.matrix() + psi.matrix() * endo));
}

TwoForm q_of_R(const CurvatureTensor& R, const TwoForm& psi, const QuaternionicStructure& S, const Mat& frame) {
  const int d = S.dim();
  if (frame.rows() != d || frame.cols() != d) throw std::invalid_argument("q_of_R: frame has wrong shape");
  const double gram_dev = (frame.transpose() * S.metric() * frame - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  if (gram_dev > 1e-10)
    throw std::invalid_argument("q_of_R: frame is not orthonormal (Gram deviation " + std::to_string(gram_dev) + ")");
  Mat acc = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const Vec Ei = frame.col(i);
    for (int j = 0; j < d; ++j) {
      const Vec Ej = frame.col(j);
      const Mat A = form_to_endomorphism(S, TwoForm::skew_part(R.form(Ei, Ej)));
      const TwoForm beta = act_on_form(A, psi);
      const Vec contracted = beta.matrix().transpose() * Ei;  // beta(E_i, .)
      const Vec Ej_flat = S.metric() * Ej;
      acc += Ej_flat * contracted.transpose() - contracted * Ej_flat.transpose();
    }
  }
  return TwoForm::skew_part(acc);
}

TwoForm q_of_R(const CurvatureTensor& R, const TwoForm& psi, const QuaternionicStructure& S) {
  return q_of_R(R, psi, S, Mat::Identity(S.dim(), S.dim()));
}

}  // namespace qk::algebra
