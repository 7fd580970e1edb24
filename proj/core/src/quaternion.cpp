#include "qkverify/quaternion.hpp"

#include <algorithm>
#include <stdexcept>

namespace qk {

QuatMatrix QuatMatrix::operator*(const QuatMatrix& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("QuatMatrix: shape mismatch in product");
  QuatMatrix out(rows_, o.cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < o.cols_; ++c) {
      Quat acc;
      for (int k = 0; k < cols_; ++k) acc += (*this)(r, k) * o(k, c);
      out(r, c) = acc;
    }
  return out;
}

QuatMatrix QuatMatrix::operator+(const QuatMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("QuatMatrix: shape mismatch in sum");
  QuatMatrix out(rows_, cols_);
  for (size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] + o.data_[i];
  return out;
}

QuatMatrix QuatMatrix::operator*(double s) const {
  QuatMatrix out(rows_, cols_);
  for (size_t i = 0; i < data_.size(); ++i) out.data_[i] = s * data_[i];
  return out;
}

double QuatMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& q : data_) m = std::max(m, q.norm());
  return m;
}

Eigen::Matrix4d left_mult_matrix(const Quat& l) {
  Eigen::Matrix4d m;
  for (int c = 0; c < 4; ++c) {
    const Quat col = l * Quat::unit(c);
    for (int r = 0; r < 4; ++r) m(r, c) = col[r];
  }
  return m;
}

Eigen::Matrix4d right_mult_matrix(const Quat& r) {
  Eigen::Matrix4d m;
  for (int c = 0; c < 4; ++c) {
    const Quat col = Quat::unit(c) * r;
    for (int k = 0; k < 4; ++k) m(k, c) = col[k];
  }
  return m;
}

Eigen::MatrixXd QuatMatrix::to_real() const {
  Eigen::MatrixXd out(4 * rows_, 4 * cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out.block<4, 4>(4 * r, 4 * c) = left_mult_matrix((*this)(r, c));
  return out;
}

QuatMatrix QuatMatrix::from_real(const Eigen::MatrixXd& real) {
  if (real.rows() % 4 != 0 || real.cols() % 4 != 0)
    throw std::invalid_argument("QuatMatrix::from_real: dimensions must be multiples of 4");
  QuatMatrix out(static_cast<int>(real.rows() / 4), static_cast<int>(real.cols() / 4));
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) {
      // The first column of a left-multiplication block is the quaternion itself.
      const auto col = real.block<4, 1>(4 * r, 4 * c);
      out(r, c) = Quat(col(0), col(1), col(2), col(3));
    }
  return out;
}

std::vector<Quat> to_quats(const Eigen::VectorXd& v) {
  if (v.size() % 4 != 0) throw std::invalid_argument("to_quats: length must be a multiple of 4");
  std::vector<Quat> out(static_cast<size_t>(v.size() / 4));
  for (size_t a = 0; a < out.size(); ++a) {
    const auto i = static_cast<Eigen::Index>(4 * a);
    out[a] = Quat(v(i), v(i + 1), v(i + 2), v(i + 3));
  }
  return out;
}

Eigen::VectorXd from_quats(const std::vector<Quat>& q) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(4 * q.size()));
  for (size_t a = 0; a < q.size(); ++a)
    for (int c = 0; c < 4; ++c) out(static_cast<Eigen::Index>(4 * a + c)) = q[a][c];
  return out;
}

}  // namespace qk
