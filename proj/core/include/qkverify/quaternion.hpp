#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace qk {

/// Real quaternion w + x i + y j + z k.
struct Quat {
  double w = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Quat() = default;
  constexpr Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static constexpr Quat real(double r) { return {r, 0.0, 0.0, 0.0}; }
  /// Basis element by index: 0 -> 1, 1 -> i, 2 -> j, 3 -> k.
  static constexpr Quat unit(int idx) {
    return {idx == 0 ? 1.0 : 0.0, idx == 1 ? 1.0 : 0.0, idx == 2 ? 1.0 : 0.0,
            idx == 3 ? 1.0 : 0.0};
  }

  constexpr double operator[](int idx) const {
    return idx == 0 ? w : idx == 1 ? x : idx == 2 ? y : z;
  }

  constexpr Quat conj() const { return {w, -x, -y, -z}; }
  constexpr double norm2() const { return w * w + x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  Quat inverse() const {
    const double n2 = norm2();
    return {w / n2, -x / n2, -y / n2, -z / n2};
  }

  constexpr Quat operator-() const { return {-w, -x, -y, -z}; }
  constexpr Quat& operator+=(const Quat& o) {
    w += o.w; x += o.x; y += o.y; z += o.z;
    return *this;
  }
  constexpr Quat& operator-=(const Quat& o) {
    w -= o.w; x -= o.x; y -= o.y; z -= o.z;
    return *this;
  }
};

constexpr Quat operator+(Quat a, const Quat& b) { return a += b; }
constexpr Quat operator-(Quat a, const Quat& b) { return a -= b; }
constexpr Quat operator*(double s, const Quat& q) { return {s * q.w, s * q.x, s * q.y, s * q.z}; }
constexpr Quat operator*(const Quat& q, double s) { return s * q; }

// Hamilton product.
constexpr Quat operator*(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

/// Dense quaternionic matrix, row-major; acts on column vectors by left multiplication.
class QuatMatrix {
 public:
  QuatMatrix() = default;
  QuatMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols)) {}

  static QuatMatrix identity(int size) {
    QuatMatrix m(size, size);
    for (int i = 0; i < size; ++i) m(i, i) = Quat::real(1.0);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Quat& operator()(int r, int c) { return data_[static_cast<size_t>(r * cols_ + c)]; }
  const Quat& operator()(int r, int c) const { return data_[static_cast<size_t>(r * cols_ + c)]; }

  QuatMatrix adjoint() const {
    QuatMatrix out(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c).conj();
    return out;
  }

  QuatMatrix operator*(const QuatMatrix& o) const;
  QuatMatrix operator+(const QuatMatrix& o) const;
  QuatMatrix operator*(double s) const;

  /// Largest entry norm.
  double max_abs() const;

  /// Real 4N x 4N matrix of the left action v -> M v on H^N = R^{4N}.
  Eigen::MatrixXd to_real() const;
  /// Inverse of to_real(); the input must commute with right multiplication by H.
  static QuatMatrix from_real(const Eigen::MatrixXd& real);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Quat> data_;
};

/// H^n <-> R^{4n}: quaternion a occupies components 4a..4a+3 in (w, x, y, z) order.
std::vector<Quat> to_quats(const Eigen::VectorXd& v);
Eigen::VectorXd from_quats(const std::vector<Quat>& q);

/// Real 4x4 matrix of q -> q * r (right multiplication by r).
Eigen::Matrix4d right_mult_matrix(const Quat& r);
/// Real 4x4 matrix of q -> l * q.
Eigen::Matrix4d left_mult_matrix(const Quat& l);

}  // namespace qk
