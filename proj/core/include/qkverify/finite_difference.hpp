#pragma once

#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Core>

namespace qk {

/// Central-difference configuration shared by every derivative operator.
struct FdConfig {
  double step = 1e-3;
  /// One Richardson refinement (h, h/2) on top of the 4th-order stencil.
  bool richardson = false;

  void validate() const {
    if (!(step > 1e-6 && step < 1e-1))
      throw std::invalid_argument("finite-difference step " + std::to_string(step) + " outside (1e-6, 1e-1)");
  }
};

/// 4th-order central difference of f along `dir` at x. Works for any f whose result
/// supports addition and scalar multiplication (double, Eigen vectors and matrices).
template <class F>
auto directional_derivative(F&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& dir, const FdConfig& fd) {
  using R = std::decay_t<decltype(f(x))>;
  auto stencil = [&](double h) -> R {
    const Eigen::VectorXd d = h * dir;
    R out = f(x - 2.0 * d);
    out -= 8.0 * f(x - d);
    out += 8.0 * f(x + d);
    out -= f(x + 2.0 * d);
    out *= 1.0 / (12.0 * h);
    return out;
  };
  if (!fd.richardson) return stencil(fd.step);
  const R coarse = stencil(fd.step);
  R fine = stencil(0.5 * fd.step);
  fine *= 16.0 / 15.0;
  fine -= (1.0 / 15.0) * coarse;
  return fine;
}

/// Derivative along the coordinate axis `axis`.
template <class F>
auto partial_derivative(F&& f, const Eigen::VectorXd& x, int axis, const FdConfig& fd) {
  return directional_derivative(std::forward<F>(f), x, Eigen::VectorXd::Unit(x.size(), axis), fd);
}

}  // namespace qk
