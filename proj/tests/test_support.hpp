#pragma once

#include <Eigen/Core>

#include "qkverify/sampling.hpp"

namespace qk::test {

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Fixed streams so unit tests are reproducible.
inline Rng rng_for(const char* name) { return derive_rng(20240601, name); }

}  // namespace qk::test
