#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace qk {

using Rng = std::mt19937_64;

/// Independent stream for a named consumer, derived from the run seed.
Rng derive_rng(std::uint64_t seed, std::string_view stream);

/// Uniform point of the coordinate ball of the given radius.
Eigen::VectorXd sample_ball(Rng& rng, int dim, double radius = 1.0);
/// Uniform direction on the unit sphere.
Eigen::VectorXd sample_unit_vector(Rng& rng, int dim);
/// Standard normal entries.
Eigen::VectorXd sample_gaussian(Rng& rng, int dim);
Eigen::MatrixXd sample_gaussian(Rng& rng, int rows, int cols);

}  // namespace qk
