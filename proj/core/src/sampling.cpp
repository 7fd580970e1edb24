#include "qkverify/sampling.hpp"

#include <cmath>

namespace qk {

Rng derive_rng(std::uint64_t seed, std::string_view stream) {
  // FNV-1a over the stream name, mixed with the seed through seed_seq.
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

Eigen::VectorXd sample_gaussian(Rng& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  return v;
}

Eigen::MatrixXd sample_gaussian(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = normal(rng);
  return m;
}

Eigen::VectorXd sample_unit_vector(Rng& rng, int dim) {
  Eigen::VectorXd v;
  do {
    v = sample_gaussian(rng, dim);
  } while (v.norm() < 1e-8);
  return v.normalized();
}

Eigen::VectorXd sample_ball(Rng& rng, int dim, double radius) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double r = radius * std::pow(uniform(rng), 1.0 / dim);
  return r * sample_unit_vector(rng, dim);
}

}  // namespace qk
