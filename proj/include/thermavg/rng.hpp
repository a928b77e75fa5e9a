#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace thermavg {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser. Used to derive independent, reproducible streams
/// (model, measurements, states, times) from one instance seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Standard complex Gaussian vector (each component N(0,1/2) + i N(0,1/2)).
Eigen::VectorXcd complex_gaussian_vector(Eigen::Index n, Rng& rng);

/// Standard complex Gaussian matrix.
Eigen::MatrixXcd complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Haar-random unit vector.
Eigen::VectorXcd haar_vector(Eigen::Index n, Rng& rng);

/// Haar-random unitary (QR of a Gaussian matrix with the phase correction on R).
Eigen::MatrixXcd haar_unitary(Eigen::Index n, Rng& rng);

}  // namespace thermavg
