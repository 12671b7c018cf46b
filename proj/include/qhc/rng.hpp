#pragma once

#include <cstdint>
#include <random>

#include "qhc/dense_tensor.hpp"

namespace qhc {

/// Deterministic normal generator; each (seed, stream) pair owns an independent substream.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);
  double normal() { return dist_(eng_); }
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

/// Standard-normal entries.
DenseTensor random_tensor(int rank, int dim, Rng& rng);

}  // namespace qhc
