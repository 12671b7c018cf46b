#include "qhc/rng.hpp"

namespace qhc {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                    std::uint32_t(stream >> 32), 0x51u};
  eng_.seed(seq);
}

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(eng_);
}

DenseTensor random_tensor(int rank, int dim, Rng& rng) {
  DenseTensor t(rank, dim);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = rng.normal();
  return t;
}

}  // namespace qhc
