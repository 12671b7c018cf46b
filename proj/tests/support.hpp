#pragma once

#include <map>
#include <memory>

#include <unsupported/Eigen/MatrixFunctions>

#include "qhc/decomposition.hpp"
#include "qhc/rng.hpp"
#include "qhc/tensor_ops.hpp"
#include "qhc/torsion.hpp"

namespace qhc::testing {

struct Banks {
  ModelSpace m;
  PairCoords pc;
  GlBlocks gl;
  ProjectorBank bank;
  TorsionBank tb;

  explicit Banks(int n)
      : m(build_model(n)), pc(m.dim()), gl(build_gl_projectors(m, pc)),
        bank(build_sp_projectors(m, pc, gl)), tb(m) {}
};

/// Built once per n and shared by all tests of a binary.
inline const Banks& banks(int n) {
  static std::map<int, std::unique_ptr<Banks>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Banks>(n);
  return *slot;
}

/// Random element of Sp(n)Sp(1): exponential of a skew matrix commuting with I, J, K plus an
/// element of span(I, J, K).
inline Mat random_spsp(const ModelSpace& m, Rng& rng, double sp1 = 1.0) {
  const int d = m.dim();
  Mat x(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
  x -= x.transpose().eval();
  Mat avg = x;
  for (int a = 0; a < 3; ++a) avg -= m.structure(a).matrix() * x * m.structure(a).matrix();
  Mat gen = 0.25 * avg;
  for (int a = 0; a < 3; ++a) gen += sp1 * rng.normal() * m.structure(a).matrix();
  return gen.exp();
}

/// (g.T)(x_1, ..) = T(g^T x_1, ..) for orthogonal g.
inline DenseTensor act(const Mat& g, const DenseTensor& t) {
  const int d = t.dim();
  DenseTensor out = t;
  for (int s = 0; s < t.rank(); ++s) {
    DenseTensor next(t.rank(), d);
    const std::size_t st = out.stride(s);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const int i = int((k / st) % d);
      const std::size_t base = k - i * st;
      double v = 0;
      for (int j = 0; j < d; ++j) v += g(i, j) * out[base + j * st];
      next[k] = v;
    }
    out = next;
  }
  return out;
}

/// Free state: xi and each W-slice of the derivative in the torsion space, gamma and lambda
/// unconstrained.
inline TorsionState random_state(const TorsionBank& tb, std::uint64_t seed) {
  const int d = tb.model().dim();
  Rng rng(seed);
  TorsionState s = TorsionState::zero(d);
  s.xi = tb.sample(-1, seed, 1);
  for (int k = 0; k < 3; ++k) s.dxi += outer(random_tensor(1, d, rng), tb.sample(-1, seed, 10 + k));
  for (int a = 0; a < 3; ++a) {
    DenseTensor g = random_tensor(2, d, rng);
    s.gamma[a] = 0.5 * (g - permute_slots(g, {1, 0, 2, 3}));
    s.lambda[a] = random_tensor(1, d, rng);
  }
  return s;
}

}  // namespace qhc::testing
