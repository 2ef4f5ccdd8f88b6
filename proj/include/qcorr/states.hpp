#pragma once

#include <cstdint>

#include "qcorr/qmath.hpp"

namespace qcorr {

// Identifies one reproducible random stream. Distinct (seed, stream_index)
// pairs give statistically independent streams, so generation can be
// sharded freely (one stream per record).
struct StateSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;
};

// Philox 4x32-10 counter-based generator. Key = seed, counter words
// 2..3 = stream index, words 0..1 = block counter.
class Philox4x32 {
 public:
  Philox4x32(std::uint64_t seed, std::uint64_t stream);
  std::uint32_t next_u32();

 private:
  void generate_block();
  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint32_t out_[4];
  int avail_ = 0;
};

// Standard normal variates via Box-Muller on top of Philox.
class GaussianStream {
 public:
  explicit GaussianStream(StateSeed s) : prng_(s.seed, s.stream_index) {}

  double next_normal();
  double next_uniform();  // uniform in (0, 1]

 private:
  Philox4x32 prng_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Ginibre-induced random state: rho = G G^dagger / Tr(G G^dagger) with G a
// 4 x ancilla_dim matrix of independent standard complex Gaussians.
// ancilla_dim = 4 is the Hilbert-Schmidt measure; smaller values bias
// toward purer (lower-rank) states.
ComplexMatrix4 random_state_induced(GaussianStream& g, int ancilla_dim);

// Haar-random pure state mixed with white noise at a uniform visibility:
// rho = v |psi><psi| + (1-v)/4, v ~ U(0,1).
ComplexMatrix4 random_state_noisy_pure(GaussianStream& g);

// Production ensemble: a noisy pure state with probability 0.65, otherwise
// a Hilbert-Schmidt state. The weight balances the five correlation-class
// populations: steerable states end up the rarest and class equalization
// keeps about a third of the raw set.
ComplexMatrix4 random_state(GaussianStream& g);
ComplexMatrix4 random_state(StateSeed s);

}  // namespace qcorr
