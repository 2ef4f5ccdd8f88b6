#include "qcorr/states.hpp"

#include <cmath>

namespace qcorr {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream) {
  key_[0] = static_cast<std::uint32_t>(seed);
  key_[1] = static_cast<std::uint32_t>(seed >> 32);
  ctr_[0] = 0;
  ctr_[1] = 0;
  ctr_[2] = static_cast<std::uint32_t>(stream);
  ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
}

void Philox4x32::generate_block() {
  std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
  std::uint32_t k0 = key_[0], k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c0, hi0, lo0);
    mulhilo(kPhiloxM1, c2, hi1, lo1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    const std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  out_[0] = c0;
  out_[1] = c1;
  out_[2] = c2;
  out_[3] = c3;
  avail_ = 4;
  // 64-bit block counter in words 0..1
  if (++ctr_[0] == 0) ++ctr_[1];
}

std::uint32_t Philox4x32::next_u32() {
  if (avail_ == 0) generate_block();
  return out_[4 - avail_--];
}

double GaussianStream::next_uniform() {
  const std::uint64_t hi = prng_.next_u32();
  const std::uint64_t lo = prng_.next_u32();
  const std::uint64_t bits = ((hi << 32) | lo) >> 11;  // 53 bits
  return static_cast<double>(bits + 1) * 0x1.0p-53;    // (0, 1]
}

double GaussianStream::next_normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_ = radius * std::sin(angle);
  have_cached_ = true;
  return radius * std::cos(angle);
}

ComplexMatrix4 random_state_induced(GaussianStream& g, int ancilla_dim) {
  while (true) {
    Eigen::Matrix<std::complex<double>, 4, Eigen::Dynamic> ginibre(4, ancilla_dim);
    for (int j = 0; j < ancilla_dim; ++j)
      for (int i = 0; i < 4; ++i)
        ginibre(i, j) = {g.next_normal(), g.next_normal()};
    ComplexMatrix4 rho = ginibre * ginibre.adjoint();
    const double trace = rho.trace().real();
    if (trace <= 0.0) continue;  // probability zero, regenerate
    rho /= trace;
    rho = 0.5 * (rho + rho.adjoint().eval());  // exact Hermiticity
    return rho;
  }
}

ComplexMatrix4 random_state_noisy_pure(GaussianStream& g) {
  Eigen::Vector4cd psi;
  for (int i = 0; i < 4; ++i) psi(i) = {g.next_normal(), g.next_normal()};
  psi /= psi.norm();
  const double visibility = g.next_uniform();
  ComplexMatrix4 rho = visibility * (psi * psi.adjoint()) +
                       (1.0 - visibility) * 0.25 * ComplexMatrix4::Identity();
  return 0.5 * (rho + rho.adjoint().eval());
}

ComplexMatrix4 random_state(GaussianStream& g) {
  constexpr double kNoisyPureWeight = 0.65;
  if (g.next_uniform() <= kNoisyPureWeight) return random_state_noisy_pure(g);
  return random_state_induced(g, 4);
}

ComplexMatrix4 random_state(StateSeed s) {
  GaussianStream g(s);
  return random_state(g);
}

}  // namespace qcorr
