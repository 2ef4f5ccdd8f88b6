#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qcorr/qmath.hpp"
#include "qcorr/states.hpp"

using namespace qcorr;

TEST_CASE("every generated state is a valid density matrix") {
  for (std::uint64_t k = 0; k < 2000; ++k) {
    const ComplexMatrix4 rho = random_state(StateSeed{3, k});
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-14);
    CHECK(std::abs(rho.trace().imag()) < 1e-14);
    CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    const auto eigs = hermitian_eigenvalues(rho);
    CHECK(eigs[0] > -1e-12);
  }
}

TEST_CASE("same seed and stream reproduce the state bitwise") {
  for (std::uint64_t k = 0; k < 50; ++k) {
    const ComplexMatrix4 a = random_state(StateSeed{99, k});
    const ComplexMatrix4 b = random_state(StateSeed{99, k});
    CHECK((a.array() == b.array()).all());
  }
  const ComplexMatrix4 a = random_state(StateSeed{99, 1});
  const ComplexMatrix4 b = random_state(StateSeed{100, 1});
  CHECK((a - b).cwiseAbs().maxCoeff() > 0.0);  // different seed, different state
}

TEST_CASE("distinct streams from one stream object stay independent") {
  GaussianStream g1(StateSeed{5, 0});
  GaussianStream g2(StateSeed{5, 1});
  int equal = 0;
  for (int i = 0; i < 100; ++i)
    if (g1.next_normal() == g2.next_normal()) ++equal;
  CHECK(equal == 0);
}

TEST_CASE("ensemble mean approaches the maximally mixed state") {
  const int n = 100000;
  ComplexMatrix4 mean = ComplexMatrix4::Zero();
  for (std::uint64_t k = 0; k < n; ++k)
    mean += random_state(StateSeed{7, k});
  mean /= static_cast<double>(n);
  // entrywise 5 standard errors; entry variance is below 1/16
  const double bound = 5.0 * 0.25 / std::sqrt(static_cast<double>(n));
  CHECK((mean - 0.25 * ComplexMatrix4::Identity()).cwiseAbs().maxCoeff() < bound);
}

TEST_CASE("mean purity matches the ensemble average") {
  // noisy-pure component: E over v~U(0,1) of v^2 + v(1-v)/2 + (1-v)^2/4 = 1/2;
  // Hilbert-Schmidt component: 2d/(d^2+1) = 8/17
  const double expected = 0.65 * 0.5 + 0.35 * 8.0 / 17.0;  // = 0.48971...

  const int n = 100000;
  double purity = 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    const ComplexMatrix4 rho = random_state(StateSeed{8, k});
    purity += (rho * rho).trace().real();
  }
  purity /= static_cast<double>(n);
  CHECK(purity == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("fixed-ancilla Hilbert-Schmidt purity matches 2d/(d^2+1)") {
  const int n = 50000;
  double purity = 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    GaussianStream g(StateSeed{9, k});
    const ComplexMatrix4 rho = random_state_induced(g, 4);
    purity += (rho * rho).trace().real();
  }
  purity /= static_cast<double>(n);
  CHECK(purity == doctest::Approx(8.0 / 17.0).epsilon(0.01));
}

TEST_CASE("induced ancilla dimension bounds the rank") {
  for (std::uint64_t k = 0; k < 200; ++k) {
    GaussianStream g(StateSeed{10, k});
    const ComplexMatrix4 rho = random_state_induced(g, 2);
    const auto eigs = hermitian_eigenvalues(rho);
    CHECK(std::abs(eigs[0]) < 1e-12);  // rank <= 2: two zero eigenvalues
    CHECK(std::abs(eigs[1]) < 1e-12);
    CHECK(eigs[3] > 0.0);
  }
}
