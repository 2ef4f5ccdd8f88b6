#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/qmath.hpp"
#include "qcorr/states.hpp"

using namespace qcorr;

namespace {

ComplexMatrix4 random_hermitian(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  ComplexMatrix4 g;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g(i, j) = {dist(rng), dist(rng)};
  return 0.5 * (g + g.adjoint().eval());
}

}  // namespace

TEST_CASE("hermitian_eigenvalues on a diagonal matrix") {
  ComplexMatrix4 m = ComplexMatrix4::Zero();
  m(0, 0) = 0.1;
  m(1, 1) = 0.2;
  m(2, 2) = 0.3;
  m(3, 3) = 0.4;
  const auto eigs = hermitian_eigenvalues(m);
  CHECK(eigs[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(eigs[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(eigs[2] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(eigs[3] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("partially transposed singlet has spectrum -1/2, 1/2, 1/2, 1/2") {
  const auto eigs = hermitian_eigenvalues(partial_transpose(oracles::singlet_state()));
  CHECK(eigs[0] == doctest::Approx(-0.5).epsilon(1e-12));
  for (int i = 1; i < 4; ++i) CHECK(eigs[i] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("eigenvalues match the characteristic-polynomial oracle") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 50; ++k) {
    const ComplexMatrix4 m = random_hermitian(rng);
    const auto jacobi = hermitian_eigenvalues(m);
    const auto roots = oracles::hermitian_eigenvalues_charpoly(m);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(jacobi[i] - roots[i]) < 1e-8);
  }
}

TEST_CASE("eigenvalue sums reproduce traces") {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 100; ++k) {
    const ComplexMatrix4 m = random_hermitian(rng);
    const auto eigs = hermitian_eigenvalues(m);
    double sum = 0.0, sum_sq = 0.0;
    for (double e : eigs) {
      sum += e;
      sum_sq += e * e;
    }
    CHECK(std::abs(sum - m.trace().real()) < 1e-10);
    CHECK(std::abs(sum_sq - (m * m).trace().real()) < 1e-10);
  }
}

TEST_CASE("non-Hermitian input is rejected") {
  ComplexMatrix4 m = ComplexMatrix4::Zero();
  m(0, 1) = 1.0;  // no conjugate partner
  CHECK_THROWS_AS(hermitian_eigenvalues(m), PreconditionError);
}

TEST_CASE("partial transpose fixes diagonal product states") {
  const ComplexMatrix4 quarter_identity = 0.25 * ComplexMatrix4::Identity();
  CHECK((partial_transpose(quarter_identity) - quarter_identity).cwiseAbs().maxCoeff() ==
        0.0);

  ComplexMatrix4 ket01 = ComplexMatrix4::Zero();  // |01><01|
  ket01(1, 1) = 1.0;
  CHECK((partial_transpose(ket01) - ket01).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("partial transpose is a bitwise involution") {
  std::mt19937_64 rng(43);
  for (int k = 0; k < 20; ++k) {
    const ComplexMatrix4 m = random_hermitian(rng);
    CHECK((partial_transpose(partial_transpose(m)).array() == m.array()).all());
  }
}

TEST_CASE("partial transpose swaps the second-qubit indices") {
  std::mt19937_64 rng(44);
  const ComplexMatrix4 m = random_hermitian(rng);
  const ComplexMatrix4 pt = partial_transpose(m);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          CHECK(pt(2 * i + j, 2 * k + l) == m(2 * i + l, 2 * k + j));
}

TEST_CASE("sym3_spectrum closed forms") {
  const auto identity = sym3_spectrum(RealSym3::Identity());
  CHECK(identity.trace_sqrt == doctest::Approx(3.0).epsilon(1e-14));
  for (double e : identity.eigenvalues) CHECK(e == doctest::Approx(1.0).epsilon(1e-14));

  // R of a Werner state at p = 1/2 is p^2 * identity
  const auto werner = sym3_spectrum(RealSym3(0.25 * RealSym3::Identity()));
  CHECK(werner.trace_sqrt == doctest::Approx(1.5).epsilon(1e-14));

  const auto zero = sym3_spectrum(RealSym3::Zero());
  CHECK(zero.trace_sqrt == 0.0);
  for (double e : zero.eigenvalues) CHECK(e == 0.0);
}

TEST_CASE("sym3_spectrum matches the closed-form eigensolver") {
  std::mt19937_64 rng(45);
  std::normal_distribution<double> dist;
  for (int k = 0; k < 200; ++k) {
    Eigen::Matrix3d t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t(i, j) = dist(rng);
    const RealSym3 r = t.transpose() * t;  // PSD like every correlation matrix
    const auto spec = sym3_spectrum(r);
    const auto closed = oracles::sym3_eigenvalues_closed_form(r);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(spec.eigenvalues[i] - closed[i]) < 1e-12 * std::max(1.0, r.norm()));
  }
}

TEST_CASE("sym3_spectrum rejects clearly negative spectra") {
  RealSym3 r = RealSym3::Identity();
  r(0, 0) = -1e-3;
  CHECK_THROWS_AS(sym3_spectrum(r), NumericsError);
}

TEST_CASE("trace_sqrt obeys the Cauchy-Schwarz bound") {
  std::mt19937_64 rng(46);
  std::normal_distribution<double> dist;
  for (int k = 0; k < 100; ++k) {
    Eigen::Matrix3d t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t(i, j) = dist(rng);
    const RealSym3 r = t.transpose() * t;
    const auto spec = sym3_spectrum(r);
    CHECK(spec.trace_sqrt * spec.trace_sqrt >= r.trace() - 1e-12);
    CHECK(spec.trace_sqrt <= std::sqrt(3.0 * r.trace()) + 1e-12);
  }
}
