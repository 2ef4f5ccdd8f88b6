#include "qcorr/qmath.hpp"

#include <algorithm>
#include <cmath>

#include "qcorr/errors.hpp"

namespace qcorr {

const std::array<ComplexMatrix2, 4>& pauli() {
  using namespace std::complex_literals;
  static const std::array<ComplexMatrix2, 4> sigma = [] {
    std::array<ComplexMatrix2, 4> s;
    s[0] << 1, 0, 0, 1;
    s[1] << 0, 1, 1, 0;
    s[2] << 0, -1i, 1i, 0;
    s[3] << 1, 0, 0, -1;
    return s;
  }();
  return sigma;
}

ComplexMatrix4 kron2(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  ComplexMatrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

bool is_hermitian(const ComplexMatrix4& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

template <int N>
std::array<double, N> jacobi_eigenvalues(Eigen::Matrix<double, N, N> a,
                                         int max_sweeps, double tol) {
  const double scale = std::max(1.0, a.norm());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < N; ++p)
      for (int q = p + 1; q < N; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= tol * scale) break;

    for (int p = 0; p < N; ++p) {
      for (int q = p + 1; q < N; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(theta * theta + 1.0))
                             : 1.0 / (theta - std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < N; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < N; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, N> eigs;
  for (int i = 0; i < N; ++i) eigs[i] = a(i, i);
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

template std::array<double, 3> jacobi_eigenvalues<3>(Eigen::Matrix3d, int, double);
template std::array<double, 8> jacobi_eigenvalues<8>(Eigen::Matrix<double, 8, 8>, int, double);

std::array<double, 4> hermitian_eigenvalues(const ComplexMatrix4& m) {
  if (!is_hermitian(m))
    throw PreconditionError("hermitian_eigenvalues: input is not Hermitian");
  const Eigen::Matrix4d re = m.real();
  const Eigen::Matrix4d im = m.imag();
  Eigen::Matrix<double, 8, 8> embed;
  embed.block<4, 4>(0, 0) = re;
  embed.block<4, 4>(0, 4) = -im;
  embed.block<4, 4>(4, 0) = im;
  embed.block<4, 4>(4, 4) = re;

  const auto eigs8 = jacobi_eigenvalues<8>(embed);
  // every eigenvalue appears twice; pairs are adjacent after sorting
  return {eigs8[0], eigs8[2], eigs8[4], eigs8[6]};
}

ComplexMatrix4 partial_transpose(const ComplexMatrix4& rho) {
  ComplexMatrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          out(2 * i + j, 2 * k + l) = rho(2 * i + l, 2 * k + j);
  return out;
}

Sym3Spectrum sym3_spectrum(const RealSym3& r) {
  const auto eigs = jacobi_eigenvalues<3>(r);
  if (eigs[0] < kPsdErrorFloor)
    throw NumericsError("sym3_spectrum: eigenvalue " + std::to_string(eigs[0]) +
                        " below PSD tolerance, matrix is corrupted");
  Sym3Spectrum out;
  out.eigenvalues = eigs;
  out.trace_sqrt = 0.0;
  for (double e : eigs) out.trace_sqrt += std::sqrt(std::max(0.0, e));
  return out;
}

}  // namespace qcorr
