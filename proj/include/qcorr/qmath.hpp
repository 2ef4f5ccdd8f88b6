#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

namespace qcorr {

using ComplexMatrix2 = Eigen::Matrix2cd;
using ComplexMatrix4 = Eigen::Matrix4cd;
using RealSym3 = Eigen::Matrix3d;

inline constexpr double kHermitianTol = 1e-12;  // max-norm tolerance on A - A^dagger
inline constexpr double kPsdClampFloor = -1e-10;  // eigenvalues above this are treated as 0
inline constexpr double kPsdErrorFloor = -1e-6;   // below this the matrix is considered corrupted

// Pauli basis with sigma[0] = identity.
const std::array<ComplexMatrix2, 4>& pauli();

ComplexMatrix4 kron2(const ComplexMatrix2& a, const ComplexMatrix2& b);

bool is_hermitian(const ComplexMatrix4& m, double tol = kHermitianTol);

// Cyclic Jacobi on a real symmetric matrix. Returns eigenvalues in ascending
// order. Converges when the off-diagonal Frobenius norm drops below
// tol * max(1, ||A||_F); hard stop after max_sweeps sweeps.
template <int N>
std::array<double, N> jacobi_eigenvalues(Eigen::Matrix<double, N, N> a,
                                         int max_sweeps = 100,
                                         double tol = 1e-12);

// All four eigenvalues of a Hermitian 4x4, ascending. Computed by running
// Jacobi on the 8x8 real symmetric embedding [[Re, -Im], [Im, Re]], whose
// spectrum is that of m with every eigenvalue doubled.
std::array<double, 4> hermitian_eigenvalues(const ComplexMatrix4& m);

// Transposes the second-qubit index pair: (2i+j, 2k+l) -> (2i+l, 2k+j).
ComplexMatrix4 partial_transpose(const ComplexMatrix4& rho);

struct Sym3Spectrum {
  std::array<double, 3> eigenvalues;  // ascending
  double trace_sqrt;                  // sum of sqrt(max(0, eigenvalue))
};

// Spectrum of a 3x3 real symmetric PSD matrix. Eigenvalues in
// [kPsdErrorFloor, kPsdClampFloor) raise NumericsError; values in
// [kPsdClampFloor, 0) are clamped to 0 for the square root.
Sym3Spectrum sym3_spectrum(const RealSym3& r);

}  // namespace qcorr
