#include "qcorr/correlations.hpp"

#include <cmath>

namespace qcorr {

namespace {

// Cached sigma_i (x) sigma_j for i,j in 1..3, row-major over (i,j).
const std::array<ComplexMatrix4, 9>& pauli_pairs() {
  static const std::array<ComplexMatrix4, 9> ops = [] {
    std::array<ComplexMatrix4, 9> out;
    const auto& sigma = pauli();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[3 * i + j] = kron2(sigma[i + 1], sigma[j + 1]);
    return out;
  }();
  return ops;
}

inline double trace_product_real(const ComplexMatrix4& a, const ComplexMatrix4& b) {
  // Tr[a b] = sum_ij a_ij b_ji
  return a.cwiseProduct(b.transpose()).sum().real();
}

}  // namespace

Eigen::Matrix3d t_matrix(const ComplexMatrix4& rho) {
  Eigen::Matrix3d t;
  const auto& ops = pauli_pairs();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = trace_product_real(rho, ops[3 * i + j]);
  return t;
}

RQuantities quantities_from_r(const RealSym3& r) {
  const Sym3Spectrum spec = sym3_spectrum(r);
  const double trace = spec.eigenvalues[0] + spec.eigenvalues[1] + spec.eigenvalues[2];
  RQuantities q;
  q.fef_witness = 0.5 * std::max(0.0, spec.trace_sqrt - 1.0);
  q.steering = std::sqrt(0.5 * std::max(0.0, trace - 1.0));
  q.bell = std::sqrt(std::max(0.0, trace - spec.eigenvalues[0] - 1.0));
  return q;
}

QuantRecord quantities(const ComplexMatrix4& rho) {
  QuantRecord rec;

  const auto lambdas = hermitian_eigenvalues(partial_transpose(rho));
  double neg = 0.0;
  for (double lambda : lambdas) neg += std::abs(lambda) - lambda;
  rec.negativity = neg;

  const Eigen::Matrix3d t = t_matrix(rho);
  const RealSym3 r = t.transpose() * t;
  const RQuantities rq = quantities_from_r(r);
  rec.fef_witness = rq.fef_witness;
  rec.steering = rq.steering;
  rec.bell = rq.bell;
  return rec;
}

ClassLabel classify(const QuantRecord& q, double eps) {
  if (q.bell > eps) return ClassLabel::Bell;
  if (q.steering > eps) return ClassLabel::Steer;
  if (q.fef_witness > eps) return ClassLabel::Fef;
  if (q.negativity > eps) return ClassLabel::Ent;
  return ClassLabel::Sep;
}

QuantRecord analyze(const ComplexMatrix4& rho) {
  QuantRecord rec = quantities(rho);
  rec.label = classify(rec);
  return rec;
}

}  // namespace qcorr
