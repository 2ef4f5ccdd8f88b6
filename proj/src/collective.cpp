#include "qcorr/collective.hpp"

#include <cmath>

#include "qcorr/errors.hpp"

namespace qcorr {

namespace {

constexpr double kBasisTol = 1e-14;

// Embed a two-qubit operator acting on qubits (b, b') = positions 1 and 3
// of the a,b,a',b' ordering.
ComplexMatrix16 embed_bb(const ComplexMatrix4& op) {
  ComplexMatrix16 out = ComplexMatrix16::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp)
          for (int d = 0; d < 2; ++d)
            for (int dp = 0; dp < 2; ++dp)
              out(8 * a + 4 * b + 2 * ap + bp, 8 * a + 4 * d + 2 * ap + dp) =
                  op(2 * b + bp, 2 * d + dp);
  return out;
}

// Embed a two-qubit operator acting on qubits (a, a') = positions 0 and 2.
ComplexMatrix16 embed_aa(const ComplexMatrix4& op) {
  ComplexMatrix16 out = ComplexMatrix16::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp)
          for (int c = 0; c < 2; ++c)
            for (int cp = 0; cp < 2; ++cp)
              out(8 * a + 4 * b + 2 * ap + bp, 8 * c + 4 * b + 2 * cp + bp) =
                  op(2 * a + ap, 2 * c + cp);
  return out;
}

ComplexMatrix16 kron_16(const ComplexMatrix4& a, const ComplexMatrix4& b) {
  ComplexMatrix16 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
  return out;
}

inline double trace_product_real(const ComplexMatrix16& a, const ComplexMatrix16& b) {
  return a.cwiseProduct(b.transpose()).sum().real();
}

}  // namespace

const MinimalBasis& MinimalBasis::instance() {
  static const MinimalBasis basis = [] {
    MinimalBasis b;
    const double s = 1.0 / std::sqrt(3.0);
    b.transform << 1, s, s, s,
                   1, s, -s, -s,
                   1, -s, s, -s,
                   1, -s, -s, s;
    b.transform *= 0.25;

    // closed form: row 0 all ones, row k = sqrt(3) * sign pattern of column k
    const double r = std::sqrt(3.0);
    b.inverse_transform << 1, 1, 1, 1,
                           r, r, -r, -r,
                           r, -r, r, -r,
                           r, -r, -r, r;

    const auto& sigma = pauli();
    for (int i = 0; i < 4; ++i) {
      ComplexMatrix2 pi = ComplexMatrix2::Zero();
      for (int j = 0; j < 4; ++j) pi += b.transform(i, j) * sigma[j];
      b.projectors[i] = pi;
    }

    if ((b.inverse_transform * b.transform - Eigen::Matrix4d::Identity())
            .cwiseAbs()
            .maxCoeff() > kBasisTol)
      throw NumericsError("MinimalBasis: inverse transform check failed");
    ComplexMatrix2 sum = ComplexMatrix2::Zero();
    for (const auto& pi : b.projectors) sum += pi;
    if ((sum - ComplexMatrix2::Identity()).cwiseAbs().maxCoeff() > kBasisTol)
      throw NumericsError("MinimalBasis: projectors do not sum to identity");
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double want = (i == j) ? 1.0 / 4.0 : 1.0 / 12.0;
        const double got = (b.projectors[i] * b.projectors[j]).trace().real();
        if (std::abs(got - want) > kBasisTol)
          throw NumericsError("MinimalBasis: projector overlap check failed");
      }
    return b;
  }();
  return basis;
}

ComplexMatrix4 singlet_witness_operator() {
  Eigen::Vector4cd singlet;
  singlet << 0, 1, -1, 0;
  singlet /= std::sqrt(2.0);
  return ComplexMatrix4::Identity() - 4.0 * (singlet * singlet.adjoint());
}

CollectiveEngine::CollectiveEngine() {
  const ComplexMatrix16 witness = embed_bb(singlet_witness_operator());
  const auto& sigma = pauli();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      pauli_ops_[3 * i + j] = witness * embed_aa(kron2(sigma[i + 1], sigma[j + 1]));

  const auto& basis = MinimalBasis::instance();
  for (int k = 0; k < kFeatureCount; ++k) {
    const auto [i, j] = kFeaturePairs[k];
    feature_ops_[k] =
        witness * embed_aa(kron2(basis.projectors[i], basis.projectors[j]));
  }
}

const CollectiveEngine& CollectiveEngine::instance() {
  static const CollectiveEngine engine;
  return engine;
}

RealSym3 CollectiveEngine::collective_r(const ComplexMatrix4& rho) const {
  const ComplexMatrix16 two_copies = kron_16(rho, rho);
  RealSym3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = trace_product_real(two_copies, pauli_ops_[3 * i + j]);
  return 0.5 * (r + r.transpose().eval());
}

FeatureVector CollectiveEngine::features(const ComplexMatrix4& rho) const {
  const ComplexMatrix16 two_copies = kron_16(rho, rho);
  FeatureVector f;
  for (int k = 0; k < kFeatureCount; ++k) {
    f.values[k] = trace_product_real(two_copies, feature_ops_[k]);
    f.mask[k] = true;
  }
  return f;
}

RealSym3 reconstruct_r(const FeatureVector& f) {
  if (!f.full()) throw PreconditionError("reconstruct_r: feature mask is incomplete");
  Eigen::Matrix4d p;
  for (int k = 0; k < kFeatureCount; ++k) {
    const auto [i, j] = kFeaturePairs[k];
    p(i, j) = f.values[k];
    p(j, i) = f.values[k];
  }
  const Eigen::Matrix4d& minv = MinimalBasis::instance().inverse_transform;
  const Eigen::Matrix4d g = minv * p * minv.transpose();
  RealSym3 r = g.block<3, 3>(1, 1);
  return 0.5 * (r + r.transpose().eval());
}

const ReductionPlan& reduction_plan() {
  // indices into the canonical order p11,p22,p33,p44,p12,p13,p14,p23,p24,p34
  static const ReductionPlan plan = [] {
    ReductionPlan p;
    p.retained[9] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    p.retained[8] = {0, 1, 2, 3, 4, 6, 7, 8, 9};  // drop p13
    p.retained[7] = {0, 1, 2, 3, 4, 6, 7, 9};     // drop p24
    p.retained[6] = {0, 1, 2, 3, 4, 6, 7};        // drop p34
    p.retained[5] = {0, 1, 2, 3, 6, 7};           // drop p12
    p.retained[4] = {0, 1, 2, 3, 6};              // drop p23
    p.retained[3] = {0, 2, 3, 6};                 // p11, p33, p44, p14
    p.retained[2] = {0, 3, 6};                    // p11, p44, p14
    p.retained[1] = {6, 7};                       // p14, p23
    p.retained[0] = {1};                          // p22
    return p;
  }();
  return plan;
}

const std::vector<int>& ReductionPlan::retained_set(int n) const {
  if (n < 1 || n > kFeatureCount)
    throw PreconditionError("ReductionPlan: feature count must be in [1, 10]");
  return retained[n - 1];
}

}  // namespace qcorr
