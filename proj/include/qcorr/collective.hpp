#pragma once

#include <array>
#include <utility>
#include <vector>

#include "qcorr/qmath.hpp"

namespace qcorr {

using ComplexMatrix16 = Eigen::Matrix<std::complex<double>, 16, 16>;

inline constexpr int kFeatureCount = 10;

// Canonical feature order: diagonals first, then the upper triangle row by row.
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames{
    "p11", "p22", "p33", "p44", "p12", "p13", "p14", "p23", "p24", "p34"};

// (projector row, projector column) per canonical feature, 0-based.
inline constexpr std::array<std::pair<int, int>, kFeatureCount> kFeaturePairs{
    {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// The four tetrahedron projectors Pi_i = sum_j M_ij sigma_j (sigma_0 = 1) and
// the transform M with its closed-form inverse. Invariants (sum Pi = 1,
// Tr Pi_i = 1/2, pairwise overlaps, M^-1 M = 1) are verified on construction.
struct MinimalBasis {
  std::array<ComplexMatrix2, 4> projectors;
  Eigen::Matrix4d transform;
  Eigen::Matrix4d inverse_transform;

  static const MinimalBasis& instance();
};

// S = 1 - 4 |Psi-><Psi-| on the (b, b') pair; spectrum {1, 1, 1, -3}.
ComplexMatrix4 singlet_witness_operator();

// The 10 unique collective-measurement outcomes with a presence mask.
struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  std::array<bool, kFeatureCount> mask{};

  bool full() const {
    for (bool m : mask)
      if (!m) return false;
    return true;
  }
  // masked-out entries serialize as exact zeros
  std::array<double, kFeatureCount> masked_values() const {
    std::array<double, kFeatureCount> out{};
    for (int i = 0; i < kFeatureCount; ++i) out[i] = mask[i] ? values[i] : 0.0;
    return out;
  }
};

// Evaluates the swap-geometry expectation values on two copies of a state.
// The 16-dimensional space is ordered a (x) b (x) a' (x) b'; the witness acts
// on (b, b') and the local projectors on (a, a'). All 16x16 operators are
// materialized once and cached, so a feature costs one Hermitian form.
class CollectiveEngine {
 public:
  static const CollectiveEngine& instance();

  // R_ij = Tr[(rho (x) rho) S_bb' (sigma_i (x) sigma_j)_aa']. Its spectrum
  // equals that of T^T T; the entrywise convention is T T^T.
  RealSym3 collective_r(const ComplexMatrix4& rho) const;

  // p_ij = Tr[(rho (x) rho) S_bb' (Pi_i (x) Pi_j)_aa'], full mask.
  FeatureVector features(const ComplexMatrix4& rho) const;

 private:
  CollectiveEngine();
  std::array<ComplexMatrix16, kFeatureCount> feature_ops_;
  std::array<ComplexMatrix16, 9> pauli_ops_;
};

inline RealSym3 collective_r(const ComplexMatrix4& rho) {
  return CollectiveEngine::instance().collective_r(rho);
}
inline FeatureVector features(const ComplexMatrix4& rho) {
  return CollectiveEngine::instance().features(rho);
}

// Inverts the minimal-basis transform: from the 10 measured p_ij back to a
// 3x3 matrix carrying the spectrum of R. Requires a full mask.
RealSym3 reconstruct_r(const FeatureVector& f);

// Retained canonical feature indices for every vector length n = 1..10.
// The chain is nested for n in [5, 10]; the sets for n <= 4 follow the
// collectibility-motivated strategy and are not part of that chain.
struct ReductionPlan {
  std::array<std::vector<int>, kFeatureCount> retained;

  const std::vector<int>& retained_set(int n) const;
};

const ReductionPlan& reduction_plan();

}  // namespace qcorr
