#pragma once

#include <array>
#include <cstdint>

#include "qcorr/qmath.hpp"

namespace qcorr {

// Mutually exclusive correlation classes, ordered by increasing strength.
// A state is labelled with the strongest class it reaches.
enum class ClassLabel : std::uint8_t { Sep = 0, Ent = 1, Fef = 2, Steer = 3, Bell = 4 };

inline constexpr int kClassCount = 5;
inline constexpr std::array<const char*, kClassCount> kClassNames{"sep", "ent", "FEF",
                                                                  "steer", "Bell"};

// Tolerance below which a clipped quantity counts as zero for labelling.
inline constexpr double kClassifyEps = 1e-10;

struct QuantRecord {
  double negativity = 0.0;   // N
  double fef_witness = 0.0;  // FEF_w
  double steering = 0.0;     // S3
  double bell = 0.0;         // B
  ClassLabel label = ClassLabel::Sep;
};

// Pauli correlation tensor T_ij = Tr[rho (sigma_i x sigma_j)], i,j in 1..3.
Eigen::Matrix3d t_matrix(const ComplexMatrix4& rho);

struct RQuantities {
  double fef_witness;
  double steering;
  double bell;
};

// FEF_w, S3 and B from any symmetric PSD 3x3 with the spectrum of R = T^T T.
// Shared by the analytical path and the collective-measurement reconstruction.
RQuantities quantities_from_r(const RealSym3& r);

// All four analytical quantities of a state; label left at its default.
QuantRecord quantities(const ComplexMatrix4& rho);

ClassLabel classify(const QuantRecord& q, double eps = kClassifyEps);

// quantities() followed by classify().
QuantRecord analyze(const ComplexMatrix4& rho);

}  // namespace qcorr
