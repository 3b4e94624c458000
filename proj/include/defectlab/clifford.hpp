#pragma once

#include <array>

#include "defectlab/types.hpp"

namespace defectlab {

/// Fixed 4x4 representation of the four Clifford generators used by every
/// Hamiltonian in the library, Gamma_i = [[0, sigma_i^dag], [sigma_i, 0]]
/// with sigma_4 = i*I2, together with the chiral grading J = diag(1,1,-1,-1).
struct CliffordSet {
  std::array<Mat2, 4> sigma;
  std::array<Mat4, 4> gamma;
  Mat4 chiral;

  /// v . (Gamma_1, Gamma_2, Gamma_3) for a real 3-vector.
  Mat4 dot(const Vec3& v) const {
    return v.x() * gamma[0] + v.y() * gamma[1] + v.z() * gamma[2];
  }
};

CliffordSet make_clifford();

/// Process-wide immutable instance.
const CliffordSet& clifford();

}  // namespace defectlab
