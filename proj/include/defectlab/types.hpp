#pragma once

#include <complex>

#include <Eigen/Dense>

namespace defectlab {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix<cplx, 2, 2>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec3 = Eigen::Vector3d;
using MatX = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using VecX = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr int orbitals = 4;

// Largest absolute entry.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace defectlab
