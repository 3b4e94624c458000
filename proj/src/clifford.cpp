#include "defectlab/clifford.hpp"

namespace defectlab {

CliffordSet make_clifford() {
  const cplx i{0.0, 1.0};
  CliffordSet c;
  c.sigma[0] << 0, 1, 1, 0;
  c.sigma[1] << 0, -i, i, 0;
  c.sigma[2] << 1, 0, 0, -1;
  c.sigma[3] << i, 0, 0, i;

  for (int k = 0; k < 4; ++k) {
    Mat4 g = Mat4::Zero();
    g.block<2, 2>(0, 2) = c.sigma[k].adjoint();
    g.block<2, 2>(2, 0) = c.sigma[k];
    c.gamma[k] = g;
  }

  c.chiral = Mat4::Zero();
  c.chiral.diagonal() << 1, 1, -1, -1;
  return c;
}

const CliffordSet& clifford() {
  static const CliffordSet instance = make_clifford();
  return instance;
}

}  // namespace defectlab
