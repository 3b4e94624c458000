#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "defectlab/pattern.hpp"
#include "defectlab/types.hpp"

namespace defectlab {

enum class BlochVariant {
  torus3d,     // full 3D lattice model
  cylinder,    // third direction traded for the angle beta
  asymptotic,  // model seen far from the tip along theta0
};

/// Momentum-space chiral model. Shifts S_i|n> = |n - e_i> are represented by
/// e^{i k_i}, so the 3D model reads
///   h(k) = sum_i sin(k_i) G_i + (M + sum_i cos(k_i)) G_4.
struct BlochModel {
  BlochVariant variant = BlochVariant::torus3d;
  double mass = 0.0;
  double beta = 0.0;    // cylinder only
  double theta0 = 0.0;  // asymptotic only
  double alpha = 0.75;  // asymptotic only

  static BlochModel torus(double mass) { return {BlochVariant::torus3d, mass}; }
  static BlochModel cylinder(double mass, double beta) {
    return {BlochVariant::cylinder, mass, beta};
  }
  static BlochModel asymptotic(double mass, double theta0, double alpha) {
    return {BlochVariant::asymptotic, mass, 0.0, theta0, alpha};
  }

  /// 3 for torus3d, 2 otherwise.
  int dimension() const { return variant == BlochVariant::torus3d ? 3 : 2; }
};

using Momentum = std::array<double, 3>;

Mat4 bloch_h(const BlochModel& model, const Momentum& k);

/// Smallest |eigenvalue| of h(k) over the grid k_i = 2*pi*j/grid_n. This is
/// the half-gap at E = 0.
double gap_scan(const BlochModel& model, int grid_n);

class GapClosingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unitary part of the off-diagonal block q(k) of h(k) in the chiral grading.
/// Throws GapClosingError when q is (numerically) singular.
Mat2 flat_band_unitary(const BlochModel& model, const Momentum& k);

struct WindingResult {
  int grid_n = 0;
  double raw = 0.0;
  long rounded = 0;
};

/// Odd Chern character (1/24 pi^2) int tr[(u^dag du)^3] of the flat-band
/// unitary over the 3D Brillouin torus, central differences on a periodic
/// grid. Oriented so that M = 2 gives +1. Refuses when the grid gap is
/// below gap_threshold. Only the torus3d variant is accepted.
WindingResult winding3d(const BlochModel& model, int grid_n, double gap_threshold = 1e-3);

/// Same integrand, with the grid sampled at -k. Used to check that the
/// discretization flips sign with orientation.
WindingResult winding3d_reflected(const BlochModel& model, int grid_n);

struct ChainMode {
  double energy = 0.0;
  int chirality = 0;         // +1 / -1 grading eigenvalue
  double left_weight = 0.0;  // fraction of |psi|^2 on the first half
  VecX vector;
};

/// Shift-operator chain H = [[0, S^dag], [S, 0]]: bulk Bloch spectrum on a
/// k-grid and the spectrum of the open truncation of length chain_len.
struct SshSpectra {
  std::vector<double> bulk;
  std::vector<double> chain;
  std::vector<ChainMode> zero_modes;
};

SshSpectra ssh_spectra(int chain_len, int k_points = 64, double zero_tol = 1e-10);

/// Dense matrix of the open chain; orbital a of cell n has index a*N + n
/// (upper block: grading +1).
MatX ssh_chain_matrix(int chain_len);

}  // namespace defectlab
