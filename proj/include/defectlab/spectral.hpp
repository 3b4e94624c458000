#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "defectlab/assembly.hpp"
#include "defectlab/pattern.hpp"
#include "defectlab/types.hpp"

namespace defectlab {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

enum class LdosMethod { dense_eig, shifted_solve };

LdosMethod parse_ldos_method(const std::string& name);
std::string to_string(LdosMethod method);

struct LdosRequest {
  std::vector<double> energies{0.0};
  double epsilon = 0.06;
  /// Explicit site ids; empty selects every site.
  std::vector<std::size_t> sites;
  LdosMethod method = LdosMethod::dense_eig;
  /// Largest operator dimension accepted by the dense path.
  Eigen::Index dense_cap = 12000;

  void validate() const;
};

/// Parameters carried along with every LDOS result.
struct RunInfo {
  double mass = 0.0;
  double alpha = 1.0;
  double r_max = 0.0;
  double core_cut = 0.0;
  double epsilon = 0.06;
  std::string method = "dense-eig";
};

/// values(e, s) = LDOS(energies[e], site_ids[s]), summed over the four
/// orbitals of the site.
struct LdosGrid {
  std::vector<double> energies;
  std::vector<std::size_t> site_ids;
  std::vector<double> radius;
  std::vector<double> x1;
  std::vector<double> x2;
  Eigen::MatrixXd values;
  RunInfo info;

  /// max |LDOS(E) - LDOS(-E)| over energies present with their mirror.
  double energy_asymmetry() const;
  double min_value() const { return values.size() ? values.minCoeff() : 0.0; }
};

/// Full spectrum with per-site weights sum_o |psi_n(x, o)|^2 and the
/// chirality <psi_n|J|psi_n>. Exact zero modes of a chiral operator are
/// returned chirality-resolved.
struct DenseSpectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd weights;      // sites x dim
  Eigen::VectorXd chirality;    // dim
};

/// Dense diagonalization. Chiral operators go through the SVD of their
/// off-diagonal block; others through a full Hermitian eigensolver.
DenseSpectrum dense_spectrum(const SparseHermitian& H, double zero_tol = 1e-9,
                             Eigen::Index dense_cap = 12000);

/// Orbital-traced LDOS(E, x) = Im <x|(H - E - i eps)^{-1}|x> >= 0.
/// `geometry`, when given, fills the site metadata.
LdosGrid ldos(const SparseHermitian& H, const LdosRequest& req, const Pattern* geometry = nullptr);

/// Same quantity from a precomputed spectrum.
LdosGrid ldos_from_spectrum(const DenseSpectrum& spec, const LdosRequest& req,
                            const Pattern* geometry = nullptr);

struct RadialProfile {
  double bin_width = 1.0;
  std::vector<double> energies;
  /// mean(e, k) over sites with radius in [k*w, (k+1)*w); nullopt for
  /// empty bins.
  std::vector<std::vector<std::optional<double>>> mean;
  std::vector<std::size_t> count;

  std::size_t bins() const { return count.size(); }
};

/// Bin count is ceil(r_max / bin_width), r_max taken from the run info
/// (or the largest radius when that is unset).
RadialProfile radial_profile(const LdosGrid& grid, double bin_width = 1.0);

struct NearZeroModes {
  std::vector<double> eigenvalues;
  std::vector<Eigen::VectorXd> site_weights;
  std::vector<double> chirality;
  /// Gaps between returned eigenvalues below 1e-10 were found.
  bool degenerate = false;
  int iterations = 0;
};

enum class EigsMethod { dense, shift_invert };

/// The `count` eigenvalues of smallest magnitude with site-weight profiles.
/// The shift-invert path runs block subspace iteration on (H - i eta)^{-1}.
NearZeroModes eigs_near_zero(const SparseHermitian& H, std::size_t count,
                             EigsMethod method = EigsMethod::dense, double eta = 1e-3,
                             double tol = 1e-9, int max_iter = 2000);

struct ChiralIndex {
  double value = 0.0;
  std::size_t states = 0;
  /// Some eigenvalue lies within 1e-8 of +-delta.
  bool ill_conditioned = false;
};

/// Tr((J x 1) P_[-delta, delta](H)), a finite-volume diagnostic for the
/// chiral index. Not a certified invariant when zero-energy spectrum is not
/// isolated.
ChiralIndex chiral_index(const SparseHermitian& H, double delta);
ChiralIndex chiral_index(const DenseSpectrum& spec, double delta);

/// Sum of LDOS(energy) over sites with radius < r.
double integrated_ldos(const LdosGrid& grid, std::size_t energy_index, double r);

void write_ldos_csv(const LdosGrid& grid, const std::string& path);
void write_radial_csv(const RadialProfile& profile, const std::string& path);

}  // namespace defectlab
