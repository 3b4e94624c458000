#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "defectlab/pattern.hpp"
#include "defectlab/types.hpp"

namespace defectlab {

using SparseC = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

/// Block-compressed-row Hermitian operator on C^4 (x) l^2(sites). Row x holds
/// the blocks <x|H|y> for y in ascending id order; the diagonal block is
/// always present.
class SparseHermitian {
 public:
  SparseHermitian() = default;

  std::size_t sites() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(orbitals * sites()); }
  std::size_t block_count() const { return blocks_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& cols() const { return cols_; }
  const std::vector<Mat4>& blocks() const { return blocks_; }

  /// Block <row|H|col>, zero when absent.
  Mat4 block(std::size_t row, std::size_t col) const;

  VecX apply(const VecX& v) const;
  MatX to_dense() const;
  SparseC to_sparse() const;

  /// Off-diagonal block Q of H = [[0, Q^dag], [Q, 0]] in the grading
  /// J (x) 1. Rows index the (site, orbital 2/3) pairs, columns the
  /// (site, orbital 0/1) pairs, both as 2*site + k.
  MatX chiral_block() const;

  /// max |H - H^dag| over all entries.
  double hermiticity_defect() const;
  /// max |(J x 1) H (J x 1) + H| over all entries.
  double chiral_defect() const;
  /// max_x sum_y ||H_xy||_2, an upper bound on the operator norm.
  double block_row_bound() const;

  void write_triplets(const std::string& path) const;

  class Builder;

 private:
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> cols_;
  std::vector<Mat4> blocks_;
};

/// Accumulates rows in ascending order.
class SparseHermitian::Builder {
 public:
  explicit Builder(std::size_t sites);
  /// Starts the next row; rows must be added in order 0, 1, 2, ...
  void add_row(const Mat4& diagonal, std::vector<std::pair<std::size_t, Mat4>> off_diagonal);
  SparseHermitian finish();

 private:
  SparseHermitian op_;
  std::size_t next_ = 0;
};

/// Hopping and on-site blocks of one block row of the defect Hamiltonian.
struct SiteBlocks {
  Mat4 onsite = Mat4::Zero();
  std::vector<std::pair<std::size_t, Mat4>> hops;  // (y, <x|H|y>)
};

/// Coefficient of G_4 in the bare on-site term as a function of the bulk
/// mass M of the asymptotic model.
double bare_onsite_mass(double mass);

SiteBlocks defect_site_blocks(const Pattern& pattern, std::size_t x, double mass);

/// Real-space defect Hamiltonian on the pattern: bare on-site G_4 term,
/// directed-bond hopping (1/2)[i e_yx . G + G_4] and the plaquette on-site
/// term built from e_zyx = (z - x) x (y - x). For alpha = 1 the plaquette
/// term is omitted (flat lattice).
SparseHermitian assemble_defect(const Pattern& pattern, double mass);

/// Distance in max-norm between the local blocks at the site nearest to the
/// polar point (r0, theta0) and the coefficients of the asymptotic bulk
/// model at that site's angle. Throws if the neighborhood is not a square
/// patch or if r0 + 5 >= r_max.
double asymptotic_residual(const Pattern& pattern, double mass, double r0, double theta0);

}  // namespace defectlab
