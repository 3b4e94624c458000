#include "defectlab/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "defectlab/clifford.hpp"

namespace defectlab {

Mat4 SparseHermitian::block(std::size_t row, std::size_t col) const {
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return Mat4::Zero();
  return blocks_[static_cast<std::size_t>(it - cols_.begin())];
}

VecX SparseHermitian::apply(const VecX& v) const {
  if (v.size() != dim()) throw std::invalid_argument("dimension mismatch in apply");
  VecX out = VecX::Zero(dim());
  for (std::size_t x = 0; x < sites(); ++x)
    for (std::size_t p = row_ptr_[x]; p < row_ptr_[x + 1]; ++p)
      out.segment<4>(4 * x) += blocks_[p] * v.segment<4>(4 * cols_[p]);
  return out;
}

MatX SparseHermitian::to_dense() const {
  MatX H = MatX::Zero(dim(), dim());
  for (std::size_t x = 0; x < sites(); ++x)
    for (std::size_t p = row_ptr_[x]; p < row_ptr_[x + 1]; ++p)
      H.block<4, 4>(4 * x, 4 * cols_[p]) = blocks_[p];
  return H;
}

SparseC SparseHermitian::to_sparse() const {
  std::vector<Eigen::Triplet<cplx, int>> t;
  t.reserve(blocks_.size() * 16);
  for (std::size_t x = 0; x < sites(); ++x)
    for (std::size_t p = row_ptr_[x]; p < row_ptr_[x + 1]; ++p)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          if (blocks_[p](a, b) != cplx(0.0))
            t.emplace_back(static_cast<int>(4 * x + a), static_cast<int>(4 * cols_[p] + b),
                           blocks_[p](a, b));
  SparseC S(dim(), dim());
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

MatX SparseHermitian::chiral_block() const {
  const auto n = static_cast<Eigen::Index>(2 * sites());
  MatX Q = MatX::Zero(n, n);
  for (std::size_t x = 0; x < sites(); ++x)
    for (std::size_t p = row_ptr_[x]; p < row_ptr_[x + 1]; ++p)
      Q.block<2, 2>(2 * x, 2 * cols_[p]) = blocks_[p].block<2, 2>(2, 0);
  return Q;
}

double SparseHermitian::hermiticity_defect() const {
  double d = 0.0;
  for (std::size_t x = 0; x < sites(); ++x)
    for (std::size_t p = row_ptr_[x]; p < row_ptr_[x + 1]; ++p)
      d = std::max(d, max_abs(blocks_[p] - block(cols_[p], x).adjoint()));
  return d;
}

double SparseHermitian::chiral_defect() const {
  const Mat4& J = clifford().chiral;
  double d = 0.0;
  for (const Mat4& b : blocks_) d = std::max(d, max_abs(J * b * J + b));
  return d;
}

double SparseHermitian::block_row_bound() const {
  double bound = 0.0;
  for (std::size_t x = 0; x < sites(); ++x) {
    double row = 0.0;
    for (std::size_t p = row_ptr_[x]; p < row_ptr_[x + 1]; ++p) {
      Eigen::JacobiSVD<Mat4> svd(blocks_[p]);
      row += svd.singularValues()(0);
    }
    bound = std::max(bound, row);
  }
  return bound;
}

void SparseHermitian::write_triplets(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "row,col,re,im\n";
  char buf[160];
  for (std::size_t x = 0; x < sites(); ++x)
    for (std::size_t p = row_ptr_[x]; p < row_ptr_[x + 1]; ++p)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const cplx v = blocks_[p](a, b);
          if (v == cplx(0.0)) continue;
          std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", 4 * x + a, 4 * cols_[p] + b,
                        v.real(), v.imag());
          out << buf;
        }
}

SparseHermitian::Builder::Builder(std::size_t sites) {
  op_.row_ptr_.reserve(sites + 1);
  op_.row_ptr_.push_back(0);
}

void SparseHermitian::Builder::add_row(const Mat4& diagonal,
                                       std::vector<std::pair<std::size_t, Mat4>> off_diagonal) {
  off_diagonal.emplace_back(next_, diagonal);
  std::sort(off_diagonal.begin(), off_diagonal.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < off_diagonal.size(); ++i) {
    if (i > 0 && off_diagonal[i].first == off_diagonal[i - 1].first) {
      op_.blocks_.back() += off_diagonal[i].second;
      continue;
    }
    op_.cols_.push_back(off_diagonal[i].first);
    op_.blocks_.push_back(off_diagonal[i].second);
  }
  op_.row_ptr_.push_back(op_.cols_.size());
  ++next_;
}

SparseHermitian SparseHermitian::Builder::finish() { return std::move(op_); }

double bare_onsite_mass(double mass) { return mass; }

SiteBlocks defect_site_blocks(const Pattern& pattern, std::size_t x, double mass) {
  const CliffordSet& c = clifford();
  const Mat4& G4 = c.gamma[3];
  const cplx i{0.0, 1.0};
  const bool flat = pattern.params.alpha == 1.0;
  const double sx = pattern.params.sin_xi();
  const double cx = pattern.params.cos_xi();

  SiteBlocks out;
  out.onsite = bare_onsite_mass(mass) * G4;

  // <x|H|y> = (1/2)[i (x - y) . G + G_4] for every neighbor y.
  for (const Bond& b : pattern.neighbors[x])
    out.hops.emplace_back(b.to, 0.5 * (i * c.dot(-b.vec) + G4));

  if (!flat) {
    const Vec3& px = pattern.sites[x].position;
    Mat4 plaq = Mat4::Zero();
    for (const Plaquette& p : pattern.plaquettes[x]) {
      const Vec3 ez = pattern.sites[p.z].position - px;
      const Vec3 ey = pattern.sites[p.y].position - px;
      const Vec3 e = ez.cross(ey);
      plaq += (e.y() * c.dot(e)) / cx + (e.z() * e.x() / (sx * cx)) * G4;
    }
    out.onsite += plaq / 8.0;
  }
  return out;
}

SparseHermitian assemble_defect(const Pattern& pattern, double mass) {
  const double a = pattern.params.alpha;
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (a != 1.0 && !(pattern.params.cos_xi() > 0.0))
    throw std::invalid_argument("cos(xi) vanishes; use alpha = 1 for the flat lattice");
  if (pattern.neighbors.size() != pattern.size() || pattern.plaquettes.size() != pattern.size())
    throw std::invalid_argument("pattern adjacency/plaquettes not built");

  SparseHermitian::Builder builder(pattern.size());
  for (std::size_t x = 0; x < pattern.size(); ++x) {
    SiteBlocks sb = defect_site_blocks(pattern, x, mass);
    builder.add_row(sb.onsite, std::move(sb.hops));
  }
  return builder.finish();
}

double asymptotic_residual(const Pattern& pattern, double mass, double r0, double theta0) {
  const PatternParams& pp = pattern.params;
  if (!(r0 + 5.0 < pp.r_max)) throw std::invalid_argument("asymptotic_residual needs r0 + 5 < r_max");
  if (!(r0 - 5.0 > pp.core_cut))
    throw std::invalid_argument("asymptotic_residual needs r0 - 5 > core_cut");
  if (!(theta0 >= 0.0 && theta0 < pp.sector()))
    throw std::invalid_argument("theta0 outside the kept sector");

  const double phi = theta0 / pp.alpha;
  const Vec3 target(r0 * pp.alpha * std::cos(phi), r0 * pp.alpha * std::sin(phi), -r0 * pp.cos_xi());
  std::size_t x = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const Site& s : pattern.sites) {
    const double d = (s.position - target).squaredNorm();
    if (d < best) {
      best = d;
      x = s.id;
    }
  }

  const CliffordSet& c = clifford();
  const Mat4& G4 = c.gamma[3];
  const cplx i{0.0, 1.0};
  const double t = pattern.sites[x].theta0;
  const Frame f = frame(t, pp);
  const bool flat = pp.alpha == 1.0;

  const SiteBlocks sb = defect_site_blocks(pattern, x, mass);
  if (sb.hops.size() != 4) throw std::runtime_error("local neighborhood is not a square patch");

  Mat4 onsite_ref = mass * G4;
  if (!flat) {
    const double ph = t / pp.alpha;
    onsite_ref += std::sin(ph) * c.dot(f.normal) + std::cos(ph) * G4;
  }
  double residual = max_abs(sb.onsite - onsite_ref);

  const Vec3 dirs[4] = {f.a1, -f.a1, f.a2, -f.a2};
  bool used[4] = {false, false, false, false};
  for (std::size_t h = 0; h < sb.hops.size(); ++h) {
    const Vec3& bond = pattern.neighbors[x][h].vec;
    int match = -1;
    for (int d = 0; d < 4; ++d)
      if (bond.normalized().dot(dirs[d]) > 0.9) match = d;
    if (match < 0 || used[match]) throw std::runtime_error("local neighborhood is not a square patch");
    used[match] = true;
    // <x|H|x + a> of the translation-invariant model: (1/2)[-i a . G + G_4].
    const Mat4 ref = 0.5 * (-i * c.dot(dirs[match]) + G4);
    residual = std::max(residual, max_abs(sb.hops[h].second - ref));
  }
  return residual;
}

}  // namespace defectlab
