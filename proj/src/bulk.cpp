#include "defectlab/bulk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "defectlab/clifford.hpp"

namespace defectlab {

namespace {

// Sign that maps the raw odd Chern character of this Clifford/Fourier
// convention onto W(M = 2) = +1.
constexpr double winding_orientation = -1.0;

double grid_k(int j, int n) { return 2.0 * pi * static_cast<double>(j) / n; }

double smallest_abs_eigenvalue(const Mat4& h) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().minCoeff();
}

std::vector<Mat2> unitary_grid(const BlochModel& model, int n) {
  std::vector<Mat2> u(static_cast<std::size_t>(n) * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        u[(static_cast<std::size_t>(a) * n + b) * n + c] =
            flat_band_unitary(model, {grid_k(a, n), grid_k(b, n), grid_k(c, n)});
  return u;
}

double chern_character(const std::vector<Mat2>& u, int n) {
  const double h = 2.0 * pi / n;
  const auto at = [&](int a, int b, int c) -> const Mat2& {
    a = (a + n) % n;
    b = (b + n) % n;
    c = (c + n) % n;
    return u[(static_cast<std::size_t>(a) * n + b) * n + c];
  };
  double sum = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const Mat2 ud = at(a, b, c).adjoint();
        const Mat2 A1 = ud * (at(a + 1, b, c) - at(a - 1, b, c)) / (2.0 * h);
        const Mat2 A2 = ud * (at(a, b + 1, c) - at(a, b - 1, c)) / (2.0 * h);
        const Mat2 A3 = ud * (at(a, b, c + 1) - at(a, b, c - 1)) / (2.0 * h);
        const cplx t = 3.0 * (A1 * A2 * A3).trace() - 3.0 * (A1 * A3 * A2).trace();
        sum += t.real();
      }
  return sum * h * h * h / (24.0 * pi * pi);
}

}  // namespace

Mat4 bloch_h(const BlochModel& model, const Momentum& k) {
  const CliffordSet& c = clifford();
  const auto& G = c.gamma;
  switch (model.variant) {
    case BlochVariant::torus3d:
      return std::sin(k[0]) * G[0] + std::sin(k[1]) * G[1] + std::sin(k[2]) * G[2] +
             (model.mass + std::cos(k[0]) + std::cos(k[1]) + std::cos(k[2])) * G[3];
    case BlochVariant::cylinder:
      return std::sin(k[0]) * G[0] + std::sin(k[1]) * G[1] + std::sin(model.beta) * G[2] +
             (model.mass + std::cos(model.beta) + std::cos(k[0]) + std::cos(k[1])) * G[3];
    case BlochVariant::asymptotic: {
      PatternParams pp;
      pp.alpha = model.alpha;
      const Frame f = frame(model.theta0, pp);
      const double phi = model.theta0 / model.alpha;
      return std::sin(k[0]) * c.dot(f.a1) + std::sin(k[1]) * c.dot(f.a2) +
             std::sin(phi) * c.dot(f.normal) +
             (model.mass + std::cos(phi) + std::cos(k[0]) + std::cos(k[1])) * G[3];
    }
  }
  throw std::logic_error("unknown Bloch variant");
}

double gap_scan(const BlochModel& model, int grid_n) {
  if (grid_n < 8) throw std::invalid_argument("gap_scan needs grid_n >= 8");
  const int n3 = model.dimension() == 3 ? grid_n : 1;
  double gap = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid_n; ++a)
    for (int b = 0; b < grid_n; ++b)
      for (int c = 0; c < n3; ++c) {
        const Momentum k{grid_k(a, grid_n), grid_k(b, grid_n), grid_k(c, grid_n)};
        gap = std::min(gap, smallest_abs_eigenvalue(bloch_h(model, k)));
      }
  return gap;
}

Mat2 flat_band_unitary(const BlochModel& model, const Momentum& k) {
  const Mat4 h = bloch_h(model, k);
  const Mat2 q = h.block<2, 2>(2, 0);
  Eigen::JacobiSVD<Mat2> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() < 1e-8)
    throw GapClosingError("flat-band unitary undefined: gap closes at this momentum");
  return svd.matrixU() * svd.matrixV().adjoint();
}

WindingResult winding3d(const BlochModel& model, int grid_n, double gap_threshold) {
  if (model.variant != BlochVariant::torus3d)
    throw std::invalid_argument("winding3d needs the torus3d variant");
  if (grid_n < 8) throw std::invalid_argument("winding3d needs grid_n >= 8");
  const double gap = gap_scan(model, grid_n);
  if (gap < gap_threshold)
    throw GapClosingError("gap " + std::to_string(gap) + " below threshold; winding undefined");
  WindingResult r;
  r.grid_n = grid_n;
  r.raw = winding_orientation * chern_character(unitary_grid(model, grid_n), grid_n);
  r.rounded = std::lround(r.raw);
  return r;
}

WindingResult winding3d_reflected(const BlochModel& model, int grid_n) {
  if (model.variant != BlochVariant::torus3d)
    throw std::invalid_argument("winding3d needs the torus3d variant");
  const int n = grid_n;
  std::vector<Mat2> u(static_cast<std::size_t>(n) * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        u[(static_cast<std::size_t>(a) * n + b) * n + c] =
            flat_band_unitary(model, {-grid_k(a, n), -grid_k(b, n), -grid_k(c, n)});
  WindingResult r;
  r.grid_n = grid_n;
  r.raw = winding_orientation * chern_character(u, grid_n);
  r.rounded = std::lround(r.raw);
  return r;
}

MatX ssh_chain_matrix(int chain_len) {
  const int N = chain_len;
  MatX H = MatX::Zero(2 * N, 2 * N);
  // S|n> = |n-1>, truncated to 0..N-1.
  for (int n = 1; n < N; ++n) {
    H(N + n - 1, n) = 1.0;  // lower-left: S
    H(n, N + n - 1) = 1.0;  // upper-right: S^dag
  }
  return H;
}

SshSpectra ssh_spectra(int chain_len, int k_points, double zero_tol) {
  if (chain_len < 4) throw std::invalid_argument("chain_len must be at least 4");
  SshSpectra out;
  for (int j = 0; j < k_points; ++j) {
    const double k = grid_k(j, k_points);
    Mat2 h;
    h << 0, std::exp(cplx(0, -k)), std::exp(cplx(0, k)), 0;
    Eigen::SelfAdjointEigenSolver<Mat2> es(h, Eigen::EigenvaluesOnly);
    out.bulk.push_back(es.eigenvalues()(0));
    out.bulk.push_back(es.eigenvalues()(1));
  }

  const int N = chain_len;
  const MatX H = ssh_chain_matrix(N);
  Eigen::SelfAdjointEigenSolver<MatX> es(H);
  const auto& ev = es.eigenvalues();
  std::vector<int> zero_idx;
  for (int i = 0; i < ev.size(); ++i) {
    out.chain.push_back(ev(i));
    if (std::abs(ev(i)) < zero_tol) zero_idx.push_back(i);
  }
  if (zero_idx.empty()) return out;

  // Resolve the degenerate kernel by chirality.
  MatX V(2 * N, static_cast<Eigen::Index>(zero_idx.size()));
  for (std::size_t c = 0; c < zero_idx.size(); ++c) V.col(c) = es.eigenvectors().col(zero_idx[c]);
  Eigen::VectorXd grading(2 * N);
  grading.head(N).setOnes();
  grading.tail(N).setConstant(-1.0);
  const MatX Jr = V.adjoint() * grading.asDiagonal() * V;
  Eigen::SelfAdjointEigenSolver<MatX> jr(Jr);
  const MatX W = V * jr.eigenvectors();
  for (Eigen::Index c = 0; c < W.cols(); ++c) {
    ChainMode mode;
    mode.vector = W.col(c);
    mode.energy = (mode.vector.adjoint() * H * mode.vector)(0).real();
    mode.chirality = jr.eigenvalues()(c) >= 0 ? 1 : -1;
    double left = 0.0, total = 0.0;
    for (int i = 0; i < 2 * N; ++i) {
      const double w = std::norm(mode.vector(i));
      total += w;
      if (i % N < N / 2) left += w;
    }
    mode.left_weight = left / total;
    out.zero_modes.push_back(std::move(mode));
  }
  return out;
}

}  // namespace defectlab
