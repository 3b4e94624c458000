#include "defectlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "defectlab/clifford.hpp"

namespace defectlab {

namespace {

double lorentzian(double x, double eps) { return eps / (x * x + eps * eps); }

Eigen::VectorXd site_weights(const VecX& v, std::size_t sites) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(sites));
  for (std::size_t x = 0; x < sites; ++x) w(x) = v.segment<4>(4 * x).squaredNorm();
  return w;
}

double grading_expectation(const VecX& v) {
  double j = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) j += (i % 4 < 2 ? 1.0 : -1.0) * std::norm(v(i));
  return j;
}

std::vector<std::size_t> selected_sites(const LdosRequest& req, std::size_t sites) {
  if (req.sites.empty()) {
    std::vector<std::size_t> all(sites);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  for (std::size_t s : req.sites)
    if (s >= sites) throw std::out_of_range("LDOS site id out of range");
  return req.sites;
}

void fill_metadata(LdosGrid& g, const LdosRequest& req, const Pattern* geometry) {
  g.energies = req.energies;
  g.info.epsilon = req.epsilon;
  g.info.method = to_string(req.method);
  const std::size_t n = g.site_ids.size();
  g.radius.assign(n, 0.0);
  g.x1.assign(n, 0.0);
  g.x2.assign(n, 0.0);
  if (!geometry) return;
  g.info.alpha = geometry->params.alpha;
  g.info.r_max = geometry->params.r_max;
  g.info.core_cut = geometry->params.core_cut;
  for (std::size_t i = 0; i < n; ++i) {
    const Site& s = geometry->sites.at(g.site_ids[i]);
    g.radius[i] = s.radius;
    g.x1[i] = s.position.x();
    g.x2[i] = s.position.y();
  }
}

// Rotates a block of (near-)degenerate zero modes onto grading eigenvectors.
void resolve_chirality(MatX& vecs) {
  if (vecs.cols() < 2) return;
  Eigen::VectorXd g(vecs.rows());
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = i % 4 < 2 ? 1.0 : -1.0;
  const MatX Jr = vecs.adjoint() * g.asDiagonal() * vecs;
  Eigen::SelfAdjointEigenSolver<MatX> es(Jr);
  vecs = vecs * es.eigenvectors();
}

LdosGrid shifted_solve_ldos(const SparseHermitian& H, const LdosRequest& req,
                            const std::vector<std::size_t>& sites) {
  LdosGrid g;
  g.site_ids = sites;
  g.values.resize(static_cast<Eigen::Index>(req.energies.size()),
                  static_cast<Eigen::Index>(sites.size()));

  const SparseC base = H.to_sparse();
  SparseC eye(H.dim(), H.dim());
  eye.setIdentity();
  constexpr std::size_t batch = 32;

  Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  for (std::size_t e = 0; e < req.energies.size(); ++e) {
    const cplx shift(req.energies[e], req.epsilon);
    SparseC A = base - shift * eye;
    A.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
      throw SolverError("sparse factorization failed: " + lu.lastErrorMessage(),
                        std::numeric_limits<double>::infinity());

    for (std::size_t start = 0; start < sites.size(); start += batch) {
      const std::size_t stop = std::min(sites.size(), start + batch);
      const auto cols = static_cast<Eigen::Index>(4 * (stop - start));
      MatX B = MatX::Zero(H.dim(), cols);
      for (std::size_t s = start; s < stop; ++s)
        for (int o = 0; o < 4; ++o) B(4 * sites[s] + o, 4 * (s - start) + o) = 1.0;
      const MatX X = lu.solve(B);
      const double residual = max_abs(A * X - B);
      if (!(residual < 1e-8))
        throw SolverError("shifted solve residual too large", residual);
      for (std::size_t s = start; s < stop; ++s) {
        double v = 0.0;
        for (int o = 0; o < 4; ++o) v += X(4 * sites[s] + o, 4 * (s - start) + o).imag();
        g.values(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(s)) = v;
      }
    }
  }
  return g;
}

}  // namespace

LdosMethod parse_ldos_method(const std::string& name) {
  if (name == "dense-eig" || name == "dense_eig") return LdosMethod::dense_eig;
  if (name == "shifted-solve" || name == "shifted_solve") return LdosMethod::shifted_solve;
  throw std::invalid_argument("unknown LDOS method '" + name + "'");
}

std::string to_string(LdosMethod method) {
  return method == LdosMethod::dense_eig ? "dense-eig" : "shifted-solve";
}

void LdosRequest::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (energies.empty()) throw std::invalid_argument("LDOS request needs at least one energy");
  for (double e : energies)
    if (!std::isfinite(e)) throw std::invalid_argument("LDOS energies must be finite");
}

double LdosGrid::energy_asymmetry() const {
  double worst = 0.0;
  for (std::size_t a = 0; a < energies.size(); ++a)
    for (std::size_t b = 0; b < energies.size(); ++b)
      if (std::abs(energies[a] + energies[b]) < 1e-12)
        worst = std::max(worst, (values.row(static_cast<Eigen::Index>(a)) -
                                 values.row(static_cast<Eigen::Index>(b)))
                                    .cwiseAbs()
                                    .maxCoeff());
  return worst;
}

DenseSpectrum dense_spectrum(const SparseHermitian& H, double zero_tol, Eigen::Index dense_cap) {
  if (H.dim() > dense_cap)
    throw std::length_error("operator dimension " + std::to_string(H.dim()) +
                            " exceeds the dense cap " + std::to_string(dense_cap));
  const std::size_t sites = H.sites();
  const Eigen::Index dim = H.dim();
  DenseSpectrum out;
  out.eigenvalues.resize(dim);
  out.weights.resize(static_cast<Eigen::Index>(sites), dim);
  out.chirality.resize(dim);

  if (H.chiral_defect() != 0.0) {
    const Eigen::SelfAdjointEigenSolver<MatX> eh(H.to_dense());
    out.eigenvalues = eh.eigenvalues();
    for (Eigen::Index n = 0; n < dim; ++n) {
      out.weights.col(n) = site_weights(eh.eigenvectors().col(n), sites);
      out.chirality(n) = grading_expectation(eh.eigenvectors().col(n));
    }
    return out;
  }

  // H = [[0, Q^dag], [Q, 0]]: Q V_k = s_k U_k gives eigenpairs
  // +-s_k, (V_k, +-U_k)/sqrt(2).
  const Eigen::BDCSVD<MatX> svd(H.chiral_block(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const MatX& U = svd.matrixU();
  const MatX& V = svd.matrixV();
  const Eigen::Index n = sv.size();
  struct Entry {
    double value;
    Eigen::Index k;
    int kind;  // 0: pair (+ or -), 1: upper zero mode, 2: lower zero mode
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const double s = sv(k);
    if (s < zero_tol) {
      entries.push_back({0.0, k, 1});
      entries.push_back({0.0, k, 2});
    } else {
      entries.push_back({s, k, 0});
      entries.push_back({-s, k, 0});
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.value < b.value; });

  Eigen::MatrixXd wV(static_cast<Eigen::Index>(sites), n);
  Eigen::MatrixXd wU(static_cast<Eigen::Index>(sites), n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (std::size_t x = 0; x < sites; ++x) {
      wV(x, k) = std::norm(V(2 * x, k)) + std::norm(V(2 * x + 1, k));
      wU(x, k) = std::norm(U(2 * x, k)) + std::norm(U(2 * x + 1, k));
    }
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Entry& e = entries[static_cast<std::size_t>(i)];
    out.eigenvalues(i) = e.value;
    switch (e.kind) {
      case 0:
        out.weights.col(i) = 0.5 * (wV.col(e.k) + wU.col(e.k));
        out.chirality(i) = 0.0;
        break;
      case 1:
        out.weights.col(i) = wV.col(e.k);
        out.chirality(i) = 1.0;
        break;
      default:
        out.weights.col(i) = wU.col(e.k);
        out.chirality(i) = -1.0;
        break;
    }
  }
  return out;
}

LdosGrid ldos_from_spectrum(const DenseSpectrum& spec, const LdosRequest& req,
                            const Pattern* geometry) {
  req.validate();
  const auto sites = static_cast<std::size_t>(spec.weights.rows());
  LdosGrid g;
  g.site_ids = selected_sites(req, sites);

  const auto nE = static_cast<Eigen::Index>(req.energies.size());
  Eigen::MatrixXd L(nE, spec.eigenvalues.size());
  for (Eigen::Index e = 0; e < nE; ++e)
    for (Eigen::Index n = 0; n < spec.eigenvalues.size(); ++n)
      L(e, n) = lorentzian(req.energies[static_cast<std::size_t>(e)] - spec.eigenvalues(n),
                           req.epsilon);

  if (req.sites.empty()) {
    g.values = L * spec.weights.transpose();
  } else {
    Eigen::MatrixXd W(static_cast<Eigen::Index>(g.site_ids.size()), spec.eigenvalues.size());
    for (std::size_t i = 0; i < g.site_ids.size(); ++i)
      W.row(static_cast<Eigen::Index>(i)) = spec.weights.row(static_cast<Eigen::Index>(g.site_ids[i]));
    g.values = L * W.transpose();
  }
  LdosRequest meta = req;
  meta.method = LdosMethod::dense_eig;
  fill_metadata(g, meta, geometry);
  return g;
}

LdosGrid ldos(const SparseHermitian& H, const LdosRequest& req, const Pattern* geometry) {
  req.validate();
  if (geometry && geometry->size() != H.sites())
    throw std::invalid_argument("geometry does not match the operator");
  if (req.method == LdosMethod::dense_eig)
    return ldos_from_spectrum(dense_spectrum(H, 1e-9, req.dense_cap), req, geometry);

  LdosGrid g = shifted_solve_ldos(H, req, selected_sites(req, H.sites()));
  fill_metadata(g, req, geometry);
  return g;
}

RadialProfile radial_profile(const LdosGrid& grid, double bin_width) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
  double r_max = grid.info.r_max;
  if (!(r_max > 0.0))
    r_max = grid.radius.empty() ? bin_width : *std::max_element(grid.radius.begin(), grid.radius.end());
  const auto bins = static_cast<std::size_t>(std::max(1.0, std::ceil(r_max / bin_width - 1e-12)));

  RadialProfile p;
  p.bin_width = bin_width;
  p.energies = grid.energies;
  p.count.assign(bins, 0);
  std::vector<std::size_t> bin_of(grid.site_ids.size());
  for (std::size_t s = 0; s < grid.site_ids.size(); ++s) {
    // The outer edge r = r_max lands in the last bin.
    auto k = static_cast<std::size_t>(std::floor(grid.radius[s] / bin_width));
    bin_of[s] = std::min(k, bins - 1);
    ++p.count[bin_of[s]];
  }
  p.mean.assign(grid.energies.size(), std::vector<std::optional<double>>(bins));
  for (std::size_t e = 0; e < grid.energies.size(); ++e) {
    std::vector<double> sum(bins, 0.0);
    for (std::size_t s = 0; s < grid.site_ids.size(); ++s)
      sum[bin_of[s]] += grid.values(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(s));
    for (std::size_t k = 0; k < bins; ++k)
      if (p.count[k] > 0) p.mean[e][k] = sum[k] / static_cast<double>(p.count[k]);
  }
  return p;
}

NearZeroModes eigs_near_zero(const SparseHermitian& H, std::size_t count, EigsMethod method,
                             double eta, double tol, int max_iter) {
  if (count == 0) throw std::invalid_argument("count must be positive");
  if (count > static_cast<std::size_t>(H.dim())) throw std::invalid_argument("count exceeds dimension");
  NearZeroModes out;

  if (method == EigsMethod::dense) {
    const DenseSpectrum spec = dense_spectrum(H);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(spec.eigenvalues.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(spec.eigenvalues(a)) < std::abs(spec.eigenvalues(b));
    });
    order.resize(count);
    std::sort(order.begin(), order.end());
    for (Eigen::Index i : order) {
      out.eigenvalues.push_back(spec.eigenvalues(i));
      out.site_weights.push_back(spec.weights.col(i));
      out.chirality.push_back(spec.chirality(i));
    }
  } else {
    const Eigen::Index dim = H.dim();
    const auto p = static_cast<Eigen::Index>(std::min<std::size_t>(
        static_cast<std::size_t>(dim), count + std::max<std::size_t>(8, count)));
    SparseC A = H.to_sparse();
    SparseC eye(dim, dim);
    eye.setIdentity();
    A = A - cplx(0.0, eta) * eye;
    A.makeCompressed();
    Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw SolverError("shift-invert factorization failed: " + lu.lastErrorMessage(),
                        std::numeric_limits<double>::infinity());

    std::mt19937 rng(12345);
    std::normal_distribution<double> normal;
    MatX X(dim, p);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index i = 0; i < dim; ++i) X(i, j) = cplx(normal(rng), normal(rng));

    const double scale = std::max(1.0, H.block_row_bound());
    Eigen::VectorXd theta;
    MatX ritz;
    double worst = std::numeric_limits<double>::infinity();
    std::vector<Eigen::Index> wanted;
    int it = 0;
    for (; it < max_iter; ++it) {
      X = lu.solve(X);
      Eigen::HouseholderQR<MatX> qr(X);
      X = qr.householderQ() * MatX::Identity(dim, p);
      MatX HX(dim, p);
      for (Eigen::Index j = 0; j < p; ++j) HX.col(j) = H.apply(X.col(j));
      MatX T = X.adjoint() * HX;
      T = 0.5 * (T + T.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<MatX> es(T);
      theta = es.eigenvalues();
      ritz = X * es.eigenvectors();
      const MatX Hritz = HX * es.eigenvectors();
      wanted.resize(static_cast<std::size_t>(p));
      std::iota(wanted.begin(), wanted.end(), Eigen::Index{0});
      std::stable_sort(wanted.begin(), wanted.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(theta(a)) < std::abs(theta(b));
      });
      wanted.resize(count);
      worst = 0.0;
      for (Eigen::Index j : wanted)
        worst = std::max(worst, (Hritz.col(j) - theta(j) * ritz.col(j)).norm());
      X = ritz;
      if (worst < tol * scale) break;
    }
    out.iterations = it + 1;
    if (!(worst < tol * scale)) throw SolverError("shift-invert iteration did not converge", worst);

    std::sort(wanted.begin(), wanted.end());
    MatX vecs(dim, static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < count; ++c) vecs.col(static_cast<Eigen::Index>(c)) = ritz.col(wanted[c]);

    // Chirality-resolve the cluster of exact zero modes.
    std::vector<Eigen::Index> zeros;
    for (std::size_t c = 0; c < count; ++c)
      if (std::abs(theta(wanted[c])) < 1e-9) zeros.push_back(static_cast<Eigen::Index>(c));
    if (zeros.size() > 1) {
      MatX Z(dim, static_cast<Eigen::Index>(zeros.size()));
      for (std::size_t z = 0; z < zeros.size(); ++z) Z.col(static_cast<Eigen::Index>(z)) = vecs.col(zeros[z]);
      resolve_chirality(Z);
      for (std::size_t z = 0; z < zeros.size(); ++z) vecs.col(zeros[z]) = Z.col(static_cast<Eigen::Index>(z));
    }
    for (std::size_t c = 0; c < count; ++c) {
      const VecX v = vecs.col(static_cast<Eigen::Index>(c));
      out.eigenvalues.push_back(theta(wanted[c]));
      out.site_weights.push_back(site_weights(v, H.sites()));
      out.chirality.push_back(grading_expectation(v));
    }
  }

  for (std::size_t i = 1; i < out.eigenvalues.size(); ++i)
    if (out.eigenvalues[i] - out.eigenvalues[i - 1] < 1e-10) out.degenerate = true;
  return out;
}

ChiralIndex chiral_index(const DenseSpectrum& spec, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  ChiralIndex out;
  for (Eigen::Index n = 0; n < spec.eigenvalues.size(); ++n) {
    const double lam = spec.eigenvalues(n);
    if (std::abs(std::abs(lam) - delta) < 1e-8) out.ill_conditioned = true;
    if (std::abs(lam) <= delta) {
      out.value += spec.chirality(n);
      ++out.states;
    }
  }
  return out;
}

ChiralIndex chiral_index(const SparseHermitian& H, double delta) {
  return chiral_index(dense_spectrum(H), delta);
}

double integrated_ldos(const LdosGrid& grid, std::size_t energy_index, double r) {
  double sum = 0.0;
  for (std::size_t s = 0; s < grid.site_ids.size(); ++s)
    if (grid.radius[s] < r)
      sum += grid.values(static_cast<Eigen::Index>(energy_index), static_cast<Eigen::Index>(s));
  return sum;
}

void write_ldos_csv(const LdosGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "E,site_id,radius,x1,x2,ldos\n";
  char buf[256];
  for (std::size_t e = 0; e < grid.energies.size(); ++e)
    for (std::size_t s = 0; s < grid.site_ids.size(); ++s) {
      std::snprintf(buf, sizeof buf, "%.10g,%zu,%.10g,%.10g,%.10g,%.10e\n", grid.energies[e],
                    grid.site_ids[s], grid.radius[s], grid.x1[s], grid.x2[s],
                    grid.values(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(s)));
      out << buf;
    }
}

void write_radial_csv(const RadialProfile& profile, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "E,R_bin,ldos_mean,count\n";
  char buf[256];
  for (std::size_t e = 0; e < profile.energies.size(); ++e)
    for (std::size_t k = 0; k < profile.bins(); ++k) {
      const double r = static_cast<double>(k) * profile.bin_width;
      if (profile.mean[e][k])
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10e,%zu\n", profile.energies[e], r,
                      *profile.mean[e][k], profile.count[k]);
      else
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,,0\n", profile.energies[e], r);
      out << buf;
    }
}

}  // namespace defectlab
