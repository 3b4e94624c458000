#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "defectlab/bulk.hpp"
#include "defectlab/clifford.hpp"

using namespace defectlab;

namespace {

Eigen::Vector4d sorted_eigs(const Mat4& h) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// |d(k)| for the torus model, written out independently.
double torus_norm(double M, const Momentum& k) {
  const double s = std::sin(k[0]) * std::sin(k[0]) + std::sin(k[1]) * std::sin(k[1]) +
                   std::sin(k[2]) * std::sin(k[2]);
  const double m = M + std::cos(k[0]) + std::cos(k[1]) + std::cos(k[2]);
  return std::sqrt(s + m * m);
}

}  // namespace

TEST_CASE("Bloch Hamiltonian examples") {
  const auto& G = clifford().gamma;
  CHECK(max_abs(bloch_h(BlochModel::torus(2.0), {0, 0, 0}) - 5.0 * G[3]) < 1e-15);
  CHECK(max_abs(bloch_h(BlochModel::torus(0.0), {pi / 2, 0, 0}) - (G[0] + 2.0 * G[3])) < 1e-15);
  CHECK(max_abs(bloch_h(BlochModel::torus(-3.0), {pi, pi, pi}) + 6.0 * G[3]) < 1e-15);
}

TEST_CASE("spectrum is +-|d| with chiral symmetry for every variant") {
  const Mat4& J = clifford().chiral;
  const std::vector<BlochModel> models{BlochModel::torus(1.3), BlochModel::cylinder(0.4, 0.7),
                                       BlochModel::asymptotic(2.0, 1.1, 0.75),
                                       BlochModel::asymptotic(-1.0, 0.3, 0.25)};
  for (const BlochModel& model : models)
    for (double a : {0.0, 0.4, 2.1})
      for (double b : {-1.0, 0.9})
        for (double c : {0.0, 2.5}) {
          const Momentum k{a, b, c};
          const Mat4 h = bloch_h(model, k);
          CHECK(max_abs(h - h.adjoint()) == 0.0);
          CHECK(max_abs(J * h * J + h) < 1e-15);
          const Eigen::Vector4d ev = sorted_eigs(h);
          CHECK(std::abs(ev[0] + ev[3]) < 1e-12);
          CHECK(std::abs(ev[0] - ev[1]) < 1e-12);
          if (model.variant == BlochVariant::torus3d)
            CHECK(std::abs(ev[3] - torus_norm(model.mass, k)) < 1e-12);
        }
}

TEST_CASE("gap closes at the critical masses") {
  for (double M : {3.0, 1.0, -1.0, -3.0}) CHECK(gap_scan(BlochModel::torus(M), 60) < 1e-12);
  for (double M : {0.0, 2.0, -2.0, 4.0, -4.0}) CHECK(gap_scan(BlochModel::torus(M), 60) > 0.1);
}

TEST_CASE("gap scan matches a brute-force |d| minimum") {
  const int n = 24;
  for (double M : {4.0, 2.0, 0.5}) {
    double best = 1e300;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          best = std::min(best, torus_norm(M, {2 * pi * i / n, 2 * pi * j / n, 2 * pi * l / n}));
    CHECK(gap_scan(BlochModel::torus(M), n) == doctest::Approx(best).epsilon(1e-12));
  }
  CHECK(gap_scan(BlochModel::torus(4.0), 60) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(gap_scan(BlochModel::torus(1.0), 4));
}

TEST_CASE("flat-band unitary") {
  const Mat2 u0 = flat_band_unitary(BlochModel::torus(4.0), {0, 0, 0});
  CHECK(max_abs(u0 - cplx(0, 1) * Mat2::Identity()) < 1e-14);

  const BlochModel model = BlochModel::torus(2.0);
  const int n = 40;
  Mat2 prev = flat_band_unitary(model, {0, 0.3, -0.2});
  for (int i = 1; i <= n; ++i) {
    const Mat2 u = flat_band_unitary(model, {2 * pi * i / n, 0.3, -0.2});
    CHECK(max_abs(u * u.adjoint() - Mat2::Identity()) < 1e-13);
    CHECK(max_abs(u - prev) < 0.5);
    prev = u;
  }
  CHECK_THROWS_AS(flat_band_unitary(BlochModel::torus(3.0), {pi, pi, pi}), GapClosingError);
  CHECK_THROWS_AS(flat_band_unitary(BlochModel::torus(1.0), {pi, pi, 0}), GapClosingError);
}

TEST_CASE("winding numbers across the phase diagram") {
  const std::vector<std::pair<double, long>> expected{{4.0, 0}, {2.0, 1}, {0.0, -2}, {-2.0, 1}, {-4.0, 0}};
  for (auto [M, w] : expected) {
    const WindingResult r = winding3d(BlochModel::torus(M), 40);
    CAPTURE(M);
    CHECK(r.rounded == w);
    CHECK(std::abs(r.raw - static_cast<double>(r.rounded)) < 0.05);
  }
}

TEST_CASE("winding flips with orientation") {
  for (double M : {2.0, 0.0}) {
    const WindingResult a = winding3d(BlochModel::torus(M), 24);
    const WindingResult b = winding3d_reflected(BlochModel::torus(M), 24);
    CHECK(b.rounded == -a.rounded);
    CHECK(std::abs(a.raw + b.raw) < 1e-10);
  }
}

TEST_CASE("winding refuses gapless or unsupported input") {
  CHECK_THROWS_AS(winding3d(BlochModel::torus(3.0), 40), GapClosingError);
  CHECK_THROWS_AS(winding3d(BlochModel::torus(1.0), 20), GapClosingError);
  CHECK_THROWS(winding3d(BlochModel::cylinder(2.0, 0.0), 20));
}

TEST_CASE("asymptotic model at theta0 = 0 is unitarily the cylinder at beta = 0") {
  for (double M : {2.0, -1.0}) {
    const BlochModel as = BlochModel::asymptotic(M, 0.0, 0.75);
    const BlochModel cy = BlochModel::cylinder(M, 0.0);
    for (double a : {0.0, 0.7, 2.0})
      for (double b : {-1.3, 0.2}) {
        const Momentum k{a, b, 0};
        CHECK((sorted_eigs(bloch_h(as, k)) - sorted_eigs(bloch_h(cy, k))).cwiseAbs().maxCoeff() < 1e-12);
      }
  }
}

TEST_CASE("asymptotic model is periodic in theta0 up to the sector opening") {
  for (double alpha : {0.25, 0.5, 0.75}) {
    const double t = 0.37;
    const BlochModel a = BlochModel::asymptotic(2.0, t, alpha);
    const BlochModel b = BlochModel::asymptotic(2.0, t + 2 * pi * alpha, alpha);
    for (double k1 : {0.1, 1.9}) {
      const Momentum k{k1, -0.6, 0};
      CHECK((sorted_eigs(bloch_h(a, k)) - sorted_eigs(bloch_h(b, k))).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("shift chain: bulk at +-1, open chain with two end modes") {
  const SshSpectra s = ssh_spectra(100);
  CHECK(s.bulk.size() == 128);
  for (double e : s.bulk) CHECK(std::abs(std::abs(e) - 1.0) < 1e-12);

  CHECK(s.chain.size() == 200);
  std::size_t zeros = 0;
  for (double e : s.chain) {
    if (std::abs(e) < 1e-10)
      ++zeros;
    else
      CHECK(std::abs(std::abs(e) - 1.0) < 1e-10);
  }
  CHECK(zeros == 2);

  REQUIRE(s.zero_modes.size() == 2);
  int chirality_sum = 0;
  for (const ChainMode& z : s.zero_modes) {
    chirality_sum += z.chirality;
    CHECK(std::abs(z.energy) < 1e-10);
    CHECK(std::max(z.left_weight, 1.0 - z.left_weight) >= 0.99);
    // Localized on a single end site.
    CHECK(z.vector.cwiseAbs2().maxCoeff() > 0.99);
  }
  CHECK(chirality_sum == 0);
}

TEST_CASE("shift chain matrix layout") {
  const MatX H = ssh_chain_matrix(4);
  CHECK(H.rows() == 8);
  CHECK(max_abs(H - H.adjoint()) == 0.0);
  CHECK(max_abs(H.topLeftCorner(4, 4)) == 0.0);
  CHECK(max_abs(H.bottomRightCorner(4, 4)) == 0.0);
  CHECK(H(4 + 0, 1) == cplx(1.0));
  CHECK(H(4 + 3, 0) == cplx(0.0));
}
