// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "defectlab/assembly.hpp"
#include "defectlab/bulk.hpp"
#include "defectlab/clifford.hpp"
#include "defectlab/experiments.hpp"
#include "defectlab/pattern.hpp"
#include "defectlab/spectral.hpp"

using namespace defectlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Record {
  std::string name;
  Outcome outcome;
  double seconds = 0.0;
  double budget = 0.0;  // 0: none
};

std::vector<Record> records;

void run(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && s > budget_s) {
    o.pass = false;
    o.detail += "; runtime over budget";
  }
  std::printf("[%s] %s (%.2f s%s) %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), s,
              budget_s > 0 ? (" / budget " + std::to_string(static_cast<int>(budget_s)) + " s").c_str() : "",
              o.detail.c_str());
  std::fflush(stdout);
  records.push_back({name, o, s, budget_s});
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Zero-energy cone runs shared by the LDOS criteria.
struct ConeLdos {
  LdosGrid grid;  // energies {-0.5, 0, 0.5}
  double core = 0.0;
  double core_mean = 0.0;
  double seconds = 0.0;
};

std::map<std::string, ConeLdos> cone_cache;

const ConeLdos& cone(double alpha, double r_max, double cut, double mass) {
  const std::string key = fmt("%g", alpha) + "/" + fmt("%g", r_max) + "/" + fmt("%g", cut) + "/" + fmt("%g", mass);
  auto it = cone_cache.find(key);
  if (it != cone_cache.end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  const DefectRun r = run_defect(alpha, r_max, cut, mass);
  LdosRequest req;
  req.energies = {-0.5, 0.0, 0.5};
  req.epsilon = 0.06;
  ConeLdos c;
  c.grid = ldos_from_spectrum(r.spectrum, req, &r.pattern);
  c.grid.info.mass = mass;
  c.core = integrated_ldos(c.grid, 1, 5.0);
  std::size_t n = 0;
  for (double rad : c.grid.radius) n += rad < 5.0;
  c.core_mean = n ? c.core / static_cast<double>(n) : 0.0;
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  cone alpha=%g r_max=%g cut=%g M=%g: %zu sites, core LDOS %.6f (%zu sites, mean %.6f), %.1f s\n",
              alpha, r_max, cut, mass, r.pattern.size(), c.core, n, c.core_mean, c.seconds);
  std::fflush(stdout);
  return cone_cache.emplace(key, std::move(c)).first->second;
}

Outcome clifford_suite() {
  const CliffordSet c = make_clifford();
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    worst = std::max(worst, max_abs(c.gamma[i] - c.gamma[i].adjoint()));
    worst = std::max(worst, max_abs(c.chiral * c.gamma[i] * c.chiral + c.gamma[i]));
    for (int j = 0; j < 4; ++j) {
      const Mat4 ac = c.gamma[i] * c.gamma[j] + c.gamma[j] * c.gamma[i];
      worst = std::max(worst, max_abs(ac - (i == j ? 2.0 : 0.0) * Mat4::Identity()));
    }
  }
  return {worst == 0.0, fmt("max defect %.3e", worst)};
}

Outcome frame_twist() {
  const PatternParams pp{0.75, 10.0, 0.0};
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> th(0.0, pp.sector());
  double ortho = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Frame f = frame(th(rng), pp);
    ortho = std::max({ortho, std::abs(f.a1.norm() - 1.0), std::abs(f.a2.norm() - 1.0), std::abs(f.a1.dot(f.a2))});
  }
  const Frame f0 = frame(0.0, pp), f1 = frame(1.5 * pi, pp);
  const double twist = std::max((f1.a1 - f0.a2).norm(), (f1.a2 + f0.a1).norm());
  return {ortho < 1e-12 && twist < 1e-12, fmt("orthonormality %.2e", ortho) + fmt(", twist %.2e", twist)};
}

Outcome phase_diagram() {
  bool ok = true;
  std::ostringstream d;
  d << "gap60:";
  for (double M : {3.0, -3.0, 1.0, -1.0}) {
    const double g = gap_scan(BlochModel::torus(M), 60);
    ok = ok && g < 1e-12;
    d << fmt(" %g->", M) << fmt("%.1e", g);
  }
  for (double M : {0.0, 2.0, -2.0, 4.0, -4.0}) {
    const double g = gap_scan(BlochModel::torus(M), 60);
    ok = ok && g > 0.1;
    d << fmt(" %g->", M) << fmt("%.3f", g);
  }
  d << "; winding40:";
  const std::vector<std::pair<double, long>> want{{4, 0}, {2, 1}, {0, -2}, {-2, 1}, {-4, 0}};
  for (auto [M, w] : want) {
    const WindingResult r = winding3d(BlochModel::torus(M), 40);
    ok = ok && r.rounded == w && std::abs(r.raw - static_cast<double>(r.rounded)) < 0.05;
    d << fmt(" %g->", M) << fmt("%.4f", r.raw);
  }
  return {ok, d.str()};
}

Outcome ssh_toy() {
  const SshSpectra s = ssh_spectra(100);
  double bulk = 0.0;
  for (double e : s.bulk) bulk = std::max(bulk, std::abs(std::abs(e) - 1.0));
  std::size_t zeros = 0;
  for (double e : s.chain) zeros += std::abs(e) < 1e-10;
  double loc = 1.0;
  for (const ChainMode& z : s.zero_modes) loc = std::min(loc, std::max(z.left_weight, 1.0 - z.left_weight));
  const bool ok = bulk < 1e-12 && zeros == 2 && s.zero_modes.size() == 2 && loc >= 0.99;
  return {ok, fmt("bulk dev %.1e", bulk) + fmt(", zeros %g", static_cast<double>(zeros)) +
                  fmt(", end weight %.6f", loc)};
}

Outcome assembly_oracle() {
  double err = 0.0;
  for (int L : {6, 8}) {
    const double M = 2.0;
    const SparseHermitian H = assemble_defect(build_flat_torus(L), M);
    std::vector<double> bloch;
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b) {
        Eigen::SelfAdjointEigenSolver<Mat4> es(
            bloch_h(BlochModel::cylinder(M - 1.0, 0.0), {2 * pi * a / L, 2 * pi * b / L, 0}),
            Eigen::EigenvaluesOnly);
        for (int i = 0; i < 4; ++i) bloch.push_back(es.eigenvalues()(i));
      }
    std::sort(bloch.begin(), bloch.end());
    Eigen::SelfAdjointEigenSolver<MatX> es(H.to_dense(), Eigen::EigenvaluesOnly);
    for (std::size_t i = 0; i < bloch.size(); ++i) err = std::max(err, std::abs(es.eigenvalues()(i) - bloch[i]));
  }
  double chiral = 0.0;
  for (double a : {1.0, 0.75, 0.5, 0.25}) chiral = std::max(chiral, assemble_defect(build_pattern({a, 30.0, 0.0}), 2.0).chiral_defect());
  return {err < 1e-8 && chiral == 0.0, fmt("torus spectrum error %.2e", err) + fmt(", chiral defect %.1e", chiral)};
}

Outcome asymptotic_convergence() {
  const double alpha = 0.75;
  const Pattern near = build_pattern({alpha, 210.0, 190.0});
  const Pattern far = build_pattern({alpha, 410.0, 390.0});
  bool ok = true;
  std::ostringstream d;
  double worst = 0.0;
  for (int j = 0; j < 8; ++j) {
    const double t = (j + 0.5) * 2 * pi * alpha / 8;
    const double r200 = asymptotic_residual(near, 2.0, 200.0, t);
    const double r400 = asymptotic_residual(far, 2.0, 400.0, t);
    ok = ok && r200 < 0.05 && r400 < r200;
    worst = std::max(worst, r200);
    d << fmt(" %.3f:", t) << fmt("%.2e", r200) << fmt("->%.2e", r400);
  }
  return {ok, "max r0=200 residual " + fmt("%.2e;", worst) + d.str()};
}

Outcome correspondence() {
  const ConeLdos& m2 = cone(0.75, 30.0, 0.0, 2.0);
  const ConeLdos& m4 = cone(0.75, 30.0, 0.0, 4.0);
  const ConeLdos& cut = cone(0.75, 30.0, 2.5, 2.0);
  const double ratio = m2.core / m4.core;
  const double survive = cut.core / m2.core;
  const bool ok = ratio >= 5.0 && std::abs(survive - 1.0) <= 0.5;
  return {ok, fmt("M2/M4 core ratio %.3f", ratio) + fmt(" (>= 5), cut/uncut %.3f", survive) +
                  fmt(" (within 50%%); M2 %.4f", m2.core) + fmt(", M4 %.4f", m4.core) + fmt(", cut %.4f", cut.core)};
}

Outcome defect_sequence() {
  const ConeLdos& a3 = cone(0.75, 30.0, 0.0, 2.0);
  const ConeLdos& a2 = cone(0.5, 30.0, 0.0, 2.0);
  const ConeLdos& a1 = cone(0.25, 30.0, 0.0, 2.0);
  const bool ok = a2.core >= a3.core && a1.core >= a2.core;
  return {ok, fmt("core LDOS alpha 3/4 %.4f", a3.core) + fmt(", 2/4 %.4f", a2.core) + fmt(", 1/4 %.4f", a1.core) +
                  fmt("; per-site mean %.4f", a3.core_mean) + fmt(", %.4f", a2.core_mean) + fmt(", %.4f", a1.core_mean)};
}

Outcome spectral_equivalence() {
  const Pattern p = build_pattern({0.75, 14.5, 0.0});
  const SparseHermitian H = assemble_defect(p, 2.0);
  LdosRequest req;
  req.energies = {-1.0, -0.3, 0.0, 0.3, 1.0};
  const LdosGrid dense = ldos(H, req, &p);
  req.method = LdosMethod::shifted_solve;
  const LdosGrid solve = ldos(H, req, &p);
  const double rel = (dense.values - solve.values).cwiseAbs().maxCoeff() / dense.values.cwiseAbs().maxCoeff();

  std::vector<const LdosGrid*> grids{&dense, &solve};
  for (const auto& [key, c] : cone_cache) grids.push_back(&c.grid);
  double asym = 0.0, min_v = 1e300;
  for (const LdosGrid* g : grids) {
    asym = std::max(asym, g->energy_asymmetry() / g->values.maxCoeff());
    min_v = std::min(min_v, g->min_value());
  }
  const bool ok = rel < 1e-6 && asym < 1e-8 && min_v > 0.0;
  return {ok, fmt("%g sites", static_cast<double>(p.size())) + fmt(", dense vs solve rel %.2e", rel) +
                  fmt("; over %g grids: ", static_cast<double>(grids.size())) + fmt("E/-E rel %.2e", asym) +
                  fmt(", min LDOS %.3e", min_v)};
}

}  // namespace

int main() {
  run("Clifford suite", 1.0, clifford_suite);
  run("Frame and twist", 1.0, frame_twist);
  run("Bulk phase diagram", 120.0, phase_diagram);
  run("SSH toy", 1.0, ssh_toy);
  run("Assembly oracle", 60.0, assembly_oracle);
  run("Asymptotic convergence", 0.0, asymptotic_convergence);
  run("Bulk-defect correspondence", 1800.0, correspondence);
  run("Defect sequence", 0.0, defect_sequence);
  run("Spectral engine equivalence", 0.0, spectral_equivalence);

  int failed = 0;
  for (const Record& r : records) failed += !r.outcome.pass;
  std::printf("%zu criteria, %d failed\n", records.size(), failed);
  return failed ? 1 : 0;
}
