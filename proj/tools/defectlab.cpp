// defectlab: command-line front end for the conical-defect laboratory.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "defectlab/assembly.hpp"
#include "defectlab/bulk.hpp"
#include "defectlab/experiments.hpp"
#include "defectlab/pattern.hpp"
#include "defectlab/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace defectlab;

namespace {

struct GeometryArgs {
  double alpha = 0.75;
  double r_max = 30.0;
  double core_cut = 0.0;
  double d_min = 0.5;
  double d_max = 1.3;

  void attach(CLI::App* app) {
    app->add_option("--alpha", alpha, "cone parameter, a multiple of 1/4 in (0, 1]")->capture_default_str();
    app->add_option("--r-max", r_max, "outer radius in lattice constants")->capture_default_str();
    app->add_option("--core-cut", core_cut, "remove sites with radius below this")->capture_default_str();
    app->add_option("--d-min", d_min, "adjacency window lower bound")->capture_default_str();
    app->add_option("--d-max", d_max, "adjacency window upper bound")->capture_default_str();
  }

  Pattern build() const {
    Pattern p = build_pattern({alpha, r_max, core_cut}, {d_min, d_max});
    for (const auto& w : p.warnings) std::cerr << "warning: " << w << '\n';
    return p;
  }
};

json run_info_json(const RunInfo& info, const std::vector<double>& energies, double bin_width) {
  return {{"M", info.mass},           {"alpha", info.alpha},     {"r_max", info.r_max},
          {"core_cut", info.core_cut}, {"epsilon", info.epsilon}, {"method", info.method},
          {"energies", energies},      {"bin_width", bin_width},
          {"normalization", "orbital-summed Im<x|(H - E - i eps)^-1|x>, no 1/pi"}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conical lattice defects: patterns, chiral Hamiltonians, LDOS and bulk invariants"};
  app.require_subcommand(1);

  // pattern
  GeometryArgs pat_geo;
  std::string pat_out = ".";
  auto* pat = app.add_subcommand("pattern", "build a cone pattern and export sites and bonds");
  pat_geo.attach(pat);
  pat->add_option("--out", pat_out, "output directory")->capture_default_str();

  // assemble
  GeometryArgs asm_geo;
  double asm_mass = 2.0;
  std::string asm_out = ".";
  auto* assemble = app.add_subcommand("assemble", "assemble the defect Hamiltonian and dump triplets");
  asm_geo.attach(assemble);
  assemble->add_option("-M,--mass", asm_mass, "bulk mass M")->capture_default_str();
  assemble->add_option("--out", asm_out, "output directory")->capture_default_str();

  // ldos
  GeometryArgs ld_geo;
  double ld_mass = 2.0;
  LdosSettings ld;
  std::string ld_out = ".";
  auto* ldos_cmd = app.add_subcommand("ldos", "local density of states of the defect Hamiltonian");
  ld_geo.attach(ldos_cmd);
  ldos_cmd->add_option("-M,--mass", ld_mass, "bulk mass M")->capture_default_str();
  ldos_cmd->add_option("--epsilon", ld.epsilon, "resolvent broadening")->capture_default_str();
  ldos_cmd->add_option("--e-min", ld.energies.min)->capture_default_str();
  ldos_cmd->add_option("--e-max", ld.energies.max)->capture_default_str();
  ldos_cmd->add_option("--e-points", ld.energies.points)->capture_default_str();
  ldos_cmd->add_option("--method", ld.method, "dense-eig | shifted-solve")->capture_default_str();
  ldos_cmd->add_option("--bin-width", ld.bin_width, "radial bin width")->capture_default_str();
  ldos_cmd->add_option("--out", ld_out, "output directory")->capture_default_str();

  // gap-scan / winding
  double gs_mass = 4.0;
  int gs_grid = 60;
  auto* gap_cmd = app.add_subcommand("gap-scan", "minimum half-gap of the 3D bulk model on a k-grid");
  gap_cmd->add_option("-M,--mass", gs_mass, "bulk mass M")->capture_default_str();
  gap_cmd->add_option("--grid", gs_grid, "points per axis")->capture_default_str();

  double w_mass = 2.0;
  int w_grid = 40;
  auto* wind_cmd = app.add_subcommand("winding", "3D winding number of the flat-band unitary");
  wind_cmd->add_option("-M,--mass", w_mass, "bulk mass M")->capture_default_str();
  wind_cmd->add_option("--grid", w_grid, "points per axis")->capture_default_str();

  // campaign
  std::string camp_name;
  std::string camp_config;
  std::string camp_out;
  auto* camp = app.add_subcommand("campaign", "run m_sweep | core_removal | defect_sequence | phase_diagram");
  camp->add_option("name", camp_name, "campaign name")->required();
  camp->add_option("--config", camp_config, "JSON campaign configuration");
  camp->add_option("--out", camp_out, "output directory (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pat->parsed()) {
      const Pattern p = pat_geo.build();
      fs::create_directories(pat_out);
      write_pattern_csv(p, (fs::path(pat_out) / "pattern.csv").string());
      write_adjacency_csv(p, (fs::path(pat_out) / "adjacency.csv").string());
      std::size_t bonds = 0;
      for (const auto& nb : p.neighbors) bonds += nb.size();
      std::cout << json{{"sites", p.size()}, {"directed_bonds", bonds}, {"warnings", p.warnings}}.dump()
                << '\n';
    } else if (assemble->parsed()) {
      const Pattern p = asm_geo.build();
      const SparseHermitian H = assemble_defect(p, asm_mass);
      fs::create_directories(asm_out);
      H.write_triplets((fs::path(asm_out) / "operator.csv").string());
      std::cout << json{{"sites", p.size()},
                        {"dim", H.dim()},
                        {"blocks", H.block_count()},
                        {"hermiticity_defect", H.hermiticity_defect()},
                        {"chiral_defect", H.chiral_defect()}}
                       .dump()
                << '\n';
    } else if (ldos_cmd->parsed()) {
      const Pattern p = ld_geo.build();
      const SparseHermitian H = assemble_defect(p, ld_mass);
      LdosRequest req;
      req.energies = ld.energies.values();
      req.epsilon = ld.epsilon;
      req.method = parse_ldos_method(ld.method);
      LdosGrid g = ldos(H, req, &p);
      g.info.mass = ld_mass;
      fs::create_directories(ld_out);
      write_ldos_csv(g, (fs::path(ld_out) / "ldos.csv").string());
      write_radial_csv(radial_profile(g, ld.bin_width), (fs::path(ld_out) / "radial.csv").string());
      std::ofstream((fs::path(ld_out) / "ldos.json").string())
          << run_info_json(g.info, g.energies, ld.bin_width).dump(2) << '\n';
      std::cout << json{{"sites", p.size()}, {"min_ldos", g.min_value()}, {"energy_asymmetry", g.energy_asymmetry()}}
                       .dump()
                << '\n';
    } else if (gap_cmd->parsed()) {
      const double gap = gap_scan(BlochModel::torus(gs_mass), gs_grid);
      std::cout << json{{"M", gs_mass}, {"grid_n", gs_grid}, {"gap", gap}}.dump() << '\n';
    } else if (wind_cmd->parsed()) {
      const WindingResult w = winding3d(BlochModel::torus(w_mass), w_grid);
      std::cout << json{{"M", w_mass}, {"grid_n", w.grid_n}, {"raw", w.raw}, {"winding", w.rounded}}.dump()
                << '\n';
    } else if (camp->parsed()) {
      const Campaign c = parse_campaign(camp_name);
      json cfg = json::object();
      if (!camp_config.empty()) {
        std::ifstream in(camp_config);
        if (!in) throw std::runtime_error("cannot read config " + camp_config);
        cfg = json::parse(in);
      }
      ExperimentSpec spec = ExperimentSpec::from_json(cfg, c);
      if (!camp_out.empty()) spec.output_dir = camp_out;
      const CampaignResult r = run_campaign(spec);
      std::cout << "manifest: " << r.manifest << '\n';
      return r.ok() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
