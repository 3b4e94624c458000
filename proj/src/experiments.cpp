#include "defectlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "defectlab/bulk.hpp"

namespace defectlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::size_t zero_energy_index(const std::vector<double>& energies) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < energies.size(); ++i)
    if (std::abs(energies[i]) < std::abs(energies[best])) best = i;
  return best;
}

LdosRequest make_request(const LdosSettings& s, std::vector<double> energies) {
  LdosRequest req;
  req.energies = std::move(energies);
  req.epsilon = s.epsilon;
  req.method = parse_ldos_method(s.method);
  return req;
}

LdosGrid compute_ldos(const DefectRun& run, const LdosRequest& req, double mass) {
  LdosGrid g = req.method == LdosMethod::dense_eig ? ldos_from_spectrum(run.spectrum, req, &run.pattern)
                                                    : ldos(run.H, req, &run.pattern);
  g.info.mass = mass;
  return g;
}

// Zero-energy slice of a grid.
LdosGrid energy_slice(const LdosGrid& g, std::size_t e) {
  LdosGrid out = g;
  out.energies = {g.energies[e]};
  out.values = g.values.row(static_cast<Eigen::Index>(e));
  return out;
}

json job_params(double alpha, double r_max, double core_cut, double mass, const LdosSettings& s) {
  return {{"alpha", alpha},     {"r_max", r_max},          {"core_cut", core_cut},
          {"M", mass},          {"epsilon", s.epsilon},    {"method", s.method},
          {"bin_width", s.bin_width}};
}

json run_summary(const DefectRun& run) {
  double min_abs = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < run.spectrum.eigenvalues.size(); ++i)
    min_abs = std::min(min_abs, std::abs(run.spectrum.eigenvalues(i)));
  return {{"sites", run.pattern.size()},
          {"dim", run.H.dim()},
          {"hermiticity_defect", run.H.hermiticity_defect()},
          {"chiral_defect", run.H.chiral_defect()},
          {"min_abs_eigenvalue", min_abs},
          {"warnings", run.pattern.warnings}};
}

void write_manifest(CampaignResult& result, const ExperimentSpec& spec) {
  json jobs = json::array();
  for (const JobResult& j : result.jobs)
    jobs.push_back({{"label", j.label},
                    {"params", j.params},
                    {"files", j.files},
                    {"summary", j.summary},
                    {"ok", j.ok},
                    {"error", j.error}});
  const json manifest = {{"campaign", to_string(spec.campaign)},
                         {"config", spec.to_json()},
                         {"complete", result.ok()},
                         {"jobs", jobs}};
  result.manifest = (fs::path(spec.output_dir) / "manifest.json").string();
  std::ofstream out(result.manifest);
  if (!out) throw std::runtime_error("cannot write " + result.manifest);
  out << manifest.dump(2) << '\n';
}

// Runs one job, isolating its failure.
template <typename F>
void run_job(CampaignResult& result, JobResult job, F&& body) {
  try {
    body(job);
  } catch (const std::exception& e) {
    job.ok = false;
    job.error = e.what();
    std::cerr << "job " << job.label << " failed: " << e.what() << '\n';
  }
  result.jobs.push_back(std::move(job));
}

void prepare(const ExperimentSpec& spec, Campaign expected) {
  if (spec.campaign != expected)
    throw std::invalid_argument("spec is for campaign " + to_string(spec.campaign));
  spec.validate();
  fs::create_directories(spec.output_dir);
}

}  // namespace

Campaign parse_campaign(const std::string& name) {
  if (name == "m_sweep" || name == "m-sweep") return Campaign::m_sweep;
  if (name == "core_removal" || name == "core-removal") return Campaign::core_removal;
  if (name == "defect_sequence" || name == "defect-sequence") return Campaign::defect_sequence;
  if (name == "phase_diagram" || name == "phase-diagram") return Campaign::phase_diagram;
  throw std::invalid_argument("unknown campaign '" + name + "'");
}

std::string to_string(Campaign c) {
  switch (c) {
    case Campaign::m_sweep: return "m_sweep";
    case Campaign::core_removal: return "core_removal";
    case Campaign::defect_sequence: return "defect_sequence";
    case Campaign::phase_diagram: return "phase_diagram";
  }
  return "unknown";
}

std::vector<double> EnergyGrid::values() const {
  if (points < 1) throw std::invalid_argument("energy grid needs at least one point");
  if (points == 1) return {min};
  std::vector<double> e(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) e[static_cast<std::size_t>(i)] = min + (max - min) * i / (points - 1);
  return e;
}

ExperimentSpec ExperimentSpec::defaults(Campaign c) {
  ExperimentSpec s;
  s.campaign = c;
  switch (c) {
    case Campaign::m_sweep:
      break;
    case Campaign::core_removal:
      s.M = {2.0, 4.0};
      s.r_max = {20.0, 30.0};
      s.core_cut = 2.5;
      s.ldos.energies = {0.0, 0.0, 1};
      break;
    case Campaign::defect_sequence:
      s.alpha = {0.75, 0.5, 0.25};
      s.M = {2.0};
      s.ldos.energies = {0.0, 0.0, 1};
      break;
    case Campaign::phase_diagram:
      s.M = {-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0};
      break;
  }
  return s;
}

ExperimentSpec ExperimentSpec::from_json(const json& j, Campaign c) {
  ExperimentSpec s = defaults(c);
  if (j.contains("campaign") && parse_campaign(j.at("campaign").get<std::string>()) != c)
    throw std::invalid_argument("config campaign does not match the requested campaign");
  if (j.contains("alpha")) s.alpha = j.at("alpha").get<std::vector<double>>();
  if (j.contains("M")) s.M = j.at("M").get<std::vector<double>>();
  if (j.contains("r_max")) s.r_max = j.at("r_max").get<std::vector<double>>();
  if (j.contains("core_cut")) s.core_cut = j.at("core_cut").get<double>();
  if (j.contains("core_radius")) s.core_radius = j.at("core_radius").get<double>();
  if (j.contains("grid_n")) s.grid_n = j.at("grid_n").get<int>();
  if (j.contains("gap_threshold")) s.gap_threshold = j.at("gap_threshold").get<double>();
  if (j.contains("output_dir")) s.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("ldos")) {
    const json& l = j.at("ldos");
    if (l.contains("epsilon")) s.ldos.epsilon = l.at("epsilon").get<double>();
    if (l.contains("method")) s.ldos.method = l.at("method").get<std::string>();
    if (l.contains("bin_width")) s.ldos.bin_width = l.at("bin_width").get<double>();
    if (l.contains("energies")) {
      const json& e = l.at("energies");
      if (e.contains("min")) s.ldos.energies.min = e.at("min").get<double>();
      if (e.contains("max")) s.ldos.energies.max = e.at("max").get<double>();
      if (e.contains("points")) s.ldos.energies.points = e.at("points").get<int>();
    }
  }
  return s;
}

json ExperimentSpec::to_json() const {
  return {{"campaign", to_string(campaign)},
          {"alpha", alpha},
          {"M", M},
          {"r_max", r_max},
          {"core_cut", core_cut},
          {"core_radius", core_radius},
          {"grid_n", grid_n},
          {"gap_threshold", gap_threshold},
          {"output_dir", output_dir},
          {"ldos",
           {{"energies", {{"min", ldos.energies.min}, {"max", ldos.energies.max}, {"points", ldos.energies.points}}},
            {"epsilon", ldos.epsilon},
            {"method", ldos.method},
            {"bin_width", ldos.bin_width}}}};
}

void ExperimentSpec::validate() const {
  if (alpha.empty() || M.empty() || r_max.empty())
    throw std::invalid_argument("alpha, M and r_max lists must be non-empty");
  if (campaign != Campaign::phase_diagram) {
    // Geometry is checked per job so one bad (alpha, r_max) pair does not
    // stop the rest of the campaign.
    if (!(ldos.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(ldos.bin_width > 0.0)) throw std::invalid_argument("bin_width must be positive");
    parse_ldos_method(ldos.method);
    (void)ldos.energies.values();
  } else if (grid_n < 8) {
    throw std::invalid_argument("grid_n must be at least 8");
  }
  if (output_dir.empty()) throw std::invalid_argument("output_dir must be set");
}

bool CampaignResult::ok() const {
  return std::all_of(jobs.begin(), jobs.end(), [](const JobResult& j) { return j.ok; });
}

DefectRun run_defect(double alpha, double r_max, double core_cut, double mass) {
  DefectRun run;
  run.pattern = build_pattern({alpha, r_max, core_cut});
  run.H = assemble_defect(run.pattern, mass);
  run.spectrum = dense_spectrum(run.H);
  return run;
}

json core_summary(const LdosGrid& g, double core_radius) {
  double sum = 0.0, peak = 0.0;
  std::size_t n = 0;
  for (std::size_t s = 0; s < g.site_ids.size(); ++s) {
    if (!(g.radius[s] < core_radius)) continue;
    const double v = g.values(0, static_cast<Eigen::Index>(s));
    sum += v;
    peak = std::max(peak, v);
    ++n;
  }
  return {{"E", g.energies.front()},
          {"core_radius", core_radius},
          {"integrated", sum},
          {"sites_in_core", n},
          {"mean_per_site", n ? sum / static_cast<double>(n) : 0.0},
          {"max_site", peak},
          {"total", g.values.row(0).sum()}};
}

CampaignResult run_m_sweep(const ExperimentSpec& spec) {
  prepare(spec, Campaign::m_sweep);
  CampaignResult result;
  result.campaign = spec.campaign;
  const std::vector<double> energies = spec.ldos.energies.values();
  for (double alpha : spec.alpha)
    for (double r_max : spec.r_max)
      for (double mass : spec.M) {
        JobResult job;
        job.label = "alpha" + fmt_num(alpha) + "_R" + fmt_num(r_max) + "_M" + fmt_num(mass);
        job.params = job_params(alpha, r_max, spec.core_cut, mass, spec.ldos);
        run_job(result, std::move(job), [&](JobResult& j) {
          const DefectRun run = run_defect(alpha, r_max, spec.core_cut, mass);
          const LdosGrid g = compute_ldos(run, make_request(spec.ldos, energies), mass);
          const RadialProfile prof = radial_profile(g, spec.ldos.bin_width);
          const std::string file = "radial_" + j.label + ".csv";
          write_radial_csv(prof, (fs::path(spec.output_dir) / file).string());
          j.files.push_back(file);
          j.summary = run_summary(run);
          j.summary["core"] = core_summary(energy_slice(g, zero_energy_index(energies)), spec.core_radius);
        });
      }
  write_manifest(result, spec);
  return result;
}

namespace {

CampaignResult run_site_maps(const ExperimentSpec& spec) {
  CampaignResult result;
  result.campaign = spec.campaign;
  const std::vector<double> energies = spec.ldos.energies.values();
  for (double alpha : spec.alpha)
    for (double r_max : spec.r_max)
      for (double mass : spec.M) {
        JobResult job;
        job.label = "alpha" + fmt_num(alpha) + "_R" + fmt_num(r_max) + "_M" + fmt_num(mass);
        job.params = job_params(alpha, r_max, spec.core_cut, mass, spec.ldos);
        run_job(result, std::move(job), [&](JobResult& j) {
          const DefectRun run = run_defect(alpha, r_max, spec.core_cut, mass);
          const LdosGrid g = compute_ldos(run, make_request(spec.ldos, energies), mass);
          const std::string file = "sites_" + j.label + ".csv";
          write_ldos_csv(g, (fs::path(spec.output_dir) / file).string());
          j.files.push_back(file);
          j.summary = run_summary(run);
          j.summary["core"] = core_summary(energy_slice(g, zero_energy_index(energies)), spec.core_radius);
        });
      }
  write_manifest(result, spec);
  return result;
}

}  // namespace

CampaignResult run_core_removal(const ExperimentSpec& spec) {
  prepare(spec, Campaign::core_removal);
  return run_site_maps(spec);
}

CampaignResult run_defect_sequence(const ExperimentSpec& spec) {
  prepare(spec, Campaign::defect_sequence);
  return run_site_maps(spec);
}

CampaignResult run_phase_diagram(const ExperimentSpec& spec) {
  prepare(spec, Campaign::phase_diagram);
  CampaignResult result;
  result.campaign = spec.campaign;
  json table = json::array();
  std::ofstream csv(fs::path(spec.output_dir) / "phase_diagram.csv");
  if (!csv) throw std::runtime_error("cannot write phase_diagram.csv");
  csv << "M,gap,winding,raw,skipped\n";
  for (double mass : spec.M) {
    JobResult job;
    job.label = "M" + fmt_num(mass);
    job.params = {{"M", mass}, {"grid_n", spec.grid_n}, {"gap_threshold", spec.gap_threshold}};
    run_job(result, std::move(job), [&](JobResult& j) {
      const BlochModel model = BlochModel::torus(mass);
      const double gap = gap_scan(model, spec.grid_n);
      json row = {{"M", mass}, {"gap", gap}, {"winding", nullptr}, {"raw", nullptr}, {"skipped", true}};
      char line[160];
      if (gap >= spec.gap_threshold) {
        const WindingResult w = winding3d(model, spec.grid_n, spec.gap_threshold);
        row["winding"] = w.rounded;
        row["raw"] = w.raw;
        row["skipped"] = false;
        std::snprintf(line, sizeof line, "%g,%.10e,%ld,%.10f,0\n", mass, gap, w.rounded, w.raw);
      } else {
        std::snprintf(line, sizeof line, "%g,%.10e,,,1\n", mass, gap);
      }
      csv << line;
      table.push_back(row);
      j.summary = row;
      j.files = {"phase_diagram.json", "phase_diagram.csv"};
    });
  }
  std::ofstream out(fs::path(spec.output_dir) / "phase_diagram.json");
  out << json{{"grid_n", spec.grid_n}, {"gap_threshold", spec.gap_threshold}, {"rows", table}}.dump(2)
      << '\n';
  write_manifest(result, spec);
  return result;
}

CampaignResult run_campaign(const ExperimentSpec& spec) {
  switch (spec.campaign) {
    case Campaign::m_sweep: return run_m_sweep(spec);
    case Campaign::core_removal: return run_core_removal(spec);
    case Campaign::defect_sequence: return run_defect_sequence(spec);
    case Campaign::phase_diagram: return run_phase_diagram(spec);
  }
  throw std::logic_error("unknown campaign");
}

}  // namespace defectlab
