#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "defectlab/spectral.hpp"

namespace defectlab {

enum class Campaign { m_sweep, core_removal, defect_sequence, phase_diagram };

Campaign parse_campaign(const std::string& name);
std::string to_string(Campaign c);

struct EnergyGrid {
  double min = -3.0;
  double max = 3.0;
  int points = 121;

  std::vector<double> values() const;
};

struct LdosSettings {
  EnergyGrid energies;
  double epsilon = 0.06;
  std::string method = "dense-eig";
  double bin_width = 1.0;
};

/// One campaign, read from a JSON document with the same field names.
struct ExperimentSpec {
  Campaign campaign = Campaign::m_sweep;
  std::vector<double> alpha{0.75};
  std::vector<double> M{4.0, 3.5, 3.0, 2.5, 2.0, 1.5};
  std::vector<double> r_max{30.0};
  double core_cut = 0.0;
  LdosSettings ldos;
  /// Radius of the disk whose zero-energy LDOS is reported per job.
  double core_radius = 5.0;
  int grid_n = 40;
  double gap_threshold = 1e-3;
  std::string output_dir = "out";

  /// Campaign defaults: the mass sweep, core removal at r_max 20/30, the
  /// alpha sequence at M = 2 and the M grid -4..4 for the phase diagram.
  static ExperimentSpec defaults(Campaign c);
  /// Missing fields keep the campaign defaults.
  static ExperimentSpec from_json(const nlohmann::json& j, Campaign c);
  nlohmann::json to_json() const;

  void validate() const;
};

struct JobResult {
  std::string label;
  nlohmann::json params;
  std::vector<std::string> files;
  nlohmann::json summary;
  bool ok = true;
  std::string error;
};

struct CampaignResult {
  Campaign campaign = Campaign::m_sweep;
  std::vector<JobResult> jobs;
  std::string manifest;

  bool ok() const;
};

/// Builds the cone, assembles H and evaluates the zero-energy core
/// summary shared by every LDOS campaign.
struct DefectRun {
  Pattern pattern;
  SparseHermitian H;
  DenseSpectrum spectrum;
};

DefectRun run_defect(double alpha, double r_max, double core_cut, double mass);

/// Zero-energy LDOS diagnostics within `core_radius`.
nlohmann::json core_summary(const LdosGrid& zero_energy, double core_radius);

CampaignResult run_m_sweep(const ExperimentSpec& spec);
CampaignResult run_core_removal(const ExperimentSpec& spec);
CampaignResult run_defect_sequence(const ExperimentSpec& spec);
CampaignResult run_phase_diagram(const ExperimentSpec& spec);
CampaignResult run_campaign(const ExperimentSpec& spec);

}  // namespace defectlab
