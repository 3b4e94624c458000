#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "defectlab/types.hpp"

namespace defectlab {

/// Cone parameters. alpha = sin(xi) is the fraction of the plane that is
/// kept; alpha = k/4 removes 4-k quadrants, alpha = 1 is the flat lattice.
struct PatternParams {
  double alpha = 0.75;
  double r_max = 30.0;
  double core_cut = 0.0;

  double sin_xi() const { return alpha; }
  double cos_xi() const;
  double xi() const;
  /// Opening of the kept sector, 2*pi*alpha.
  double sector() const { return 2.0 * pi * alpha; }
  /// Number of kept quadrants, or -1 when alpha is not a multiple of 1/4.
  int quadrants() const;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct Site {
  std::size_t id = 0;
  int n = 0;
  int m = 0;
  Vec3 position = Vec3::Zero();
  double radius = 0.0;
  double theta0 = 0.0;
};

/// Directed bond from the owning site to `to`; vec = position(to) - position(from).
struct Bond {
  std::size_t to = 0;
  Vec3 vec = Vec3::Zero();
};

/// Ordered pair (z, y) of distinct neighbors of the owning site x.
struct Plaquette {
  std::size_t z = 0;
  std::size_t y = 0;
};

/// Nearest-neighbor rule: x ~ y iff d_min <= |y - x| <= d_max.
struct AdjacencyWindow {
  double d_min = 0.5;
  double d_max = 1.3;
};

struct Pattern {
  PatternParams params;
  std::vector<Site> sites;
  std::vector<std::vector<Bond>> neighbors;
  std::vector<std::vector<Plaquette>> plaquettes;
  /// Geometry anomalies found while building (e.g. over-coordinated sites
  /// near the tip).
  std::vector<std::string> warnings;
  /// True for the flat periodic torus used as a translation-invariant
  /// reference; its wrapped bonds are minimal-image vectors.
  bool periodic = false;

  std::size_t size() const { return sites.size(); }
};

/// Asymptotic lattice frame seen far from the tip along the ray theta0.
struct Frame {
  double theta0 = 0.0;
  Vec3 a1 = Vec3::Zero();
  Vec3 a2 = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
};

/// Polar angle of (n, m) in [0, 2*pi); 0 at the origin.
double lattice_angle(int n, int m);

/// Embeds (n, m) on the cone:
///   (r a cos(t/a), r a sin(t/a), -r sqrt(1 - a^2)).
/// The angle must lie in the kept sector [0, 2*pi*alpha]; the closing ray
/// 2*pi*alpha is accepted and lands on the image of the opening ray.
Vec3 map_point(int n, int m, const PatternParams& params);

/// Enumerates, embeds and deduplicates the sites, then builds adjacency and
/// plaquettes. Requires alpha to be a multiple of 1/4.
Pattern build_pattern(const PatternParams& params, const AdjacencyWindow& window = {});

std::vector<std::vector<Bond>> build_adjacency(const Pattern& pattern,
                                               const AdjacencyWindow& window = {},
                                               std::vector<std::string>* warnings = nullptr);

std::vector<std::vector<Plaquette>> build_plaquettes(const Pattern& pattern);

Frame frame(double theta0, const PatternParams& params);

/// Flat L x L square lattice with periodic identifications (alpha = 1).
Pattern build_flat_torus(int L);

/// Z^2 neighbors of (n, m) reduced into the kept sector through the seam.
/// Used as the combinatorial reference for the geometric adjacency.
std::vector<std::pair<int, int>> seam_neighbors(int n, int m, const PatternParams& params);

/// True if (n, m) lies in the kept sector [0, 2*pi*alpha).
bool in_sector(int n, int m, int quadrants);

void write_pattern_csv(const Pattern& pattern, const std::string& path);
void write_adjacency_csv(const Pattern& pattern, const std::string& path);

}  // namespace defectlab
