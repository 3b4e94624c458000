#include "defectlab/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace defectlab {

namespace {

// Quarter-plane index with half-open boundaries: 0 holds the positive
// x-axis, 1 the positive y-axis, and so on. The origin belongs to 0.
int quadrant(int n, int m) {
  if (n > 0 && m >= 0) return 0;
  if (n <= 0 && m > 0) return 1;
  if (n < 0 && m <= 0) return 2;
  if (n >= 0 && m < 0) return 3;
  return 0;
}

std::pair<int, int> rotate_quarter(int n, int m, int turns) {
  turns = ((turns % 4) + 4) % 4;
  for (int t = 0; t < turns; ++t) {
    const int tmp = n;
    n = -m;
    m = tmp;
  }
  return {n, m};
}

class SpatialHash {
 public:
  explicit SpatialHash(double cell) : cell_(cell) {}

  void insert(std::size_t id, const Vec3& p) { cells_[key(p, 0, 0, 0)].push_back(id); }

  template <typename F>
  void for_each_near(const Vec3& p, F&& f) const {
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key(p, dx, dy, dz));
          if (it == cells_.end()) continue;
          for (std::size_t id : it->second) f(id);
        }
  }

 private:
  std::int64_t key(const Vec3& p, int dx, int dy, int dz) const {
    const auto c = [&](double v, int d) {
      return static_cast<std::int64_t>(std::floor(v / cell_)) + d + (1 << 20);
    };
    return (c(p.x(), dx) << 42) | (c(p.y(), dy) << 21) | c(p.z(), dz);
  }

  double cell_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> cells_;
};

}  // namespace

double PatternParams::cos_xi() const { return std::sqrt(std::max(0.0, 1.0 - alpha * alpha)); }

double PatternParams::xi() const { return std::asin(alpha); }

int PatternParams::quadrants() const {
  const double k = 4.0 * alpha;
  const double r = std::round(k);
  return std::abs(k - r) < 1e-12 ? static_cast<int>(r) : -1;
}

void PatternParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(r_max > 0.0)) throw std::invalid_argument("r_max must be positive");
  if (!(core_cut >= 0.0)) throw std::invalid_argument("core_cut must be non-negative");
  if (!(core_cut < r_max)) throw std::invalid_argument("core_cut must be below r_max");
}

bool in_sector(int n, int m, int quadrants) { return quadrant(n, m) < quadrants; }

double lattice_angle(int n, int m) {
  if (n == 0 && m == 0) return 0.0;
  double t = std::atan2(static_cast<double>(m), static_cast<double>(n));
  if (t < 0.0) t += 2.0 * pi;
  return t;
}

Vec3 map_point(int n, int m, const PatternParams& params) {
  if (!(params.alpha > 0.0 && params.alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1]");
  const double r = std::hypot(static_cast<double>(n), static_cast<double>(m));
  const double theta = lattice_angle(n, m);
  if (theta > params.sector() + 1e-12)
    throw std::domain_error("lattice point lies in the removed sector");
  const double a = params.alpha;
  const double phi = theta / a;
  return {r * a * std::cos(phi), r * a * std::sin(phi), -r * params.cos_xi()};
}

std::vector<std::pair<int, int>> seam_neighbors(int n, int m, const PatternParams& params) {
  const int k = params.quadrants();
  if (k < 1) throw std::invalid_argument("alpha must be a multiple of 1/4");
  static constexpr int steps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::vector<std::pair<int, int>> out;
  for (const auto& s : steps) {
    const int pn = n + s[0];
    const int pm = m + s[1];
    if (in_sector(pn, pm, k)) {
      out.emplace_back(pn, pm);
      continue;
    }
    // Crossing the seam. A step below the opening ray (theta = 0) re-enters
    // through the closing ray, so it is rotated forward by the opening;
    // a step past the closing ray is rotated back.
    const bool below_opening = n > 0 && m >= 0 && pm < 0;
    const auto q = rotate_quarter(pn, pm, below_opening ? k : -k);
    if (in_sector(q.first, q.second, k)) out.push_back(q);
  }
  return out;
}

std::vector<std::vector<Bond>> build_adjacency(const Pattern& pattern, const AdjacencyWindow& window,
                                               std::vector<std::string>* warnings) {
  if (!(window.d_min >= 0.0 && window.d_max > window.d_min))
    throw std::invalid_argument("adjacency window must satisfy 0 <= d_min < d_max");

  SpatialHash hash(window.d_max);
  for (const Site& s : pattern.sites) hash.insert(s.id, s.position);

  std::vector<std::vector<Bond>> adj(pattern.size());
  std::size_t over = 0;
  std::size_t max_deg = 0;
  double max_r = 0.0;
  for (const Site& s : pattern.sites) {
    auto& list = adj[s.id];
    hash.for_each_near(s.position, [&](std::size_t j) {
      if (j == s.id) return;
      const Vec3 d = pattern.sites[j].position - s.position;
      const double len = d.norm();
      if (len >= window.d_min && len <= window.d_max) list.push_back({j, d});
    });
    std::sort(list.begin(), list.end(), [](const Bond& a, const Bond& b) { return a.to < b.to; });
    if (list.size() > 4) {
      ++over;
      max_deg = std::max(max_deg, list.size());
      max_r = std::max(max_r, s.radius);
    }
  }
  if (over > 0 && warnings) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%zu sites have more than 4 neighbors (max %zu, outermost at radius %.3f)", over,
                  max_deg, max_r);
    warnings->emplace_back(buf);
  }
  return adj;
}

std::vector<std::vector<Plaquette>> build_plaquettes(const Pattern& pattern) {
  std::vector<std::vector<Plaquette>> out(pattern.size());
  for (std::size_t x = 0; x < pattern.size(); ++x) {
    const auto& nb = pattern.neighbors[x];
    auto& list = out[x];
    list.reserve(nb.size() * (nb.size() > 0 ? nb.size() - 1 : 0));
    for (const Bond& z : nb)
      for (const Bond& y : nb)
        if (z.to != y.to) list.push_back({z.to, y.to});
  }
  return out;
}

Pattern build_pattern(const PatternParams& params, const AdjacencyWindow& window) {
  params.validate();
  const int k = params.quadrants();
  if (k < 1) throw std::invalid_argument("alpha must be a multiple of 1/4");
  if (params.r_max < 1.0) throw std::invalid_argument("r_max < 1 yields a degenerate pattern");

  Pattern p;
  p.params = params;

  const int bound = static_cast<int>(std::floor(params.r_max));
  const double rmax2 = params.r_max * params.r_max;
  const double cut2 = params.core_cut * params.core_cut;
  struct Candidate {
    long r2;
    double theta;
    int n;
    int m;
  };
  std::vector<Candidate> cand;
  for (int n = -bound; n <= bound; ++n)
    for (int m = -bound; m <= bound; ++m) {
      const long r2 = static_cast<long>(n) * n + static_cast<long>(m) * m;
      if (r2 > rmax2 || r2 < cut2) continue;
      if (!in_sector(n, m, k)) continue;
      cand.push_back({r2, lattice_angle(n, m), n, m});
    }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    if (a.r2 != b.r2) return a.r2 < b.r2;
    if (a.theta != b.theta) return a.theta < b.theta;
    if (a.n != b.n) return a.n < b.n;
    return a.m < b.m;
  });

  SpatialHash dedup(0.5);
  std::size_t dropped = 0;
  for (const Candidate& c : cand) {
    Site s;
    s.n = c.n;
    s.m = c.m;
    s.position = map_point(c.n, c.m, params);
    s.radius = std::sqrt(static_cast<double>(c.r2));
    s.theta0 = c.theta;
    bool dup = false;
    dedup.for_each_near(s.position, [&](std::size_t j) {
      if ((p.sites[j].position - s.position).norm() < 1e-6) dup = true;
    });
    if (dup) {
      ++dropped;
      continue;
    }
    s.id = p.sites.size();
    dedup.insert(s.id, s.position);
    p.sites.push_back(s);
  }
  if (dropped > 0)
    p.warnings.push_back(std::to_string(dropped) + " coincident images removed at the seam");
  if (p.sites.empty()) throw std::invalid_argument("pattern is empty");

  p.neighbors = build_adjacency(p, window, &p.warnings);
  p.plaquettes = build_plaquettes(p);
  return p;
}

Frame frame(double theta0, const PatternParams& params) {
  const double s = params.sin_xi();
  const double c = params.cos_xi();
  const double phi = theta0 / params.alpha;
  const double ct = std::cos(theta0), st = std::sin(theta0);
  const double cp = std::cos(phi), sp = std::sin(phi);
  Frame f;
  f.theta0 = theta0;
  f.a1 = Vec3(s * ct * cp + st * sp, s * ct * sp - st * cp, -c * ct);
  f.a2 = Vec3(s * st * cp - ct * sp, s * st * sp + ct * cp, -c * st);
  f.normal = f.a1.cross(f.a2);
  return f;
}

Pattern build_flat_torus(int L) {
  if (L < 3) throw std::invalid_argument("torus side must be at least 3");
  Pattern p;
  p.params = PatternParams{1.0, static_cast<double>(L), 0.0};
  p.periodic = true;
  const auto idx = [L](int n, int m) {
    return static_cast<std::size_t>(((n % L + L) % L) * L + ((m % L + L) % L));
  };
  for (int n = 0; n < L; ++n)
    for (int m = 0; m < L; ++m) {
      Site s;
      s.id = idx(n, m);
      s.n = n;
      s.m = m;
      s.position = Vec3(n, m, 0.0);
      s.radius = std::hypot(n, m);
      s.theta0 = lattice_angle(n, m);
      p.sites.push_back(s);
    }
  p.neighbors.resize(p.sites.size());
  for (const Site& s : p.sites) {
    static constexpr int steps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& d : steps)
      p.neighbors[s.id].push_back({idx(s.n + d[0], s.m + d[1]), Vec3(d[0], d[1], 0.0)});
    std::sort(p.neighbors[s.id].begin(), p.neighbors[s.id].end(),
              [](const Bond& a, const Bond& b) { return a.to < b.to; });
  }
  p.plaquettes = build_plaquettes(p);
  return p;
}

void write_pattern_csv(const Pattern& pattern, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "id,n,m,x,y,z,radius,theta0\n";
  char buf[256];
  for (const Site& s : pattern.sites) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g\n", s.id, s.n, s.m,
                  s.position.x(), s.position.y(), s.position.z(), s.radius, s.theta0);
    out << buf;
  }
}

void write_adjacency_csv(const Pattern& pattern, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "id_from,id_to,ex,ey,ez\n";
  char buf[256];
  for (std::size_t x = 0; x < pattern.size(); ++x)
    for (const Bond& b : pattern.neighbors[x]) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.12g,%.12g,%.12g\n", x, b.to, b.vec.x(), b.vec.y(),
                    b.vec.z());
      out << buf;
    }
}

}  // namespace defectlab
