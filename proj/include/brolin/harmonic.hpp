#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "brolin/julia.hpp"
#include "brolin/measure.hpp"

namespace brolin {

/// Two-sided distance estimates to a closed set K in the plane.
class CompactSetOracle {
 public:
  virtual ~CompactSetOracle() = default;
  /// dist_lower(x) <= dist(x, K).
  virtual double dist_lower(cplx x) const = 0;
  /// dist(x, K) <= dist_upper(x).
  virtual double dist_upper(cplx x) const = 0;
  /// A point of K close to x (nearest known point), if any is known.
  virtual std::optional<cplx> nearest_point(cplx x) const = 0;
  /// Radius of a disk around 0 containing K (or, for a bounded domain, the domain).
  virtual double bounding_radius() const = 0;
  /// Spacing of the known points of K; 0 when nearest_point is exact.
  virtual double resolution() const = 0;
};

/// Closed disk |z - c| <= r with exact distances.
class DiskOracle final : public CompactSetOracle {
 public:
  DiskOracle(cplx center, double radius);
  double dist_lower(cplx x) const override;
  double dist_upper(cplx x) const override { return dist_lower(x); }
  std::optional<cplx> nearest_point(cplx x) const override;
  double bounding_radius() const override { return std::abs(c_) + r_; }
  double resolution() const override { return 0.0; }

 private:
  cplx c_;
  double r_;
};

/// Filled Julia set known through an outer cell cover and an inner point
/// cloud. The lower bound uses the occupied cells adjacent to escaped cells;
/// the upper bound is the distance to the nearest cloud point.
class CoverOracle final : public CompactSetOracle {
 public:
  CoverOracle(CellCover cover, PointCloud cloud);
  ~CoverOracle() override;
  double dist_lower(cplx x) const override;
  double dist_upper(cplx x) const override;
  std::optional<cplx> nearest_point(cplx x) const override;
  double bounding_radius() const override { return cover_.M; }
  double resolution() const override { return resolution_; }
  const CellCover& cover() const { return cover_; }
  const PointCloud& cloud() const { return cloud_; }
  std::size_t boundary_cells() const;

 private:
  struct Index;
  CellCover cover_;
  PointCloud cloud_;
  std::unique_ptr<Index> index_;
  double resolution_ = 0.0;
};

/// Builds a CoverOracle for a polynomial: outer cover at cell size h and
/// budget N fitted to the filled Julia set, inner cloud of depth k.
std::unique_ptr<CoverOracle> make_julia_oracle(const RationalMap& P, double h, int N, int k, int workers = 1);

struct WalkConfig {
  double eps = 1e-3;
  long long samples = 10000;
  double r_cap = 0.0;     // 0 selects 4 M
  double r_start = 0.0;   // 0 selects 4 M
  std::uint64_t seed = 0;
  long long step_cap = 1'000'000;
  int workers = 1;
};

struct WalkSample {
  cplx stop;
  long long steps = 0;
};

/// One walk-on-spheres path from x0 (infinity starts uniformly on |z| = r_start),
/// driven only by the RNG stream (seed, index). Inside radius r_cap the walker
/// jumps to a uniform point on the circle of radius dist_lower(x) - 3 eps / 4,
/// capped at r_cap; beyond r_cap it jumps to the circle |z| = r_cap / 2 with
/// the exact exterior hitting law. It stops at the first x with
/// eps/2 < dist_lower(x) < eps.
WalkSample wos_sample(const CompactSetOracle& K, const SpherePoint& x0, const WalkConfig& cfg, std::uint64_t index);

struct HarmonicResult {
  DiscreteMeasure measure;
  std::vector<cplx> stops;         // raw stop points, by sample index
  std::vector<cplx> snapped;       // atom used per sample
  std::vector<bool> flagged;       // snap failed; stop point kept
  long long flagged_count = 0;
  double mean_steps = 0.0;
};

/// N walks from x0; stop points snapped to the nearest known point of K
/// when within 2 eps + resolution.
HarmonicResult harmonic_measure(const CompactSetOracle& K, const SpherePoint& x0, const WalkConfig& cfg);

struct CapacityResult {
  double estimate = 0.0;       // exp(mean log|snapped point|)
  double std_error = 0.0;      // delta-method standard error of the estimate
  double raw_estimate = 0.0;   // same from unsnapped stop points
  double estimate_2r = 0.0;    // rerun from 2 r_start
  double bias = 0.0;           // estimate_2r - estimate
  long long flagged_count = 0;
  double mean_steps = 0.0;
};

CapacityResult capacity(const CompactSetOracle& K, const WalkConfig& cfg, bool with_bias = true);

struct GapScale {
  double center_factor = 1.0;       // gate n centered at center_factor * 2^-n turns
  double half_width_factor = 0.25;  // half width half_width_factor * 2^-2n turns
  double gap_exponent = 8.0;        // blocked arc stops 2^(-gap_exponent n) half widths short of each end
  double tooth_fraction = 1.0 / 16; // comb tooth length as a fraction of the tooth spacing
};

struct GapDomainSpec {
  int n_lo = 1, n_hi = 1;
  std::map<int, int> open;  // n -> comb level j; absent means blocked
  GapScale scale;

  static GapDomainSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Gate geometry: the unit circle with disks D_n bulging out over the arcs
/// (c_n - w_n, c_n + w_n), each arc blocked by a solid arc or a comb.
class GapDomainOracle final : public CompactSetOracle {
 public:
  explicit GapDomainOracle(const GapDomainSpec& spec, double tau_eq = 1e-12);
  double dist_lower(cplx x) const override { return distance(x); }
  double dist_upper(cplx x) const override { return distance(x); }
  std::optional<cplx> nearest_point(cplx x) const override;
  double bounding_radius() const override { return bound_; }
  double resolution() const override { return 0.0; }

  double distance(cplx x) const;
  /// Distance from x to the outer semicircle S_n of gate n.
  double dist_to_gate_arc(cplx x, int n) const;
  bool in_domain(cplx x) const;

  struct Gate {
    int n;
    double c, w;          // turns
    cplx disk_center;
    double disk_radius;
    bool open;
    int j;
    double gap;           // blocked: end gaps, turns
    double spacing;       // open: tooth spacing, turns
    double tooth;         // open: tooth length, turns
  };
  const std::vector<Gate>& gates() const { return gates_; }

 private:
  double circle_gap_turns(double t) const;  // angular distance (turns) to K on the unit circle
  std::vector<Gate> gates_;
  double bound_ = 1.0;
};

struct GateMass {
  double mass = 0.0;
  long long hits = 0;
  long long samples = 0;
  double ci_lo = 0.0, ci_hi = 0.0;  // 95% Wilson interval
  double mean_steps = 0.0;
};

/// Fraction of walks from 0 that stop within 2 eps of S_n.
GateMass gate_mass(const GapDomainOracle& K, int n, const WalkConfig& cfg);

/// 95% Wilson score interval for k successes in n trials.
std::pair<double, double> wilson_interval(long long k, long long n);

}  // namespace brolin
