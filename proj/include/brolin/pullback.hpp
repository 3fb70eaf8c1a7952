#pragma once

#include <cstdint>
#include <vector>

#include "brolin/measure.hpp"
#include "brolin/rational_map.hpp"

namespace brolin {

struct PullbackOptions {
  std::size_t atom_budget = std::size_t{1} << 20;
  int workers = 1;
};

/// lambda_{z,m}: the d^m iterated preimages of z with equal weights.
struct PullbackResult {
  DiscreteMeasure measure;
  SpherePoint z;
  int depth = 0;
  long long atom_count = 0;    // d^m, counted with multiplicity, before merging
  double max_residual = 0.0;   // max sph_dist(R^m(atom), z)
  double condition = 1.0;      // max spherical derivative of R^m over the atoms
};

/// Next level of the preimage tree: the d preimages of each node, counted with
/// multiplicity, in tree order (children of node i occupy slots i*d .. i*d+d-1).
/// Nodes are solved independently, so the result does not depend on workers.
std::vector<SpherePoint> preimage_level(const RationalMap& R, const std::vector<SpherePoint>& level,
                                        int workers = 1, int level_index = 0);

/// True when z is safe as a base point, false when its backward orbit is
/// finite (at most two points), judged from two backward steps.
bool exceptional_check(const RationalMap& R, const SpherePoint& z);

PullbackResult pullback_measure(const RationalMap& R, const SpherePoint& z, int m, const PullbackOptions& opts = {});

/// Spherical derivative of R^m at z.
double spherical_derivative(const RationalMap& R, const SpherePoint& z, int m = 1);

struct BLOptions {
  std::size_t atom_budget = std::size_t{1} << 20;
  std::size_t w1_budget = 4'000'000;
  int workers = 1;
  int max_depth = 40;
};

struct BLStep {
  int depth;
  double gap_depth;  // w1(lambda_{z,m}, lambda_{z,m+1})
  double gap_base;   // w1(lambda_{z,m}, lambda_{z',m})
};

struct BLResult {
  DiscreteMeasure measure;  // lambda_{z,m*}
  int depth = 0;            // m*
  double gap_depth = 0.0;
  double gap_base = 0.0;
  SpherePoint z, z_witness;
  std::vector<BLStep> history;
};

/// Base point for bl_measure: uniform on the sphere from RNG stream `stream`
/// of `seed`, redrawn until it is not exceptional.
SpherePoint random_base_point(const RationalMap& R, std::uint64_t seed, std::uint64_t stream);

/// Pullback measure at the smallest depth where both the consecutive-depth
/// gap and the gap to an independently seeded base point fall below
/// 2^-n / 4. Throws BudgetExceeded carrying the best gap reached if the
/// atom or transport budget runs out first.
BLResult bl_measure(const RationalMap& R, int n, std::uint64_t seed, const BLOptions& opts = {});

struct RateFit {
  std::vector<int> depths;
  std::vector<double> distances;
  std::vector<bool> thinned;  // distance computed on subsampled measures
  double slope = 0.0;         // least squares slope of log W against m
  double constant = 0.0;      // intercept of the same fit
  double alpha = 0.0;         // exp(-slope)
  double A = 0.0;             // exp(constant)
  int fit_points = 0;
  bool ok = false;            // false when fewer than two usable points
};

struct ConvergenceOptions {
  std::size_t atom_budget = std::size_t{1} << 20;
  std::size_t w1_budget = 4'000'000;
  int workers = 1;
  std::uint64_t seed = 0;     // for thinning above the transport budget
};

/// W[m] = w1(lambda_{z,m}, lambda_{z,m_max}) for m_min <= m < m_max, fitted
/// over m <= m_max - 2.
RateFit convergence_study(const RationalMap& R, const SpherePoint& z, int m_min, int m_max,
                          const ConvergenceOptions& opts = {});

/// Least squares fit of log W against m over entries with W > 0 and m <= m_fit_max.
void fit_rate(RateFit& fit, int m_fit_max);

/// max over the first k enumerated bumps of |int phi o R dmu - int phi dmu|.
double invariance_defect(const RationalMap& R, const DiscreteMeasure& mu, int k);

struct BalancedTrial {
  bool valid = false;
  SpherePoint center;       // z_i
  double q = 0.0;           // branch-domain radius around R(z_i)
  double r = 0.0;           // Koebe ball radius around z_i
  int bumps = 0;
  double min_margin = 0.0;  // smallest bump margin used (Lipschitz constant is 1/margin)
  double defect = 0.0;
};

struct BalancedReport {
  double defect = 0.0;
  std::vector<BalancedTrial> trials;
};

/// Balancedness check through inverse branches. For each trial a center z_i
/// is drawn from the atoms of mu (rounded to a dyadic grid), q is half the
/// distance from R(z_i) to the critical values, and bumps phi supported in
/// B(z_i, q / (4|R'(z_i)|)) are tested for int phi o g dmu = d int phi dmu,
/// where g is the inverse branch through z_i. Works in the plane chart.
BalancedReport balanced_defect_report(const RationalMap& R, const DiscreteMeasure& mu, int trials,
                                      std::uint64_t seed);
double balanced_defect(const RationalMap& R, const DiscreteMeasure& mu, int trials, std::uint64_t seed);

}  // namespace brolin
