#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "brolin/sphere.hpp"

namespace brolin {

class RationalMap;

/// Finitely supported probability measure on the sphere.
///
/// Always normalized: positive weights summing to 1, atoms pairwise
/// distinct at tolerance tau_eq, stored in canonical order.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  static DiscreteMeasure dirac(const SpherePoint& a);
  /// Prunes non-positive weights, merges atoms closer than tau_eq
  /// (homogeneous test) by summing their weights, and rescales to total 1.
  static DiscreteMeasure from_weighted(std::vector<SpherePoint> atoms, std::vector<double> weights,
                                       double tau_eq = 1e-12);
  static DiscreteMeasure uniform(std::vector<SpherePoint> atoms, double tau_eq = 1e-12);

  const std::vector<SpherePoint>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

 private:
  std::vector<SpherePoint> atoms_;
  std::vector<double> weights_;
};

/// Sum of w_i f(a_i).
template <class F>
double integrate(const DiscreteMeasure& mu, F&& f) {
  double acc = 0.0;
  const auto& a = mu.atoms();
  const auto& w = mu.weights();
  for (std::size_t i = 0; i < a.size(); ++i) acc += w[i] * f(a[i]);
  return acc;
}

/// Image measure under R (atoms mapped through eval).
DiscreteMeasure pushforward(const RationalMap& R, const DiscreteMeasure& mu, double tau_eq = 1e-12);

enum class ThinMode { Systematic, Iid };

/// n_target equal-weight draws from mu, deterministic in seed. Systematic
/// mode uses one random offset and evenly spaced quantiles; Iid mode draws
/// independent multinomial samples.
DiscreteMeasure thin_measure(const DiscreteMeasure& mu, int n_target, std::uint64_t seed,
                             ThinMode mode = ThinMode::Systematic, double tau_eq = 1e-12);

/// Indices grouping points that are equal within tau (homogeneous test);
/// group ids follow first occurrence in the given order.
std::vector<int> cluster_points(std::span<const SpherePoint> pts, double tau);

/// Measure file contents before normalization, as read from disk.
struct RawMeasure {
  std::vector<SpherePoint> atoms;
  std::vector<double> weights;
};

nlohmann::json measure_to_json(const DiscreteMeasure& mu);
RawMeasure raw_measure_from_json(const nlohmann::json& j);
std::string measure_to_csv(const DiscreteMeasure& mu);
RawMeasure raw_measure_from_csv(const std::string& text);

nlohmann::json point_to_json(const SpherePoint& p);
SpherePoint point_from_json(const nlohmann::json& j);

/// Reads a .json or .csv measure file without normalizing it.
RawMeasure read_raw_measure(const std::string& path);
/// Checks total mass 1 within tol and non-negative weights; returns a message on failure.
std::string check_raw_measure(const RawMeasure& raw, double tol = 1e-12);
/// Reads and validates; throws InputError naming the failed check.
DiscreteMeasure read_measure(const std::string& path);

}  // namespace brolin
