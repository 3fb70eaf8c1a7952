#include "brolin/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "brolin/errors.hpp"
#include "brolin/rational_map.hpp"
#include "brolin/rng.hpp"

namespace brolin {
namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(k.x));
    h = splitmix64(h ^ static_cast<std::uint64_t>(k.y));
    return static_cast<std::size_t>(splitmix64(h ^ static_cast<std::uint64_t>(k.z)));
  }
};

CellKey key_of(const std::array<double, 3>& v, double cell) {
  return {static_cast<std::int64_t>(std::floor(v[0] / cell)), static_cast<std::int64_t>(std::floor(v[1] / cell)),
          static_cast<std::int64_t>(std::floor(v[2] / cell))};
}

}  // namespace

std::vector<int> cluster_points(std::span<const SpherePoint> pts, double tau) {
  std::vector<int> group(pts.size(), -1);
  if (tau <= 0.0) {
    std::iota(group.begin(), group.end(), 0);
    return group;
  }
  // same_point(a, b, tau) implies chordal distance <= 2 tau for canonical
  // representatives, so a 3-D grid of that cell size finds every partner.
  const double cell = 2.0 * tau;
  std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
  std::vector<int> reps;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto v = pts[i].to_unit_vector();
    const auto k = key_of(v, cell);
    int found = -1;
    for (int dx = -1; dx <= 1 && found < 0; ++dx)
      for (int dy = -1; dy <= 1 && found < 0; ++dy)
        for (int dz = -1; dz <= 1 && found < 0; ++dz) {
          auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
          if (it == grid.end()) continue;
          for (int r : it->second)
            if (same_point(pts[reps[r]], pts[i], tau)) {
              found = r;
              break;
            }
        }
    if (found < 0) {
      found = static_cast<int>(reps.size());
      reps.push_back(static_cast<int>(i));
      grid[k].push_back(found);
    }
    group[i] = found;
  }
  return group;
}

DiscreteMeasure DiscreteMeasure::dirac(const SpherePoint& a) {
  DiscreteMeasure m;
  m.atoms_ = {a};
  m.weights_ = {1.0};
  return m;
}

DiscreteMeasure DiscreteMeasure::from_weighted(std::vector<SpherePoint> atoms, std::vector<double> weights,
                                               double tau_eq) {
  if (atoms.size() != weights.size()) throw InputError("measure: atoms and weights differ in length");
  std::vector<std::size_t> order;
  order.reserve(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(weights[i])) throw InputError("measure: non-finite weight");
    if (weights[i] > 0.0) order.push_back(i);
  }
  if (order.empty()) throw InputError("measure: no atom with positive weight");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return canonical_less(atoms[a], atoms[b]); });
  std::vector<SpherePoint> sorted;
  sorted.reserve(order.size());
  for (auto i : order) sorted.push_back(atoms[i]);
  const auto group = cluster_points(sorted, tau_eq);
  const int ng = group.empty() ? 0 : *std::max_element(group.begin(), group.end()) + 1;

  DiscreteMeasure m;
  m.atoms_.resize(ng);
  m.weights_.assign(ng, 0.0);
  std::vector<bool> seen(ng, false);
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const int g = group[k];
    if (!seen[g]) {
      m.atoms_[g] = sorted[k];
      seen[g] = true;
    }
    m.weights_[g] += weights[order[k]];
  }
  // Representatives are the canonical-first member; keep canonical order.
  std::vector<int> idx(ng);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return canonical_less(m.atoms_[a], m.atoms_[b]); });
  std::vector<SpherePoint> a2;
  std::vector<double> w2;
  a2.reserve(ng);
  w2.reserve(ng);
  for (int i : idx) {
    a2.push_back(m.atoms_[i]);
    w2.push_back(m.weights_[i]);
  }
  double total = 0.0;
  for (double w : w2) total += w;
  for (double& w : w2) w /= total;
  m.atoms_ = std::move(a2);
  m.weights_ = std::move(w2);
  return m;
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<SpherePoint> atoms, double tau_eq) {
  std::vector<double> w(atoms.size(), 1.0);
  return from_weighted(std::move(atoms), std::move(w), tau_eq);
}

DiscreteMeasure pushforward(const RationalMap& R, const DiscreteMeasure& mu, double tau_eq) {
  std::vector<SpherePoint> img;
  img.reserve(mu.size());
  for (const auto& a : mu.atoms()) img.push_back(eval(R, a));
  return DiscreteMeasure::from_weighted(std::move(img), mu.weights(), tau_eq);
}

DiscreteMeasure thin_measure(const DiscreteMeasure& mu, int n_target, std::uint64_t seed, ThinMode mode,
                             double tau_eq) {
  if (n_target < 1) throw InputError("thin_measure: n_target must be >= 1");
  if (mu.empty()) throw InputError("thin_measure: empty measure");
  std::vector<double> cdf(mu.size());
  std::partial_sum(mu.weights().begin(), mu.weights().end(), cdf.begin());
  cdf.back() = 1.0;
  auto pick = [&](double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
  };
  auto rng = stream_rng(seed, 0x7417);
  std::vector<SpherePoint> draws;
  draws.reserve(n_target);
  if (mode == ThinMode::Systematic) {
    const double offset = uniform01(rng);
    for (int i = 0; i < n_target; ++i) draws.push_back(mu.atoms()[pick((i + offset) / n_target)]);
  } else {
    for (int i = 0; i < n_target; ++i) draws.push_back(mu.atoms()[pick(uniform01(rng))]);
  }
  return DiscreteMeasure::uniform(std::move(draws), tau_eq);
}

nlohmann::json point_to_json(const SpherePoint& p) {
  if (p.is_infinity()) return "inf";
  const cplx z = p.value();
  return nlohmann::json::array({z.real(), z.imag()});
}

SpherePoint point_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return SpherePoint::infinity();
    throw InputError("point JSON: unknown string '" + j.get<std::string>() + "'");
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return SpherePoint(cplx(j[0].get<double>(), j[1].get<double>()));
  if (j.is_number()) return SpherePoint(cplx(j.get<double>(), 0.0));
  throw InputError("point JSON: expected [re, im] or \"inf\"");
}

nlohmann::json measure_to_json(const DiscreteMeasure& mu) {
  nlohmann::json atoms = nlohmann::json::array(), weights = nlohmann::json::array();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    atoms.push_back(point_to_json(mu.atoms()[i]));
    weights.push_back(mu.weights()[i]);
  }
  return {{"atoms", atoms}, {"weights", weights}};
}

RawMeasure raw_measure_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j.contains("weights"))
    throw InputError("measure JSON: expected {\"atoms\": [...], \"weights\": [...]}");
  RawMeasure raw;
  for (const auto& a : j.at("atoms")) raw.atoms.push_back(point_from_json(a));
  for (const auto& w : j.at("weights")) {
    if (!w.is_number()) throw InputError("measure JSON: weight is not a number");
    raw.weights.push_back(w.get<double>());
  }
  if (raw.atoms.size() != raw.weights.size()) throw InputError("measure JSON: atoms and weights differ in length");
  return raw;
}

std::string measure_to_csv(const DiscreteMeasure& mu) {
  std::ostringstream os;
  os.precision(17);
  os << "re,im,weight\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto& a = mu.atoms()[i];
    if (a.is_infinity())
      os << "inf,," << mu.weights()[i] << "\n";
    else
      os << a.value().real() << "," << a.value().imag() << "," << mu.weights()[i] << "\n";
  }
  return os.str();
}

RawMeasure raw_measure_from_csv(const std::string& text) {
  RawMeasure raw;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("re", 0) == 0) continue;
    }
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (cols.size() != 3) throw InputError("measure CSV: expected 3 columns in '" + line + "'");
    try {
      raw.weights.push_back(std::stod(cols[2]));
      if (cols[0] == "inf")
        raw.atoms.push_back(SpherePoint::infinity());
      else
        raw.atoms.emplace_back(cplx(std::stod(cols[0]), std::stod(cols[1])));
    } catch (const std::logic_error&) {
      throw InputError("measure CSV: bad number in '" + line + "'");
    }
  }
  return raw;
}

RawMeasure read_raw_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open measure file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const bool is_csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
  if (is_csv) return raw_measure_from_csv(text);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("measure file '" + path + "': " + e.what());
  }
  return raw_measure_from_json(j.contains("measure") ? j.at("measure") : j);
}

std::string check_raw_measure(const RawMeasure& raw, double tol) {
  if (raw.atoms.empty()) return "measure has no atoms";
  double total = 0.0;
  for (double w : raw.weights) {
    if (!(w >= 0.0)) return "negative or non-finite weight";
    total += w;
  }
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << ", not 1";
    return os.str();
  }
  return {};
}

DiscreteMeasure read_measure(const std::string& path) {
  auto raw = read_raw_measure(path);
  if (auto msg = check_raw_measure(raw); !msg.empty()) throw InputError("measure_normalization: " + msg);
  return DiscreteMeasure::from_weighted(std::move(raw.atoms), std::move(raw.weights));
}

}  // namespace brolin
