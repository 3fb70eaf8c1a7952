#include "brolin/harmonic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "brolin/errors.hpp"
#include "brolin/parallel.hpp"
#include "brolin/rng.hpp"

namespace brolin {

using std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------- disk

DiskOracle::DiskOracle(cplx center, double radius) : c_(center), r_(radius) {
  if (!(radius > 0.0)) throw InputError("disk oracle: radius must be positive");
}

double DiskOracle::dist_lower(cplx x) const { return std::max(0.0, std::abs(x - c_) - r_); }

std::optional<cplx> DiskOracle::nearest_point(cplx x) const {
  const double a = std::abs(x - c_);
  if (a <= r_) return x;
  return c_ + (x - c_) * (r_ / a);
}

// ---------------------------------------------------------------- cover

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using P2 = bg::model::point<double, 2, bg::cs::cartesian>;
using Entry = std::pair<P2, std::size_t>;

struct CoverOracle::Index {
  bgi::rtree<P2, bgi::quadratic<16>> boundary;
  bgi::rtree<Entry, bgi::quadratic<16>> cloud;
  std::vector<cplx> cloud_pts;
  std::size_t boundary_count = 0;
};

CoverOracle::CoverOracle(CellCover cover, PointCloud cloud)
    : cover_(std::move(cover)), cloud_(std::move(cloud)), index_(std::make_unique<Index>()) {
  std::vector<P2> bpts;
  const int nx = cover_.nx, ny = cover_.ny;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      if (!cover_.at(ix, iy)) continue;
      bool edge = false;
      for (int dy = -1; dy <= 1 && !edge; ++dy)
        for (int dx = -1; dx <= 1 && !edge; ++dx) {
          const int jx = ix + dx, jy = iy + dy;
          edge = jx < 0 || jy < 0 || jx >= nx || jy >= ny || !cover_.at(jx, jy);
        }
      if (edge) {
        const cplx c = cover_.cell_center(ix, iy);
        bpts.emplace_back(c.real(), c.imag());
      }
    }
  if (bpts.empty()) throw EmptySetError("cover oracle: cover has no occupied cells");
  index_->boundary_count = bpts.size();
  index_->boundary = bgi::rtree<P2, bgi::quadratic<16>>(bpts.begin(), bpts.end());

  std::vector<Entry> cpts;
  for (const auto& p : cloud_.points) {
    if (p.is_infinity()) continue;
    index_->cloud_pts.push_back(p.value());
    cpts.emplace_back(P2(p.value().real(), p.value().imag()), cpts.size());
  }
  if (cpts.empty()) throw EmptySetError("cover oracle: cloud has no finite points");
  index_->cloud = bgi::rtree<Entry, bgi::quadratic<16>>(cpts.begin(), cpts.end());

  // Worst gap between the boundary cells and the cloud, plus the cell geometry.
  double worst = 0.0;
  std::vector<Entry> hit;
  for (const auto& b : bpts) {
    hit.clear();
    index_->cloud.query(bgi::nearest(b, 1), std::back_inserter(hit));
    worst = std::max(worst, bg::distance(b, hit.front().first));
  }
  resolution_ = worst + cover_.h * std::numbers::sqrt2;
}

CoverOracle::~CoverOracle() = default;

std::size_t CoverOracle::boundary_cells() const { return index_->boundary_count; }

double CoverOracle::dist_lower(cplx x) const {
  const int ix = static_cast<int>(std::floor((x.real() - cover_.origin_re) / cover_.h));
  const int iy = static_cast<int>(std::floor((x.imag() - cover_.origin_im) / cover_.h));
  if (ix >= 0 && iy >= 0 && ix < cover_.nx && iy < cover_.ny && cover_.at(ix, iy)) return 0.0;
  std::vector<P2> hit;
  index_->boundary.query(bgi::nearest(P2(x.real(), x.imag()), 1), std::back_inserter(hit));
  const double d = bg::distance(P2(x.real(), x.imag()), hit.front());
  return std::max(0.0, d - cover_.h * std::numbers::sqrt2 / 2);
}

double CoverOracle::dist_upper(cplx x) const { return std::abs(*nearest_point(x) - x); }

std::optional<cplx> CoverOracle::nearest_point(cplx x) const {
  std::vector<Entry> hit;
  index_->cloud.query(bgi::nearest(P2(x.real(), x.imag()), 1), std::back_inserter(hit));
  return index_->cloud_pts[hit.front().second];
}

std::unique_ptr<CoverOracle> make_julia_oracle(const RationalMap& P, double h, int N, int k, int workers) {
  JuliaInnerOptions jo;
  jo.workers = workers;
  return std::make_unique<CoverOracle>(filled_julia_outer_fitted(P, h, N, workers), julia_inner(P, k, jo));
}

// ---------------------------------------------------------------- walks

namespace {

double resolve_r_cap(const CompactSetOracle& K, const WalkConfig& cfg) {
  const double M = K.bounding_radius();
  return cfg.r_cap > 0.0 ? cfg.r_cap : 4.0 * M;
}

double resolve_r_start(const CompactSetOracle& K, const WalkConfig& cfg) {
  const double M = K.bounding_radius();
  return cfg.r_start > 0.0 ? cfg.r_start : 4.0 * M;
}

void check_config(const WalkConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw InputError("walk: eps must be positive");
  if (cfg.samples < 1) throw InputError("walk: sample count must be >= 1");
  if (cfg.step_cap < 1) throw InputError("walk: step cap must be >= 1");
}

}  // namespace

WalkSample wos_sample(const CompactSetOracle& K, const SpherePoint& x0, const WalkConfig& cfg, std::uint64_t index) {
  check_config(cfg);
  const double eps = cfg.eps;
  const double r_cap = resolve_r_cap(K, cfg);
  auto rng = stream_rng(cfg.seed, index);
  cplx x;
  if (x0.is_infinity()) {
    x = std::polar(resolve_r_start(K, cfg), kTwoPi * uniform01(rng));
  } else {
    x = x0.value();
    if (!(K.dist_lower(x) > eps)) throw InputError("walk: start point is within eps of the set");
  }
  WalkSample out;
  for (long long step = 0; step < cfg.step_cap; ++step) {
    const double ax = std::abs(x);
    if (ax > r_cap) {
      // Exterior Poisson kernel of the circle |z| = rho seen from x: the
      // image of a uniform angle under the disk automorphism sending 0 to
      // rho / conj(x) after scaling.
      const double rho = r_cap / 2.0;
      const cplx a = rho / std::conj(x);
      const cplx e = std::polar(1.0, kTwoPi * uniform01(rng));
      x = rho * (e + a) / (1.0 + std::conj(a) * e);
      ++out.steps;
      continue;
    }
    const double dl = K.dist_lower(x);
    if (dl > eps / 2 && dl < eps) {
      out.stop = x;
      return out;
    }
    const double r = std::min(dl - 0.75 * eps, r_cap);
    if (!(r > 0.0)) throw Error(ErrorKind::Invariant, "walk: non-positive step radius");
    x += std::polar(r, kTwoPi * uniform01(rng));
    ++out.steps;
  }
  throw WalkBudgetExceeded("walk: step cap of " + std::to_string(cfg.step_cap) + " reached", 0);
}

namespace {

struct Batch {
  std::vector<WalkSample> samples;
  double mean_steps = 0.0;
};

Batch run_walks(const CompactSetOracle& K, const SpherePoint& x0, const WalkConfig& cfg) {
  check_config(cfg);
  Batch b;
  b.samples.resize(static_cast<std::size_t>(cfg.samples));
  std::atomic<std::size_t> first_fail{b.samples.size()};
  try {
    parallel_for(b.samples.size(), cfg.workers, [&](std::size_t i) {
      try {
        b.samples[i] = wos_sample(K, x0, cfg, static_cast<std::uint64_t>(i));
      } catch (const WalkBudgetExceeded&) {
        std::size_t cur = first_fail.load();
        while (i < cur && !first_fail.compare_exchange_weak(cur, i)) {
        }
        throw;
      }
    });
  } catch (const WalkBudgetExceeded& e) {
    const auto done = static_cast<long long>(first_fail.load());
    throw WalkBudgetExceeded(std::string(e.what()) + " after " + std::to_string(done) + " completed walks", done);
  }
  double total = 0.0;
  for (const auto& s : b.samples) total += static_cast<double>(s.steps);
  b.mean_steps = total / static_cast<double>(b.samples.size());
  return b;
}

}  // namespace

HarmonicResult harmonic_measure(const CompactSetOracle& K, const SpherePoint& x0, const WalkConfig& cfg) {
  const Batch b = run_walks(K, x0, cfg);
  HarmonicResult res;
  res.mean_steps = b.mean_steps;
  const double snap_radius = 2.0 * cfg.eps + K.resolution();
  std::vector<SpherePoint> atoms;
  atoms.reserve(b.samples.size());
  for (const auto& s : b.samples) {
    res.stops.push_back(s.stop);
    const auto near = K.nearest_point(s.stop);
    const bool ok = near && std::abs(*near - s.stop) <= snap_radius;
    res.snapped.push_back(ok ? *near : s.stop);
    res.flagged.push_back(!ok);
    res.flagged_count += ok ? 0 : 1;
    atoms.emplace_back(res.snapped.back());
  }
  res.measure = DiscreteMeasure::uniform(std::move(atoms));
  return res;
}

namespace {

struct LogStats {
  double mean_snapped = 0.0, var_snapped = 0.0, mean_raw = 0.0;
  long long flagged = 0;
  double mean_steps = 0.0;
};

LogStats capacity_pass(const CompactSetOracle& K, const WalkConfig& cfg) {
  const Batch b = run_walks(K, SpherePoint::infinity(), cfg);
  const double snap_radius = 2.0 * cfg.eps + K.resolution();
  LogStats st;
  st.mean_steps = b.mean_steps;
  std::vector<double> ls;
  ls.reserve(b.samples.size());
  double raw = 0.0;
  for (const auto& s : b.samples) {
    const auto near = K.nearest_point(s.stop);
    cplx p = s.stop;
    if (near && std::abs(*near - s.stop) <= snap_radius && std::abs(*near) > 0.0)
      p = *near;
    else
      ++st.flagged;
    ls.push_back(std::log(std::abs(p)));
    raw += std::log(std::abs(s.stop));
  }
  const double n = static_cast<double>(ls.size());
  double sum = 0.0;
  for (double v : ls) sum += v;
  st.mean_snapped = sum / n;
  double ss = 0.0;
  for (double v : ls) ss += (v - st.mean_snapped) * (v - st.mean_snapped);
  st.var_snapped = ls.size() > 1 ? ss / (n - 1.0) : 0.0;
  st.mean_raw = raw / n;
  return st;
}

}  // namespace

CapacityResult capacity(const CompactSetOracle& K, const WalkConfig& cfg, bool with_bias) {
  const double M = K.bounding_radius();
  const double r_start = resolve_r_start(K, cfg);
  const double r_cap = resolve_r_cap(K, cfg);
  if (r_start < 4.0 * M * (1 - 1e-12)) throw InputError("capacity: start radius must be at least 4 M");
  if (r_cap < 4.0 * M * (1 - 1e-12)) throw InputError("capacity: step cap radius must be at least 4 M");
  WalkConfig c = cfg;
  c.r_start = r_start;
  c.r_cap = r_cap;
  const LogStats st = capacity_pass(K, c);
  CapacityResult res;
  res.estimate = std::exp(st.mean_snapped);
  // Floor at rounding level: snapped points on a circle give zero sample variance.
  res.std_error = std::max(res.estimate * std::sqrt(st.var_snapped / static_cast<double>(cfg.samples)),
                           1e-12 * res.estimate);
  res.raw_estimate = std::exp(st.mean_raw);
  res.flagged_count = st.flagged;
  res.mean_steps = st.mean_steps;
  if (with_bias) {
    c.r_start = 2.0 * r_start;
    res.estimate_2r = std::exp(capacity_pass(K, c).mean_snapped);
    res.bias = res.estimate_2r - res.estimate;
  }
  return res;
}

// ---------------------------------------------------------------- gap domain

namespace {

double wrap_turns(double t) { return t - std::floor(t + 0.5); }  // into [-1/2, 1/2)

// Nearest point of the arc {C + r e^{i phi} : |phi - phi0| <= half}.
cplx nearest_on_arc(cplx x, cplx C, double r, double phi0, double half) {
  const cplx v = x - C;
  const double a = std::abs(v);
  if (a > 0.0) {
    const double psi = std::remainder(std::arg(v) - phi0, kTwoPi);
    if (std::abs(psi) <= half) return C + v * (r / a);
  }
  const cplx e1 = C + std::polar(r, phi0 - half), e2 = C + std::polar(r, phi0 + half);
  return std::abs(x - e1) <= std::abs(x - e2) ? e1 : e2;
}

}  // namespace

GapDomainSpec GapDomainSpec::from_json(const nlohmann::json& j) {
  GapDomainSpec s;
  try {
    if (j.contains("n_range")) {
      s.n_lo = j.at("n_range").at(0).get<int>();
      s.n_hi = j.at("n_range").at(1).get<int>();
    }
    if (j.contains("gates")) {
      for (const auto& [key, val] : j.at("gates").items()) {
        const int n = std::stoi(key);
        if (val.is_string()) {
          if (val.get<std::string>() != "blocked") throw InputError("gap spec: gate state must be \"blocked\" or {\"open\": j}");
        } else {
          s.open[n] = val.at("open").get<int>();
        }
      }
    }
    if (j.contains("scale")) {
      const auto& sc = j.at("scale");
      s.scale.center_factor = sc.value("center_factor", s.scale.center_factor);
      s.scale.half_width_factor = sc.value("half_width_factor", s.scale.half_width_factor);
      s.scale.gap_exponent = sc.value("gap_exponent", s.scale.gap_exponent);
      s.scale.tooth_fraction = sc.value("tooth_fraction", s.scale.tooth_fraction);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("gap spec: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw InputError("gap spec: gate keys must be integers");
  }
  return s;
}

nlohmann::json GapDomainSpec::to_json() const {
  nlohmann::json gates = nlohmann::json::object();
  for (int n = n_lo; n <= n_hi; ++n) {
    auto it = open.find(n);
    if (it == open.end())
      gates[std::to_string(n)] = "blocked";
    else
      gates[std::to_string(n)] = {{"open", it->second}};
  }
  return {{"n_range", {n_lo, n_hi}},
          {"gates", gates},
          {"scale",
           {{"center_factor", scale.center_factor},
            {"half_width_factor", scale.half_width_factor},
            {"gap_exponent", scale.gap_exponent},
            {"tooth_fraction", scale.tooth_fraction}}}};
}

GapDomainOracle::GapDomainOracle(const GapDomainSpec& spec, double tau_eq) {
  if (spec.n_lo < 1 || spec.n_hi < spec.n_lo) throw InputError("gap domain: need 1 <= n_lo <= n_hi");
  const double min_len = 10.0 * tau_eq;
  for (int n = spec.n_lo; n <= spec.n_hi; ++n) {
    Gate g{};
    g.n = n;
    g.c = spec.scale.center_factor * std::ldexp(1.0, -n);
    g.w = spec.scale.half_width_factor * std::ldexp(1.0, -2 * n);
    if (!(g.w > 0.0) || g.w >= 0.25) throw InputError("gap domain: gate half width must lie in (0, 1/4) turns");
    g.disk_center = std::polar(std::cos(kTwoPi * g.w), kTwoPi * g.c);
    g.disk_radius = std::sin(kTwoPi * g.w);
    auto it = spec.open.find(n);
    g.open = it != spec.open.end();
    if (g.open) {
      g.j = it->second;
      if (g.j < 0 || g.j > 20) throw InputError("gap domain: comb level must lie in [0, 20]");
      g.spacing = g.w * std::ldexp(1.0, -g.j);
      g.tooth = spec.scale.tooth_fraction * g.spacing;
      if (kTwoPi * g.tooth < min_len || kTwoPi * (g.spacing - g.tooth) < min_len)
        throw GeometryUnderflowError("gap domain: comb teeth or gaps of gate " + std::to_string(n) + " below resolution");
    } else {
      g.gap = g.w * std::pow(2.0, -spec.scale.gap_exponent * n);
      if (kTwoPi * g.gap < min_len)
        throw GeometryUnderflowError("gap domain: end gaps of gate " + std::to_string(n) + " below resolution");
    }
    gates_.push_back(g);
    bound_ = std::max(bound_, std::abs(g.disk_center) + g.disk_radius);
  }
  for (std::size_t a = 0; a < gates_.size(); ++a)
    for (std::size_t b = a + 1; b < gates_.size(); ++b) {
      const auto& A = gates_[a];
      const auto& B = gates_[b];
      if (std::abs(A.disk_center - B.disk_center) <= A.disk_radius + B.disk_radius ||
          std::abs(wrap_turns(A.c - B.c)) <= A.w + B.w)
        throw InputError("gap domain: gates " + std::to_string(A.n) + " and " + std::to_string(B.n) + " overlap");
    }
}

bool GapDomainOracle::in_domain(cplx x) const {
  if (std::abs(x) < 1.0) return true;
  for (const auto& g : gates_)
    if (std::abs(x - g.disk_center) < g.disk_radius) return true;
  return false;
}

// Signed offset (turns) from t to the nearest point of K on the unit circle.
double GapDomainOracle::circle_gap_turns(double t) const {
  for (const auto& g : gates_) {
    const double u = wrap_turns(t - g.c);  // position inside the gate, turns
    if (std::abs(u) >= g.w) continue;
    double best = (u >= 0 ? g.w - u : -g.w - u);  // to the nearer gate corner
    auto consider = [&](double lo, double hi) {
      if (u >= lo && u <= hi) {
        best = 0.0;
        return;
      }
      const double off = u < lo ? lo - u : hi - u;
      if (std::abs(off) < std::abs(best)) best = off;
    };
    if (!g.open) {
      consider(-g.w + g.gap, g.w - g.gap);
    } else {
      const long long kmax = (1LL << g.j) - 1;
      const long long k0 = static_cast<long long>(std::floor(u / g.spacing));
      for (long long k = k0 - 1; k <= k0 + 1; ++k) {
        const long long kk = std::clamp(k, -kmax, kmax);
        consider(kk * g.spacing, kk * g.spacing + g.tooth);
      }
    }
    return best;
  }
  return 0.0;
}

std::optional<cplx> GapDomainOracle::nearest_point(cplx x) const {
  if (!in_domain(x)) return x;
  const double t = std::arg(x) / kTwoPi;
  const double off = circle_gap_turns(t);
  cplx best = std::polar(1.0, kTwoPi * (t + off));
  double bd = std::abs(x - best);
  for (const auto& g : gates_) {
    const cplx p = nearest_on_arc(x, g.disk_center, g.disk_radius, kTwoPi * g.c, pi / 2);
    const double d = std::abs(x - p);
    if (d < bd) bd = d, best = p;
  }
  return best;
}

double GapDomainOracle::distance(cplx x) const {
  if (!in_domain(x)) return 0.0;
  return std::abs(x - *nearest_point(x));
}

double GapDomainOracle::dist_to_gate_arc(cplx x, int n) const {
  for (const auto& g : gates_)
    if (g.n == n) return std::abs(x - nearest_on_arc(x, g.disk_center, g.disk_radius, kTwoPi * g.c, pi / 2));
  throw InputError("gap domain: no gate " + std::to_string(n));
}

std::pair<double, double> wilson_interval(long long k, long long n) {
  if (n <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double p = static_cast<double>(k) / n, nn = static_cast<double>(n);
  const double den = 1.0 + z * z / nn;
  const double mid = (p + z * z / (2 * nn)) / den;
  const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / den;
  return {std::max(0.0, mid - half), std::min(1.0, mid + half)};
}

GateMass gate_mass(const GapDomainOracle& K, int n, const WalkConfig& cfg) {
  if (cfg.samples < 1) throw InputError("gate_mass: empty sample (N must be >= 1)");
  K.dist_to_gate_arc(cplx(0.0), n);  // validates n
  const Batch b = run_walks(K, SpherePoint(cplx(0.0)), cfg);
  GateMass gm;
  gm.samples = cfg.samples;
  for (const auto& s : b.samples)
    if (K.dist_to_gate_arc(s.stop, n) <= 2.0 * cfg.eps) ++gm.hits;
  gm.mass = static_cast<double>(gm.hits) / static_cast<double>(gm.samples);
  std::tie(gm.ci_lo, gm.ci_hi) = wilson_interval(gm.hits, gm.samples);
  gm.mean_steps = b.mean_steps;
  return gm;
}

}  // namespace brolin
