#include "brolin/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "brolin/errors.hpp"
#include "brolin/harmonic.hpp"
#include "brolin/julia.hpp"
#include "brolin/measure.hpp"
#include "brolin/pullback.hpp"
#include "brolin/transport.hpp"

namespace brolin::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

RationalMap preset(const std::string& name, const Tolerances& tol) {
  if (name == "z2") return RationalMap::polynomial({0.0, 0.0, 1.0}, tol);
  if (name == "basilica") return RationalMap::polynomial({-1.0, 0.0, 1.0}, tol);
  if (name == "dendrite") return RationalMap::polynomial({cplx(0.0, 1.0), 0.0, 1.0}, tol);
  if (name == "chebyshev") return RationalMap::polynomial({-2.0, 0.0, 1.0}, tol);
  if (name == "siegel-like") {
    const double theta = (std::sqrt(5.0) + 1.0) / 2.0;
    return RationalMap::polynomial({0.0, std::polar(1.0, 2 * std::numbers::pi * theta), 1.0}, tol);
  }
  throw InputError("unknown preset '" + name + "' (z2, basilica, dendrite, chebyshev, siegel-like)");
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

// Settings shared by every subcommand.
struct Common {
  std::string map, preset;
  std::string out = ".";
  std::uint64_t seed = 0;
  int workers = 1;
  std::size_t budget_atoms = std::size_t{1} << 20;
  double eps = 1e-3;
  long long samples = 10000;
  double tau_eq = 1e-12, tau_root = 1e-10, tau_res = 1e-10;
};

struct Run {
  std::string command;
  json manifest;
  std::string hash;
  Common c;
  std::ostream& out;

  json meta() const { return {{"command", command}, {"config_hash", hash}, {"seed", c.seed}}; }
  std::string meta_line() const { return "# config_hash=" + hash + " seed=" + std::to_string(c.seed) + "\n"; }

  fs::path path(const std::string& name) const { return fs::path(c.out) / name; }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream f(path(name), std::ios::binary);
    if (!f) throw InputError("cannot write " + path(name).string());
    f << text;
  }
  void write_json(const std::string& name, json j) const {
    j["meta"] = meta();
    write(name, j.dump(2) + "\n");
  }

  Tolerances tolerances() const { return {c.tau_eq, c.tau_root, c.tau_res}; }

  RationalMap map() const {
    const Tolerances tol = tolerances();
    if (!c.preset.empty() && !c.map.empty()) throw InputError("give either --map or --preset, not both");
    if (!c.preset.empty()) return preset(c.preset, tol);
    if (c.map.empty()) throw InputError("no map given (use --map or --preset)");
    json j;
    try {
      if (c.map.front() == '{') {
        j = json::parse(c.map);
      } else {
        std::ifstream f(c.map);
        if (!f) throw InputError("cannot read map file " + c.map);
        j = json::parse(f);
      }
    } catch (const json::exception& e) {
      throw InputError(std::string("map JSON: ") + e.what());
    }
    if (j.contains("map")) j = j.at("map");
    return RationalMap::from_json(j, tol);
  }

  RationalMap polynomial_map(const char* what) const {
    RationalMap R = map();
    if (!R.is_polynomial()) throw InputError(std::string(what) + " requires a polynomial map");
    return R;
  }
};

SpherePoint parse_point(const std::string& s) {
  if (s == "inf" || s == "infinity") return SpherePoint::infinity();
  const auto comma = s.find(',');
  try {
    if (comma == std::string::npos) return SpherePoint(cplx(std::stod(s), 0.0));
    return SpherePoint(cplx(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))));
  } catch (const std::logic_error&) {
    throw InputError("bad point '" + s + "' (expected re,im or inf)");
  }
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

json periodic_json(const PeriodicPoint& p) {
  return {{"point", point_to_json(p.point)},
          {"period", p.period},
          {"multiplier", {p.multiplier.real(), p.multiplier.imag()}}};
}

std::string with_meta_comment(const Run& run, std::string text) {
  // PGM allows comment lines right after the magic number.
  const auto nl = text.find('\n');
  return text.substr(0, nl + 1) + run.meta_line() + text.substr(nl + 1);
}

std::string points_csv(const Run& run, const std::vector<SpherePoint>& pts) {
  std::ostringstream os;
  os << run.meta_line() << "re,im\n" << std::setprecision(17);
  for (const auto& p : pts) {
    if (p.is_infinity())
      os << "inf,\n";
    else
      os << p.value().real() << ',' << p.value().imag() << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------- commands

struct RenderOpts {
  double h = 1.0 / 256;
  int N = 15;
  int k = 12;
};

int cmd_render(const Run& run, const RenderOpts& o) {
  const RationalMap P = run.polynomial_map("render");
  const CellCover cover = filled_julia_outer_fitted(P, o.h, o.N, run.c.workers);
  JuliaInnerOptions jo;
  jo.workers = run.c.workers;
  jo.point_budget = run.c.budget_atoms;
  const PointCloud cloud = julia_inner(P, o.k, jo);
  const HausdorffReport rep = hausdorff(cover, cloud);

  run.write("outer.pgm", with_meta_comment(run, cover_to_pgm(cover)));
  run.write_json("outer.json", {{"map", P.to_json()}, {"cover", cover_to_json(cover)}});
  run.write("inner.csv", run.meta_line() + cloud_to_csv(cloud));
  run.write_json("render.json", {{"map", P.to_json()},
                                 {"h", o.h},
                                 {"N", o.N},
                                 {"k", o.k},
                                 {"escape_radius", cover.M},
                                 {"occupied_cells", cover.count()},
                                 {"cloud_points", cloud.points.size()},
                                 {"cloud_seed", periodic_json(cloud.seed)},
                                 {"cloud_max_residual", cloud.max_residual},
                                 {"critical_orbit_escapes", critical_orbit_escapes(P, o.N)},
                                 {"hausdorff",
                                  {{"distance", rep.distance},
                                   {"forward", rep.forward},
                                   {"backward", rep.backward},
                                   {"inflation", rep.inflation}}}});
  run.out << "outer cover: " << cover.count() << " cells of size " << o.h << " (N = " << o.N << ")\n"
          << "inner cloud: " << cloud.points.size() << " points (k = " << o.k << ")\n"
          << "hausdorff (spherical): " << fixed(rep.distance) << "  forward " << fixed(rep.forward)
          << "  backward " << fixed(rep.backward) << "\n";
  return kOk;
}

struct BLOpts {
  int n = 5;
  std::size_t w1_budget = 4'000'000;
};

int cmd_blmeasure(const Run& run, const BLOpts& o) {
  const RationalMap R = run.map();
  BLOptions bo;
  bo.atom_budget = run.c.budget_atoms;
  bo.w1_budget = o.w1_budget;
  bo.workers = run.c.workers;
  const BLResult res = bl_measure(R, o.n, run.c.seed, bo);
  double residual = 0.0;
  for (const auto& a : res.measure.atoms()) residual = std::max(residual, sph_dist(iterate(R, a, res.depth), res.z));
  json hist = json::array();
  for (const auto& s : res.history) hist.push_back({{"m", s.depth}, {"gap_depth", s.gap_depth}, {"gap_base", s.gap_base}});
  run.write_json("blmeasure.json", {{"map", R.to_json()},
                                    {"z", point_to_json(res.z)},
                                    {"z_witness", point_to_json(res.z_witness)},
                                    {"m", res.depth},
                                    {"n", o.n},
                                    {"residual", residual},
                                    {"seed", run.c.seed},
                                    {"gap_depth", res.gap_depth},
                                    {"gap_base", res.gap_base},
                                    {"history", hist},
                                    {"measure", measure_to_json(res.measure)}});
  run.out << "   m    W1(m, m+1)    W1(z, z')\n";
  for (const auto& s : res.history)
    run.out << std::setw(4) << s.depth << "  " << std::setw(12) << fixed(s.gap_depth) << "  " << std::setw(12)
            << fixed(s.gap_base) << "\n";
  run.out << "depth " << res.depth << ", " << res.measure.size() << " atoms, residual " << fixed(residual, 3) << "\n";
  return kOk;
}

struct W1Opts {
  std::string a, b;
  std::size_t budget_pairs = 4'000'000;
};

int cmd_w1(const Run& run, const W1Opts& o) {
  const DiscreteMeasure mu = read_measure(o.a), nu = read_measure(o.b);
  W1Options wo;
  wo.budget_pairs = o.budget_pairs;
  wo.tau_eq = run.c.tau_eq;
  const double d = w1(mu, nu, wo);
  run.write_json("w1.json", {{"a", o.a}, {"b", o.b}, {"atoms_a", mu.size()}, {"atoms_b", nu.size()}, {"distance", d}});
  run.out << "w1 = " << std::setprecision(12) << d << "\n";
  return kOk;
}

struct WalkOpts {
  double h = 1.0 / 256;
  int N = 60;
  int k = 12;
  double rstart = 0.0, rcap = 0.0;
  long long step_cap = 1'000'000;
  std::string from = "inf";
  bool no_bias = false;
};

WalkConfig walk_config(const Run& run, const WalkOpts& o) {
  WalkConfig w;
  w.eps = run.c.eps;
  w.samples = run.c.samples;
  w.r_cap = o.rcap;
  w.r_start = o.rstart;
  w.seed = run.c.seed;
  w.step_cap = o.step_cap;
  w.workers = run.c.workers;
  return w;
}

int cmd_harmonic(const Run& run, const WalkOpts& o) {
  const RationalMap P = run.polynomial_map("harmonic");
  const auto K = make_julia_oracle(P, o.h, o.N, o.k, run.c.workers);
  const SpherePoint x0 = parse_point(o.from);
  const HarmonicResult res = harmonic_measure(*K, x0, walk_config(run, o));
  // Standard error of the mean stop position.
  const double n = static_cast<double>(res.snapped.size());
  cplx mean = 0.0;
  for (cplx p : res.snapped) mean += p;
  mean /= n;
  double var = 0.0;
  for (cplx p : res.snapped) var += std::norm(p - mean);
  const double se = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
  run.write_json("harmonic.json", {{"map", P.to_json()},
                                   {"from", point_to_json(x0)},
                                   {"eps", run.c.eps},
                                   {"samples", run.c.samples},
                                   {"measure", measure_to_json(res.measure)}});
  run.write_json("harmonic_stats.json", {{"mean_steps", res.mean_steps},
                                         {"flagged_count", res.flagged_count},
                                         {"stderr", se},
                                         {"mean_point", {mean.real(), mean.imag()}},
                                         {"oracle_resolution", K->resolution()}});
  run.out << res.measure.size() << " atoms from " << run.c.samples << " walks, mean steps " << fixed(res.mean_steps)
          << ", flagged " << res.flagged_count << "\n";
  return kOk;
}

int cmd_capacity(const Run& run, const WalkOpts& o) {
  const RationalMap P = run.polynomial_map("capacity");
  const auto K = make_julia_oracle(P, o.h, o.N, o.k, run.c.workers);
  const CapacityResult c = capacity(*K, walk_config(run, o), !o.no_bias);
  json j = {{"map", P.to_json()},     {"estimate", c.estimate},         {"stderr", c.std_error},
            {"raw_estimate", c.raw_estimate}, {"flagged_count", c.flagged_count}, {"mean_steps", c.mean_steps},
            {"eps", run.c.eps},       {"samples", run.c.samples}};
  if (!o.no_bias) {
    j["estimate_2r"] = c.estimate_2r;
    j["bias"] = c.bias;
  }
  run.write_json("capacity.json", j);
  run.out << "capacity " << fixed(c.estimate, 8) << " +- " << fixed(c.std_error, 3) << " (raw " << fixed(c.raw_estimate, 8)
          << ")";
  if (!o.no_bias) run.out << ", start-radius bias " << fixed(c.bias, 3);
  run.out << "\n";
  return kOk;
}

struct ConvOpts {
  int m_min = 1, m_max = 12;
  std::string z = "random";
  std::size_t w1_budget = 4'000'000;
  bool showcase = false;
  int k = 12;
};

int cmd_convergence(const Run& run, const ConvOpts& o) {
  const RationalMap R = run.map();
  const SpherePoint z = o.z == "random" ? random_base_point(R, run.c.seed, 0) : parse_point(o.z);
  ConvergenceOptions co;
  co.atom_budget = run.c.budget_atoms;
  co.w1_budget = o.w1_budget;
  co.workers = run.c.workers;
  co.seed = run.c.seed;
  const RateFit fit = convergence_study(R, z, o.m_min, o.m_max, co);
  json table = json::array();
  for (std::size_t i = 0; i < fit.depths.size(); ++i)
    table.push_back({{"m", fit.depths[i]}, {"w1", fit.distances[i]}, {"thinned", static_cast<bool>(fit.thinned[i])}});
  run.write_json("convergence.json", {{"map", R.to_json()},
                                      {"z", point_to_json(z)},
                                      {"m_min", o.m_min},
                                      {"m_max", o.m_max},
                                      {"table", table},
                                      {"alpha", fit.alpha},
                                      {"A", fit.A},
                                      {"fit_points", fit.fit_points},
                                      {"ok", fit.ok}});
  run.out << "   m    W1(lambda_m, lambda_" << o.m_max << ")\n";
  for (std::size_t i = 0; i < fit.depths.size(); ++i)
    run.out << std::setw(4) << fit.depths[i] << "    " << fixed(fit.distances[i]) << (fit.thinned[i] ? "  (thinned)" : "")
            << "\n";
  if (fit.ok)
    run.out << "fit W ~ A alpha^-m: alpha = " << fixed(fit.alpha, 5) << ", A = " << fixed(fit.A, 5) << " over "
            << fit.fit_points << " points\n";
  else
    run.out << "fit unavailable (fewer than two usable points)\n";

  if (o.showcase) {
    PullbackOptions po;
    po.atom_budget = run.c.budget_atoms;
    po.workers = run.c.workers;
    const PullbackResult pb = pullback_measure(R, z, o.m_max, po);
    run.write("showcase_pullback.csv", points_csv(run, pb.measure.atoms()));
    JuliaInnerOptions jo;
    jo.workers = run.c.workers;
    jo.point_budget = run.c.budget_atoms;
    run.write("showcase_inner.csv", run.meta_line() + cloud_to_csv(julia_inner(R, o.k, jo)));
    run.out << "showcase: " << pb.measure.size() << " preimages of depth " << o.m_max << " written\n";
  }
  return kOk;
}

struct GapOpts {
  std::string spec;
  int gate = 1;
  int open_level = 1;
  long long step_cap = 1'000'000;
};

json gate_json(const GateMass& g) {
  return {{"mass", g.mass}, {"hits", g.hits}, {"samples", g.samples}, {"ci95", {g.ci_lo, g.ci_hi}},
          {"mean_steps", g.mean_steps}};
}

int cmd_gapdemo(const Run& run, const GapOpts& o) {
  WalkConfig w;
  w.eps = run.c.eps;
  w.samples = run.c.samples;
  w.seed = run.c.seed;
  w.step_cap = o.step_cap;
  w.workers = run.c.workers;
  if (!o.spec.empty()) {
    std::ifstream f(o.spec);
    if (!f) throw InputError("cannot read gap spec " + o.spec);
    json sj;
    try {
      sj = json::parse(f);
    } catch (const json::exception& e) {
      throw InputError(std::string("gap spec: ") + e.what());
    }
    const GapDomainSpec spec = GapDomainSpec::from_json(sj);
    const GapDomainOracle K(spec, run.c.tau_eq);
    json gates = json::object();
    for (const auto& g : K.gates()) {
      const GateMass gm = gate_mass(K, g.n, w);
      gates[std::to_string(g.n)] = gate_json(gm);
      gates[std::to_string(g.n)]["state"] = g.open ? "open" : "blocked";
      run.out << "gate " << g.n << (g.open ? " (open)   " : " (blocked)") << " mass " << fixed(gm.mass) << "  95% CI ["
              << fixed(gm.ci_lo) << ", " << fixed(gm.ci_hi) << "]\n";
    }
    run.write_json("gapdemo.json", {{"spec", spec.to_json()}, {"gates", gates}});
    return kOk;
  }
  GapDomainSpec blocked;
  blocked.n_lo = blocked.n_hi = o.gate;
  GapDomainSpec open = blocked;
  open.open[o.gate] = o.open_level;
  const GateMass mb = gate_mass(GapDomainOracle(blocked, run.c.tau_eq), o.gate, w);
  const GateMass mo = gate_mass(GapDomainOracle(open, run.c.tau_eq), o.gate, w);
  const double ratio = mb.mass > 0 ? mo.mass / mb.mass : std::numeric_limits<double>::infinity();
  const bool separated = mo.ci_lo > mb.ci_hi;
  run.write_json("gapdemo.json", {{"gate", o.gate},
                                  {"open_level", o.open_level},
                                  {"blocked", gate_json(mb)},
                                  {"open", gate_json(mo)},
                                  {"ratio", std::isfinite(ratio) ? json(ratio) : json("inf")},
                                  {"intervals_separated", separated},
                                  {"blocked_spec", blocked.to_json()},
                                  {"open_spec", open.to_json()}});
  run.out << "gate " << o.gate << " blocked: mass " << fixed(mb.mass) << "  95% CI [" << fixed(mb.ci_lo) << ", "
          << fixed(mb.ci_hi) << "]\n"
          << "gate " << o.gate << " open:    mass " << fixed(mo.mass) << "  95% CI [" << fixed(mo.ci_lo) << ", "
          << fixed(mo.ci_hi) << "]\n"
          << "ratio " << (std::isfinite(ratio) ? fixed(ratio) : std::string("inf"))
          << (separated ? ", intervals separated\n" : ", intervals overlap\n");
  return kOk;
}

struct ValidateOpts {
  std::string measure;
  int m_lo = 3, m_hi = 8;
  int k = 64;
  int trials = 32;
  double h = 1.0 / 128;
  int N = 40;
  int inner_depth = 10;
};

struct Check {
  std::string name;
  bool pass;
  json value;
  std::string detail;
};

int cmd_validate(const Run& run, const ValidateOpts& o) {
  std::vector<Check> checks;
  if (!o.measure.empty()) {
    const RawMeasure raw = read_raw_measure(o.measure);
    const std::string msg = check_raw_measure(raw, 1e-9);
    double total = 0.0;
    for (double w : raw.weights) total += w;
    checks.push_back({"measure_normalization", msg.empty(), total, msg.empty() ? "weights sum to 1" : msg});
  }

  if (!run.c.map.empty() || !run.c.preset.empty()) {
    const RationalMap R = run.map();
    if (o.m_lo < 1 || o.m_hi <= o.m_lo) throw InputError("validate: need 1 <= m-lo < m-hi");
    PullbackOptions po;
    po.atom_budget = run.c.budget_atoms;
    po.workers = run.c.workers;
    const SpherePoint z = random_base_point(R, run.c.seed, 0);
    const SpherePoint z2 = random_base_point(R, run.c.seed, 1);
    const DiscreteMeasure lo = pullback_measure(R, z, o.m_lo, po).measure;
    const DiscreteMeasure lo1 = pullback_measure(R, z, o.m_lo + 1, po).measure;
    const DiscreteMeasure lo_w = pullback_measure(R, z2, o.m_lo, po).measure;
    const PullbackResult hi = pullback_measure(R, z, o.m_hi, po);

    {
      const double d11 = w1(lo, lo), d12 = w1(lo, lo1), d21 = w1(lo1, lo), d13 = w1(lo, lo_w), d23 = w1(lo1, lo_w);
      const bool ok = d11 <= 1e-12 && d12 >= 0 && std::abs(d12 - d21) <= 1e-9 && d13 <= d12 + d23 + 1e-9;
      checks.push_back({"metric_axioms", ok, {{"d_aa", d11}, {"d_ab", d12}, {"d_ba", d21}, {"d_ac", d13}, {"d_bc", d23}},
                        "identity, symmetry and triangle inequality for w1"});
    }
    {
      const double a = invariance_defect(R, lo, o.k), b = invariance_defect(R, hi.measure, o.k);
      checks.push_back({"invariance_defect_decay", b <= a, {{"m_lo", a}, {"m_hi", b}},
                        "invariance defect does not grow from m-lo to m-hi"});
    }
    {
      const double a = balanced_defect(R, lo, o.trials, run.c.seed);
      const double b = balanced_defect(R, hi.measure, o.trials, run.c.seed);
      checks.push_back({"balanced_defect_decay", b <= a, {{"m_lo", a}, {"m_hi", b}},
                        "balanced defect does not grow from m-lo to m-hi"});
    }
    {
      const bool ok = hi.max_residual <= 1e-6;
      checks.push_back({"pullback_residual", ok, hi.max_residual, "max spherical distance of R^m(atom) to z"});
    }
    if (R.is_polynomial()) {
      const CellCover cover = filled_julia_outer_fitted(R, o.h, o.N, run.c.workers);
      JuliaInnerOptions jo;
      jo.workers = run.c.workers;
      jo.point_budget = run.c.budget_atoms;
      const PointCloud cloud = julia_inner(R, o.inner_depth, jo);
      long long bad = 0;
      for (const auto& p : cloud.points) bad += cover.contains(p) ? 0 : 1;
      checks.push_back({"sandwich", bad == 0, bad, "inner cloud points outside the inflated outer cover"});

      const CoverOracle K(cover, cloud);
      WalkConfig wc;
      wc.eps = run.c.eps;
      wc.samples = std::max<long long>(1, run.c.samples / 10);
      wc.seed = run.c.seed;
      wc.workers = run.c.workers;
      const HarmonicResult hr = harmonic_measure(K, SpherePoint::infinity(), wc);
      bad = 0;
      for (cplx s : hr.stops) {
        const double d = K.dist_lower(s);
        bad += (d > wc.eps / 2 && d < wc.eps) ? 0 : 1;
      }
      checks.push_back({"stopping_band_julia", bad == 0, bad, "walk stops outside eps/2 < dist_lower < eps"});
    }
  }

  {
    const DiskOracle D(0.0, 1.0);
    WalkConfig wc;
    wc.eps = run.c.eps;
    wc.samples = run.c.samples;
    wc.seed = run.c.seed;
    wc.workers = run.c.workers;
    const HarmonicResult hr = harmonic_measure(D, SpherePoint::infinity(), wc);
    long long bad = 0;
    for (cplx s : hr.stops) {
      const double d = std::abs(s) - 1.0;
      bad += (d > wc.eps / 2 && d < wc.eps) ? 0 : 1;
    }
    checks.push_back({"stopping_band_disk", bad == 0, bad, "walk stops outside eps/2 < dist < eps on the unit disk"});
  }

  bool all = true;
  json arr = json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"detail", c.detail}});
    run.out << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.value.dump() << "\n";
  }
  json report = {{"checks", arr}, {"pass", all}};
  if (!run.c.map.empty() || !run.c.preset.empty()) report["map"] = run.map().to_json();
  run.write_json("validate.json", report);
  return all ? kOk : kInvariant;
}

// ---------------------------------------------------------------- parsing

void add_common(CLI::App* sub, Common& c, bool needs_map) {
  if (needs_map) {
    sub->add_option("--map", c.map, "map as JSON {\"p\": [[re,im],...], \"q\": [...]} or a file holding it");
    sub->add_option("--preset", c.preset, "z2, basilica, dendrite, chebyshev or siegel-like");
  }
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--workers", c.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--budget-atoms", c.budget_atoms, "atom budget")->capture_default_str();
  sub->add_option("--eps", c.eps, "walk stopping distance")->capture_default_str();
  sub->add_option("--samples", c.samples, "walk count")->capture_default_str();
  sub->add_option("--tau-eq", c.tau_eq, "point identity tolerance")->capture_default_str();
  sub->add_option("--tau-root", c.tau_root, "preimage residual tolerance")->capture_default_str();
  sub->add_option("--tau-res", c.tau_res, "resultant floor")->capture_default_str();
}

// Options that do not change results and stay out of the manifest.
bool volatile_option(const std::string& name) { return name == "--out" || name == "--workers" || name == "--help"; }

json collect_params(const CLI::App* sub) {
  json params = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name();
    if (volatile_option(name)) continue;
    if (opt->get_expected_max() == 0) {
      params[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      params[name] = opt->results().back();
    } else if (!opt->get_default_str().empty()) {
      params[name] = opt->get_default_str();
    }
  }
  return params;
}

std::vector<std::string> manifest_args(const json& m) {
  std::vector<std::string> args{m.at("command").get<std::string>()};
  for (const auto& [name, val] : m.at("params").items()) {
    if (val.is_boolean()) {
      if (val.get<bool>()) args.push_back(name);
    } else if (name.rfind("--", 0) == 0) {
      args.push_back(name);
      args.push_back(val.get<std::string>());
    } else {
      args.push_back(val.get<std::string>());
    }
  }
  return args;
}

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Input: return kInput;
    case ErrorKind::Budget: return kBudget;
    case ErrorKind::Numeric: return kNumeric;
    case ErrorKind::Invariant: return kInvariant;
  }
  return kNumeric;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  CLI::App app{"Brolin-Lyubich measures, Julia set approximations and harmonic measure"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "brolin 1.0.0");

  Common c;
  RenderOpts ro;
  BLOpts bo;
  W1Opts wo;
  WalkOpts ho, co;
  ConvOpts cvo;
  GapOpts go;
  ValidateOpts vo;
  std::string manifest_path, replay_out = ".";
  int replay_workers = 1;

  auto* render = app.add_subcommand("render", "outer cell cover and inner point cloud of a filled Julia set");
  add_common(render, c, true);
  render->add_option("--cell", ro.h, "cell size")->capture_default_str();
  render->add_option("--N", ro.N, "escape iterations")->capture_default_str();
  render->add_option("--k", ro.k, "inner preimage depth")->capture_default_str();

  auto* bl = app.add_subcommand("blmeasure", "pullback approximation of the balanced measure to accuracy 2^-n");
  add_common(bl, c, true);
  bl->add_option("--n", bo.n, "accuracy exponent")->capture_default_str();
  bl->add_option("--budget-pairs", bo.w1_budget, "transport pair budget")->capture_default_str();

  auto* w1c = app.add_subcommand("w1", "Wasserstein-1 distance between two measure files");
  add_common(w1c, c, false);
  w1c->add_option("a", wo.a, "first measure (JSON or CSV)")->required();
  w1c->add_option("b", wo.b, "second measure (JSON or CSV)")->required();
  w1c->add_option("--budget-pairs", wo.budget_pairs, "transport pair budget")->capture_default_str();

  auto add_walk = [&](CLI::App* sub, WalkOpts& w) {
    add_common(sub, c, true);
    sub->add_option("--cell", w.h, "oracle cell size")->capture_default_str();
    sub->add_option("--N", w.N, "oracle escape iterations")->capture_default_str();
    sub->add_option("--k", w.k, "oracle inner depth")->capture_default_str();
    sub->add_option("--rstart", w.rstart, "start circle radius (0 = 4M)")->capture_default_str();
    sub->add_option("--rcap", w.rcap, "far-field radius (0 = 4M)")->capture_default_str();
    sub->add_option("--step-cap", w.step_cap, "steps per walk before giving up")->capture_default_str();
  };
  auto* harm = app.add_subcommand("harmonic", "walk-on-spheres harmonic measure of a filled Julia set");
  add_walk(harm, ho);
  harm->add_option("--from", ho.from, "start point re,im or inf")->capture_default_str();
  auto* cap = app.add_subcommand("capacity", "logarithmic capacity of a filled Julia set");
  add_walk(cap, co);
  cap->add_flag("--no-bias", co.no_bias, "skip the doubled start radius rerun");

  auto* conv = app.add_subcommand("convergence", "W1 convergence of pullback measures and rate fit");
  add_common(conv, c, true);
  conv->add_option("--m-min", cvo.m_min, "smallest depth")->capture_default_str();
  conv->add_option("--m-max", cvo.m_max, "reference depth")->capture_default_str();
  conv->add_option("--z", cvo.z, "base point re,im, inf or random")->capture_default_str();
  conv->add_option("--budget-pairs", cvo.w1_budget, "transport pair budget")->capture_default_str();
  conv->add_flag("--showcase", cvo.showcase, "also write depth m-max preimages and an inner cloud");
  conv->add_option("--k", cvo.k, "inner depth for the showcase cloud")->capture_default_str();

  auto* gap = app.add_subcommand("gapdemo", "harmonic mass of blocked and open gates");
  add_common(gap, c, false);
  gap->add_option("--gap-spec", go.spec, "gap domain JSON; default compares blocked and open at one gate");
  gap->add_option("--gate", go.gate, "gate index n")->capture_default_str();
  gap->add_option("--open-level", go.open_level, "comb level j of the open gate")->capture_default_str();
  gap->add_option("--step-cap", go.step_cap, "steps per walk before giving up")->capture_default_str();

  auto* val = app.add_subcommand("validate", "invariant checks with a JSON verdict per check");
  add_common(val, c, true);
  val->add_option("--measure", vo.measure, "measure file to check for normalization");
  val->add_option("--m-lo", vo.m_lo, "low depth")->capture_default_str();
  val->add_option("--m-hi", vo.m_hi, "high depth")->capture_default_str();
  val->add_option("--k", vo.k, "test functions for the invariance defect")->capture_default_str();
  val->add_option("--trials", vo.trials, "balanced defect trials")->capture_default_str();
  val->add_option("--cell", vo.h, "outer cover cell size")->capture_default_str();
  val->add_option("--N", vo.N, "outer cover escape iterations")->capture_default_str();
  val->add_option("--inner-depth", vo.inner_depth, "inner cloud depth")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "re-run a command from its manifest.json");
  replay->add_option("manifest", manifest_path, "manifest file")->required();
  replay->add_option("--out", replay_out, "output directory")->capture_default_str();
  replay->add_option("--workers", replay_workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInput;
  }

  if (replay->parsed()) {
    if (depth > 0) throw InputError("replay: a manifest cannot name another replay");
    std::ifstream f(manifest_path);
    if (!f) throw InputError("cannot read manifest " + manifest_path);
    json m;
    try {
      m = json::parse(f);
    } catch (const json::exception& e) {
      throw InputError(std::string("manifest: ") + e.what());
    }
    auto a = manifest_args(m);
    a.insert(a.end(), {"--out", replay_out, "--workers", std::to_string(replay_workers)});
    return dispatch(a, out, err, depth + 1);
  }

  CLI::App* sub = app.get_subcommands().front();
  json manifest = {{"command", sub->get_name()}, {"params", collect_params(sub)}};
  char hex[19];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(manifest.dump())));
  Run run{sub->get_name(), manifest, hex, c, out};
  fs::create_directories(c.out);
  json mf = manifest;
  mf["config_hash"] = run.hash;
  run.write("manifest.json", mf.dump(2) + "\n");

  if (sub == render) return cmd_render(run, ro);
  if (sub == bl) return cmd_blmeasure(run, bo);
  if (sub == w1c) return cmd_w1(run, wo);
  if (sub == harm) return cmd_harmonic(run, ho);
  if (sub == cap) return cmd_capacity(run, co);
  if (sub == conv) return cmd_convergence(run, cvo);
  if (sub == gap) return cmd_gapdemo(run, go);
  return cmd_validate(run, vo);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err, 0);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  }
}

}  // namespace brolin::cli
