#include "brolin/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "brolin/errors.hpp"
#include "brolin/parallel.hpp"
#include "brolin/rng.hpp"
#include "brolin/test_function.hpp"
#include "brolin/transport.hpp"

namespace brolin {

std::vector<SpherePoint> preimage_level(const RationalMap& R, const std::vector<SpherePoint>& level, int workers,
                                        int level_index) {
  const std::size_t d = static_cast<std::size_t>(R.degree());
  std::vector<SpherePoint> out(level.size() * d);
  parallel_for(level.size(), workers, [&](std::size_t i) {
    std::vector<SpherePoint> pre;
    try {
      pre = preimages(R, level[i]);
    } catch (const RootConvergenceError& e) {
      throw RootConvergenceError(std::string(e.what()) + " (preimage tree level " + std::to_string(level_index + 1) +
                                 ", node " + std::to_string(i) + ")");
    }
    std::copy(pre.begin(), pre.end(), out.begin() + static_cast<std::ptrdiff_t>(i * d));
  });
  return out;
}

bool exceptional_check(const RationalMap& R, const SpherePoint& z) {
  std::vector<SpherePoint> pts{z};
  const auto first = preimages(R, z);
  pts.insert(pts.end(), first.begin(), first.end());
  for (const auto& p : first) {
    const auto second = preimages(R, p);
    pts.insert(pts.end(), second.begin(), second.end());
  }
  // A coarse merge radius errs toward reporting the point as exceptional.
  const auto group = cluster_points(pts, 1e-8);
  const int distinct = *std::max_element(group.begin(), group.end()) + 1;
  return distinct > 2;
}

double spherical_derivative(const RationalMap& R, const SpherePoint& z, int m) {
  double acc = 1.0;
  SpherePoint x = z;
  for (int k = 0; k < m; ++k) {
    const SpherePoint y = eval(R, x);
    const int ci = chart_of(x), co = chart_of(y);
    const cplx xc = ci == 0 ? x.value() : x.inverse_value();
    const cplx yc = co == 0 ? y.value() : y.inverse_value();
    acc *= std::abs(derivative_in_charts(R, x, ci, co)) * (1.0 + std::norm(xc)) / (1.0 + std::norm(yc));
    x = y;
  }
  return acc;
}

namespace {

void check_atom_budget(const RationalMap& R, int m, std::size_t budget, double best_gap = -1.0) {
  const double atoms = std::pow(static_cast<double>(R.degree()), m);
  if (atoms > static_cast<double>(budget))
    throw BudgetExceeded("pullback: d^m = " + std::to_string(static_cast<long long>(atoms)) +
                             " atoms exceeds the budget of " + std::to_string(budget),
                         best_gap);
}

std::vector<SpherePoint> build_level(const RationalMap& R, const SpherePoint& z, int m, int workers) {
  std::vector<SpherePoint> level{z};
  for (int k = 0; k < m; ++k) level = preimage_level(R, level, workers, k);
  return level;
}

}  // namespace

PullbackResult pullback_measure(const RationalMap& R, const SpherePoint& z, int m, const PullbackOptions& opts) {
  if (m < 0) throw InputError("pullback: depth must be >= 0");
  if (!exceptional_check(R, z)) throw ExceptionalPointError("pullback: base point is exceptional");
  check_atom_budget(R, m, opts.atom_budget);
  const auto level = build_level(R, z, m, opts.workers);

  std::vector<double> resid(level.size()), cond(level.size());
  parallel_for(level.size(), opts.workers, [&](std::size_t i) {
    resid[i] = sph_dist(iterate(R, level[i], m), z);
    cond[i] = spherical_derivative(R, level[i], m);
  });

  PullbackResult res;
  res.z = z;
  res.depth = m;
  res.atom_count = static_cast<long long>(level.size());
  res.max_residual = resid.empty() ? 0.0 : *std::max_element(resid.begin(), resid.end());
  res.condition = cond.empty() ? 1.0 : *std::max_element(cond.begin(), cond.end());
  res.measure = DiscreteMeasure::uniform(level, R.tolerances().eq);
  return res;
}

SpherePoint random_base_point(const RationalMap& R, std::uint64_t seed, std::uint64_t stream) {
  auto rng = stream_rng(seed, stream);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    // Uniform on the unit sphere (Archimedes), then stereographic projection
    // from the north pole.
    const double t = 2.0 * uniform01(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    if (t >= 1.0) continue;
    const SpherePoint p(cplx(s * std::cos(phi), s * std::sin(phi)) / (1.0 - t));
    if (exceptional_check(R, p)) return p;
  }
  throw ExceptionalPointError("bl_measure: could not draw a non-exceptional base point");
}

BLResult bl_measure(const RationalMap& R, int n, std::uint64_t seed, const BLOptions& opts) {
  if (n < 1) throw InputError("bl_measure: precision n must be >= 1");
  const double target = std::ldexp(1.0, -n) / 4.0;
  const double tau = R.tolerances().eq;
  W1Options wo;
  wo.budget_pairs = opts.w1_budget;
  wo.tau_eq = tau;

  BLResult res;
  res.z = random_base_point(R, seed, 0);
  res.z_witness = random_base_point(R, seed, 1);
  std::vector<SpherePoint> lz{res.z}, lw{res.z_witness};
  DiscreteMeasure mz = DiscreteMeasure::dirac(res.z), mw = DiscreteMeasure::dirac(res.z_witness);
  double best = std::numeric_limits<double>::infinity();

  for (int m = 0; m <= opts.max_depth; ++m) {
    check_atom_budget(R, m + 1, opts.atom_budget, best);
    auto next = preimage_level(R, lz, opts.workers, m);
    auto mnext = DiscreteMeasure::uniform(next, tau);
    double gd, gb;
    try {
      gd = w1(mz, mnext, wo);
      gb = w1(mz, mw, wo);
    } catch (const BudgetExceeded& e) {
      throw BudgetExceeded(std::string("bl_measure: ") + e.what(), best);
    }
    res.history.push_back({m, gd, gb});
    best = std::min(best, std::max(gd, gb));
    if (gd < target && gb < target) {
      res.measure = std::move(mz);
      res.depth = m;
      res.gap_depth = gd;
      res.gap_base = gb;
      return res;
    }
    lz = std::move(next);
    mz = std::move(mnext);
    lw = preimage_level(R, lw, opts.workers, m);
    mw = DiscreteMeasure::uniform(lw, tau);
  }
  throw BudgetExceeded("bl_measure: maximum depth reached before the gaps closed", best);
}

void fit_rate(RateFit& fit, int m_fit_max) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (std::size_t i = 0; i < fit.depths.size(); ++i) {
    if (fit.depths[i] > m_fit_max || !(fit.distances[i] > 0.0)) continue;
    const double x = fit.depths[i], y = std::log(fit.distances[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++k;
  }
  fit.fit_points = k;
  fit.ok = false;
  if (k < 2) return;
  const double den = k * sxx - sx * sx;
  if (den == 0.0) return;
  fit.slope = (k * sxy - sx * sy) / den;
  fit.constant = (sy - fit.slope * sx) / k;
  fit.alpha = std::exp(-fit.slope);
  fit.A = std::exp(fit.constant);
  fit.ok = true;
}

RateFit convergence_study(const RationalMap& R, const SpherePoint& z, int m_min, int m_max,
                          const ConvergenceOptions& opts) {
  if (m_min < 0 || m_max < m_min) throw InputError("convergence_study: need 0 <= m_min <= m_max");
  RateFit fit;
  if (m_min == m_max) return fit;
  if (!exceptional_check(R, z)) throw ExceptionalPointError("convergence_study: base point is exceptional");
  check_atom_budget(R, m_max, opts.atom_budget);

  const double tau = R.tolerances().eq;
  std::vector<DiscreteMeasure> measures;
  std::vector<SpherePoint> level{z};
  for (int m = 0; m <= m_max; ++m) {
    if (m >= m_min) measures.push_back(DiscreteMeasure::uniform(level, tau));
    if (m < m_max) level = preimage_level(R, level, opts.workers, m);
  }
  const DiscreteMeasure& top = measures.back();
  W1Options wo;
  wo.budget_pairs = opts.w1_budget;
  wo.tau_eq = tau;
  for (int m = m_min; m < m_max; ++m) {
    const DiscreteMeasure& cur = measures[m - m_min];
    double w;
    bool thinned = false;
    try {
      w = w1(cur, top, wo);
    } catch (const BudgetExceeded&) {
      thinned = true;
      const std::size_t budget = opts.w1_budget;
      const std::size_t side = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(budget))));
      const DiscreteMeasure a = cur.size() > side ? thin_measure(cur, static_cast<int>(side), opts.seed ^ (2 * m)) : cur;
      const std::size_t room = std::max<std::size_t>(1, budget / a.size());
      const DiscreteMeasure b = top.size() > room ? thin_measure(top, static_cast<int>(room), opts.seed ^ (2 * m + 1)) : top;
      w = w1(a, b, wo);
    }
    fit.depths.push_back(m);
    fit.distances.push_back(w);
    fit.thinned.push_back(thinned);
  }
  fit_rate(fit, m_max - 2);
  return fit;
}

double invariance_defect(const RationalMap& R, const DiscreteMeasure& mu, int k) {
  const auto family = enumerate_family(k);
  std::vector<SpherePoint> images;
  images.reserve(mu.size());
  for (const auto& a : mu.atoms()) images.push_back(eval(R, a));
  double best = 0.0;
  for (const auto& phi : family) {
    double diff = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
      diff += mu.weights()[i] * (bump_eval(phi, images[i]) - bump_eval(phi, mu.atoms()[i]));
    best = std::max(best, std::abs(diff));
  }
  return best;
}

namespace {

// Largest Euclidean distance from c to a point of the spherical cap of radius
// sigma around c (the cap is a disk whose far edge lies on the outward ray).
double cap_extent(cplx c, double sigma) {
  const double a = std::abs(c);
  const double ang = std::atan(a) + sigma / 2.0;
  if (ang >= std::numbers::pi / 2) return std::numeric_limits<double>::infinity();
  return std::tan(ang) - a;
}

}  // namespace

BalancedReport balanced_defect_report(const RationalMap& R, const DiscreteMeasure& mu, int trials,
                                      std::uint64_t seed) {
  if (trials < 1) throw InputError("balanced_defect: trials must be >= 1");
  if (mu.empty()) throw InputError("balanced_defect: empty measure");
  const int d = R.degree();
  const auto crit = critical_points(R);
  std::vector<cplx> bad_values;
  for (const auto& c : critical_values(R))
    if (!c.is_infinity()) bad_values.push_back(c.value());
  const SpherePoint at_inf = eval(R, SpherePoint::infinity());
  if (!at_inf.is_infinity()) bad_values.push_back(at_inf.value());

  std::vector<double> cdf(mu.size());
  std::partial_sum(mu.weights().begin(), mu.weights().end(), cdf.begin());
  cdf.back() = 1.0;

  BalancedReport rep;
  bool any = false;
  for (int t = 0; t < trials; ++t) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(t));
    BalancedTrial tr;
    cplx z, w, deriv;
    for (int attempt = 0; attempt < 64 && !tr.valid; ++attempt) {
      const double u = uniform01(rng);
      const std::size_t idx = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), cdf.size() - 1);
      const SpherePoint& atom = mu.atoms()[idx];
      if (atom.is_infinity()) continue;
      const double g = 65536.0;
      z = cplx(std::round(atom.value().real() * g) / g, std::round(atom.value().imag() * g) / g);
      bool near_crit = false;
      for (const auto& c : crit) near_crit |= sph_dist(SpherePoint(z), c) < 1e-6;
      if (near_crit) continue;
      const SpherePoint wp = eval(R, SpherePoint(z));
      if (wp.is_infinity()) continue;
      w = wp.value();
      double q = 1.0;
      for (const cplx& c : bad_values) q = std::min(q, 0.5 * std::abs(w - c));
      if (q < 1e-9) continue;
      deriv = derivative_in_charts(R, SpherePoint(z), 0, 0);
      if (!(std::abs(deriv) > 0.0) || !std::isfinite(std::abs(deriv))) continue;
      tr.valid = true;
      tr.center = SpherePoint(z);
      tr.q = q;
      tr.r = q / (4.0 * std::abs(deriv));
    }
    if (!tr.valid) {
      rep.trials.push_back(tr);
      continue;
    }
    any = true;

    // Atoms of mu inside B_i, and atoms in the branch domain paired with
    // their preimage inside B_i (at most one, since R is injective there).
    std::vector<std::pair<double, SpherePoint>> direct, pulled;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const SpherePoint& y = mu.atoms()[i];
      if (y.is_infinity()) continue;
      const cplx yv = y.value();
      if (std::abs(yv - z) < tr.r) direct.emplace_back(mu.weights()[i], y);
      if (std::abs(yv - w) < tr.q) {
        for (const auto& zeta : preimages(R, y)) {
          if (zeta.is_infinity() || std::abs(zeta.value() - z) >= tr.r) continue;
          pulled.emplace_back(mu.weights()[i], zeta);
          break;
        }
      }
    }

    const double rho = 2.0 * (std::atan(std::abs(z) + tr.r) - std::atan(std::abs(z)));
    tr.min_margin = std::numeric_limits<double>::infinity();
    for (int level = 0; level <= 2; ++level) {
      const double h = tr.r * std::ldexp(1.0, -level) / 4.0;
      const double sigma = rho * std::ldexp(1.0, -level) / 2.0;
      for (int kx = -level; kx <= level; ++kx)
        for (int ky = -level; ky <= level; ++ky) {
          const cplx c = z + cplx(kx * h, ky * h);
          if (std::abs(c - z) + cap_extent(c, sigma) > tr.r) continue;
          const TestFunction phi{SpherePoint(c), sigma / 2.0, sigma / 2.0};
          double lhs = 0.0, rhs = 0.0;
          for (const auto& [wt, p] : pulled) lhs += wt * bump_eval(phi, p);
          for (const auto& [wt, p] : direct) rhs += wt * bump_eval(phi, p);
          tr.defect = std::max(tr.defect, std::abs(lhs - d * rhs));
          tr.min_margin = std::min(tr.min_margin, phi.eps);
          ++tr.bumps;
        }
    }
    rep.defect = std::max(rep.defect, tr.defect);
    rep.trials.push_back(tr);
  }
  if (!any) throw NoValidBallError("balanced_defect: every sampled center was unusable (critical or at infinity)");
  return rep;
}

double balanced_defect(const RationalMap& R, const DiscreteMeasure& mu, int trials, std::uint64_t seed) {
  return balanced_defect_report(R, mu, trials, seed).defect;
}

}  // namespace brolin
