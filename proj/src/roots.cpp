#include "brolin/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "brolin/errors.hpp"

namespace brolin {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Newton correction p(z)/p'(z), computed through the reversed polynomial
// when |z| > 1 so that large roots keep full relative accuracy.
cplx newton_ratio(std::span<const cplx> c, std::span<const cplx> rev, cplx z) {
  const double n = static_cast<double>(c.size() - 1);
  if (std::abs(z) <= 1.0) {
    cplx p, dp;
    poly::horner2(c, z, p, dp);
    if (dp == cplx(0.0)) return p == cplx(0.0) ? cplx(0.0) : cplx(kEps * (1.0 + std::abs(z)));
    return p / dp;
  }
  const cplx w = 1.0 / z;
  cplx q, dq;
  poly::horner2(rev, w, q, dq);
  // p(z) = z^n q(w);  p'(z) = z^(n-1) (n q(w) - w q'(w))
  const cplx denom = n * q - w * dq;
  if (denom == cplx(0.0)) return q == cplx(0.0) ? cplx(0.0) : cplx(kEps * std::abs(z));
  return z * q / denom;
}

// Starting points on circles whose radii come from the upper convex hull of
// (k, log|c_k|), one circle per hull edge.
std::vector<cplx> newton_polygon_start(std::span<const cplx> c) {
  const int n = static_cast<int>(c.size()) - 1;
  std::vector<double> lg(c.size());
  for (int k = 0; k <= n; ++k)
    lg[k] = c[k] == cplx(0.0) ? -std::numeric_limits<double>::infinity() : std::log(std::abs(c[k]));
  std::vector<int> hull;
  for (int k = 0; k <= n; ++k) {
    if (!std::isfinite(lg[k])) continue;
    while (hull.size() >= 2) {
      const int a = hull[hull.size() - 2], b = hull.back();
      // Drop b if it lies on or below the segment a-k.
      const double cross = (lg[b] - lg[a]) * (k - a) - (lg[k] - lg[a]) * (b - a);
      if (cross <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(k);
  }
  std::vector<cplx> z;
  z.reserve(n);
  for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
    const int a = hull[e], b = hull[e + 1];
    const int m = b - a;
    const double r = std::exp((lg[a] - lg[b]) / m);
    for (int j = 0; j < m; ++j) {
      const double th = 2.0 * std::numbers::pi * j / m + 0.7 + 0.37 * static_cast<double>(e);
      z.push_back(std::polar(r, th));
    }
  }
  return z;
}

}  // namespace

double backward_error(std::span<const cplx> c, cplx z) {
  if (std::abs(z) <= 1.0) {
    const double s = poly::abs_horner(c, std::abs(z));
    return s == 0.0 ? 0.0 : std::abs(poly::horner(c, z)) / s;
  }
  const auto rev = poly::reversed(c);
  const cplx w = 1.0 / z;
  const double s = poly::abs_horner(rev, std::abs(w));
  return s == 0.0 ? 0.0 : std::abs(poly::horner(rev, w)) / s;
}

cplx polish_root(std::span<const cplx> c, cplx z) {
  const auto rev = poly::reversed(c);
  const double before = backward_error(c, z);
  if (before == 0.0) return z;
  const cplx candidate = z - newton_ratio(c, rev, z);
  if (!std::isfinite(candidate.real()) || !std::isfinite(candidate.imag())) return z;
  return backward_error(c, candidate) < before ? candidate : z;
}

std::optional<std::vector<cplx>> aberth(std::span<const cplx> c, const RootOptions& opts,
                                        std::span<const cplx> seeds) {
  const int n = static_cast<int>(c.size()) - 1;
  if (n <= 0) return std::vector<cplx>{};
  if (n == 1) return std::vector<cplx>{-c[0] / c[1]};
  const auto rev = poly::reversed(c);

  std::vector<cplx> z;
  if (static_cast<int>(seeds.size()) == n) {
    z.assign(seeds.begin(), seeds.end());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (std::abs(z[i] - z[j]) <= 1e-8 * (1.0 + std::abs(z[i])))
          z[i] += std::polar(1e-4 * (1.0 + std::abs(z[i])), 0.9 + i);
  } else {
    z = newton_polygon_start(c);
  }

  // Stopping: the correction is below rounding level, or the backward
  // error has reached a small multiple of machine precision.
  const double tol = 8.0 * n * kEps;
  std::vector<bool> done(n, false);
  int remaining = n;
  for (int it = 0; it < opts.max_iterations && remaining > 0; ++it) {
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      const cplx ratio = newton_ratio(c, rev, z[i]);
      if (backward_error(c, z[i]) <= tol || std::abs(ratio) <= 4.0 * kEps * std::abs(z[i])) {
        done[i] = true;
        --remaining;
        continue;
      }
      cplx sum(0.0);
      for (int j = 0; j < n; ++j)
        if (j != i) sum += 1.0 / (z[i] - z[j]);
      const cplx corr = ratio / (1.0 - ratio * sum);
      if (std::isfinite(corr.real()) && std::isfinite(corr.imag())) z[i] -= corr;
    }
  }

  for (auto& r : z) {
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) return std::nullopt;
  }
  // Slow linear convergence near multiple roots can exhaust the budget while
  // still being accurate in the backward sense; accept a looser floor then.
  for (int i = 0; i < n; ++i) {
    z[i] = polish_root(c, z[i]);
    if (backward_error(c, z[i]) > 1e-11) return std::nullopt;
  }
  return z;
}

std::vector<HomogeneousRoot> homogeneous_roots(std::span<const cplx> c, const RootOptions& opts,
                                               std::span<const cplx> seeds) {
  const int D = static_cast<int>(c.size()) - 1;
  int lo = 0;
  while (lo <= D && c[lo] == cplx(0.0)) ++lo;
  if (lo > D) throw CoprimalityError("homogeneous form vanishes identically");
  int hi = D;
  while (c[hi] == cplx(0.0)) --hi;

  std::vector<HomogeneousRoot> roots;
  if (lo > 0) roots.push_back({SpherePoint(cplx(0.0)), lo});
  if (hi < D) roots.push_back({SpherePoint::infinity(), D - hi});

  if (hi > lo) {
    // Normalize to unit max coefficient.
    poly::Coeffs mid(c.begin() + lo, c.begin() + hi + 1);
    const double s = poly::max_abs(mid);
    for (auto& x : mid) x /= s;
    std::vector<cplx> warm;
    if (static_cast<int>(seeds.size()) == hi - lo) warm.assign(seeds.begin(), seeds.end());
    auto found = aberth(mid, opts, warm);
    if (!found && !warm.empty()) found = aberth(mid, opts);
    if (!found) throw RootConvergenceError("Aberth iteration did not converge (degree " +
                                           std::to_string(hi - lo) + ")");
    // Greedy clustering in spherical distance; members collapse onto their mean.
    std::vector<SpherePoint> pts;
    pts.reserve(found->size());
    for (const auto& z : *found) pts.emplace_back(z);
    std::vector<int> owner(pts.size(), -1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (owner[i] >= 0) continue;
      owner[i] = static_cast<int>(i);
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        if (owner[j] < 0 && sph_dist(pts[i], pts[j]) <= opts.cluster_radius) owner[j] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (owner[i] != static_cast<int>(i)) continue;
      int mult = 0;
      cplx mean(0.0);
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (owner[j] == static_cast<int>(i)) {
          ++mult;
          mean += (*found)[j];
        }
      mean /= static_cast<double>(mult);
      roots.push_back({mult == 1 ? pts[i] : SpherePoint(mean), mult});
    }
  }
  std::stable_sort(roots.begin(), roots.end(),
                   [](const HomogeneousRoot& a, const HomogeneousRoot& b) { return canonical_less(a.point, b.point); });
  return roots;
}

std::vector<SpherePoint> expand_multiplicity(std::span<const HomogeneousRoot> roots) {
  std::vector<SpherePoint> out;
  for (const auto& r : roots)
    for (int k = 0; k < r.multiplicity; ++k) out.push_back(r.point);
  return out;
}

}  // namespace brolin
