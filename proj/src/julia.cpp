#include "brolin/julia.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "brolin/errors.hpp"
#include "brolin/measure.hpp"
#include "brolin/parallel.hpp"
#include "brolin/pullback.hpp"

namespace brolin {

double escape_radius(const RationalMap& P) {
  if (!P.is_polynomial()) throw InputError("escape_radius: map is not a polynomial");
  const auto a = P.polynomial_coeffs();
  const int d = static_cast<int>(a.size()) - 1;
  double lower = 0.0;
  for (int i = 0; i < d; ++i) lower += std::abs(a[i]);
  return std::max(1.0, (2.0 + lower) / std::abs(a[d]));
}

bool verify_escape_radius(const RationalMap& P, double M, int samples) {
  const auto a = P.polynomial_coeffs();
  for (double s : {1.0, 1.5, 2.0, 4.0})
    for (int k = 0; k < samples; ++k) {
      const cplx z = std::polar(M * s, 2 * std::numbers::pi * k / samples);
      if (std::abs(poly::horner(a, z)) < 2.0 * std::abs(z) * (1 - 1e-12)) return false;
    }
  return true;
}

std::size_t CellCover::count() const {
  return static_cast<std::size_t>(std::count(occupied.begin(), occupied.end(), std::uint8_t{1}));
}

bool CellCover::contains(const SpherePoint& z, double inflate) const {
  if (z.is_infinity()) return false;
  if (inflate < 0) inflate = h * std::numbers::sqrt2;
  const cplx p = z.value();
  const int reach = static_cast<int>(std::ceil(inflate / h)) + 1;
  const int cx = static_cast<int>(std::floor((p.real() - origin_re) / h));
  const int cy = static_cast<int>(std::floor((p.imag() - origin_im) / h));
  for (int iy = std::max(0, cy - reach); iy <= std::min(ny - 1, cy + reach); ++iy)
    for (int ix = std::max(0, cx - reach); ix <= std::min(nx - 1, cx + reach); ++ix) {
      if (!at(ix, iy)) continue;
      const double x0 = origin_re + ix * h, y0 = origin_im + iy * h;
      const double dx = std::max({x0 - p.real(), 0.0, p.real() - (x0 + h)});
      const double dy = std::max({y0 - p.imag(), 0.0, p.imag() - (y0 + h)});
      if (std::hypot(dx, dy) <= inflate) return true;
    }
  return false;
}

std::vector<SpherePoint> CellCover::centers() const {
  std::vector<SpherePoint> out;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      if (at(ix, iy)) out.emplace_back(cell_center(ix, iy));
  return out;
}

namespace {

class EscapeTester {
 public:
  EscapeTester(poly::Coeffs a, double M, int N) : a_(std::move(a)), M_(M), N_(N) {}

  // A disk whose center stays within M for N steps cannot be certified, so
  // the cheap point orbit settles most cells inside K.
  bool center_bounded(cplx c) const {
    for (int k = 0; k <= N_; ++k) {
      if (std::abs(c) > M_) return false;
      if (k < N_) c = poly::horner(a_, c);
    }
    return true;
  }

  bool disk_escapes(cplx c, double rho) const {
    if (center_bounded(c)) return false;
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    for (int k = 0;; ++k) {
      if (std::abs(c) - rho > M_) return true;
      if (k == N_) return false;
      const auto t = poly::taylor_at(a_, c);
      double r = 0.0, pw = 1.0, mag = std::abs(t[0]);
      for (std::size_t j = 1; j < t.size(); ++j) {
        pw *= rho;
        r += std::abs(t[j]) * pw;
        mag += std::abs(t[j]) * pw;
      }
      // Cover rounding in the Taylor shift and the sums.
      r += 8.0 * t.size() * kEps * (mag + std::abs(c));
      c = t[0];
      rho = r;
      if (!std::isfinite(rho) || !std::isfinite(std::abs(c))) return false;
    }
  }

  bool cell_escapes(cplx c, double side, int refine) const {
    if (disk_escapes(c, side * std::numbers::sqrt2 / 2)) return true;
    if (refine == 0) return false;
    const double q = side / 4;
    for (cplx off : {cplx(-q, -q), cplx(q, -q), cplx(-q, q), cplx(q, q)})
      if (!cell_escapes(c + off, side / 2, refine - 1)) return false;
    return true;
  }

 private:
  poly::Coeffs a_;
  double M_;
  int N_;
};

}  // namespace

namespace {

// Cells ix0 .. ix0+nx-1, iy0 .. iy0+ny-1 of the grid anchored at (-M, -M).
CellCover build_cover(const RationalMap& P, double h, int N, int workers, int ix0, int iy0, int nx, int ny) {
  CellCover cov;
  cov.M = escape_radius(P);
  cov.h = h;
  cov.budget = N;
  cov.origin_re = -cov.M + ix0 * h;
  cov.origin_im = -cov.M + iy0 * h;
  cov.nx = nx;
  cov.ny = ny;
  cov.occupied.assign(static_cast<std::size_t>(nx) * ny, 1);

  const EscapeTester tester(P.polynomial_coeffs(), cov.M, N);
  constexpr int kBlock = 64;
  const int bx = (nx + kBlock - 1) / kBlock, by = (ny + kBlock - 1) / kBlock;

  // Each top-level block writes only its own cells.
  std::function<void(int, int, int)> visit = [&](int x0, int y0, int size) {
    const int x1 = std::min(nx, x0 + size), y1 = std::min(ny, y0 + size);
    if (x0 >= x1 || y0 >= y1) return;
    if (size == 1) {
      if (tester.cell_escapes(cov.cell_center(x0, y0), h, 2)) cov.occupied[static_cast<std::size_t>(y0) * nx + x0] = 0;
      return;
    }
    const cplx center(cov.origin_re + (x0 + size / 2.0) * h, cov.origin_im + (y0 + size / 2.0) * h);
    if (tester.disk_escapes(center, size * h * std::numbers::sqrt2 / 2)) {
      for (int iy = y0; iy < y1; ++iy)
        for (int ix = x0; ix < x1; ++ix) cov.occupied[static_cast<std::size_t>(iy) * nx + ix] = 0;
      return;
    }
    const int half = size / 2;
    visit(x0, y0, half);
    visit(x0 + half, y0, half);
    visit(x0, y0 + half, half);
    visit(x0 + half, y0 + half, half);
  };
  parallel_for(static_cast<std::size_t>(bx) * by, workers, [&](std::size_t b) {
    visit(static_cast<int>(b % bx) * kBlock, static_cast<int>(b / bx) * kBlock, kBlock);
  });
  return cov;
}

int grid_size(const RationalMap& P, double h) {
  if (!P.is_polynomial()) throw InputError("filled_julia_outer: map is not a polynomial");
  if (!(h > 0.0)) throw InputError("filled_julia_outer: cell size must be positive");
  const double n = std::ceil(2.0 * escape_radius(P) / h - 1e-9);
  if (n > 1 << 20) throw InputError("filled_julia_outer: grid too fine");
  return static_cast<int>(n);
}

}  // namespace

CellCover filled_julia_outer(const RationalMap& P, double h, int N, int workers) {
  const int n = grid_size(P, h);
  if (N < 0) throw InputError("filled_julia_outer: iteration budget must be >= 0");
  if (static_cast<double>(n) * n > 4e8) throw InputError("filled_julia_outer: grid too fine");
  return build_cover(P, h, N, workers, 0, 0, n, n);
}

CellCover filled_julia_outer_fitted(const RationalMap& P, double h, int N, int workers) {
  const int n = grid_size(P, h);
  if (N < 0) throw InputError("filled_julia_outer: iteration budget must be >= 0");
  int k = 0;
  while (h * std::ldexp(1.0, k + 1) <= 1.0 / 32) ++k;
  const int f = 1 << k;
  const int nc = (n + f - 1) / f;
  const CellCover coarse = build_cover(P, h * f, N, workers, 0, 0, nc, nc);
  int x0 = nc, x1 = -1, y0 = nc, y1 = -1;
  for (int iy = 0; iy < nc; ++iy)
    for (int ix = 0; ix < nc; ++ix)
      if (coarse.at(ix, iy)) x0 = std::min(x0, ix), x1 = std::max(x1, ix), y0 = std::min(y0, iy), y1 = std::max(y1, iy);
  if (x1 < 0) return build_cover(P, h, N, workers, 0, 0, 1, 1);
  const int fx0 = x0 * f, fy0 = y0 * f;
  const int fx1 = std::min(n, (x1 + 1) * f), fy1 = std::min(n, (y1 + 1) * f);
  if (static_cast<double>(fx1 - fx0) * (fy1 - fy0) > 4e8) throw InputError("filled_julia_outer: grid too fine");
  return build_cover(P, h, N, workers, fx0, fy0, fx1 - fx0, fy1 - fy0);
}

bool critical_orbit_escapes(const RationalMap& P, int N) {
  const double M = escape_radius(P);
  for (const auto& c : critical_points(P)) {
    if (c.is_infinity()) continue;
    SpherePoint z = c;
    for (int k = 0; k <= N; ++k) {
      if (z.is_infinity() || std::abs(z.value()) > M) return true;
      z = eval(P, z);
    }
  }
  return false;
}

PeriodicPoint find_repelling_point(const RationalMap& R, int max_period) {
  for (int p = 1; p <= max_period; ++p) {
    for (const auto& pp : periodic_points(R, p)) {
      if (pp.lower_period) continue;
      if (pp.kind == PointKind::Repelling && std::abs(pp.multiplier) > 1.0 + 1e-6) return pp;
    }
  }
  throw NoRepellingPointFound("no repelling periodic point of period <= " + std::to_string(max_period));
}

PointCloud julia_inner(const RationalMap& R, int k, const JuliaInnerOptions& opts) {
  if (k < 0) throw InputError("julia_inner: depth must be >= 0");
  PointCloud cloud;
  cloud.depth = k;
  if (opts.start) {
    cloud.seed.point = *opts.start;
    cloud.seed.multiplier = multiplier(R, *opts.start);
    cloud.seed.kind = classify_multiplier(cloud.seed.multiplier);
  } else {
    cloud.seed = find_repelling_point(R, opts.max_period);
  }
  const double tau = R.tolerances().eq;
  auto dedup = [&](const std::vector<SpherePoint>& pts) {
    const auto g = cluster_points(pts, tau);
    std::vector<SpherePoint> out;
    int next = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (g[i] == next) {
        out.push_back(pts[i]);
        ++next;
      }
    return out;
  };

  std::vector<SpherePoint> level{cloud.seed.point}, all{cloud.seed.point};
  for (int j = 0; j < k; ++j) {
    if (level.size() * static_cast<std::size_t>(R.degree()) > opts.point_budget)
      throw BudgetExceeded("julia_inner: point budget exceeded at depth " + std::to_string(j + 1));
    level = dedup(preimage_level(R, level, opts.workers, j));
    all.insert(all.end(), level.begin(), level.end());
  }
  std::vector<double> resid(level.size());
  parallel_for(level.size(), opts.workers,
               [&](std::size_t i) { resid[i] = sph_dist(iterate(R, level[i], k), cloud.seed.point); });
  cloud.max_residual = resid.empty() ? 0.0 : *std::max_element(resid.begin(), resid.end());
  cloud.points = dedup(all);
  std::sort(cloud.points.begin(), cloud.points.end(), canonical_less);
  return cloud;
}

namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using P3 = bg::model::point<double, 3, bg::cs::cartesian>;

// Largest spherical distance from a point of `from` to the set `to`.
double directed(const std::vector<SpherePoint>& from, const std::vector<SpherePoint>& to) {
  std::vector<P3> pts;
  pts.reserve(to.size());
  for (const auto& p : to) {
    const auto v = p.to_unit_vector();
    pts.emplace_back(v[0], v[1], v[2]);
  }
  const bgi::rtree<P3, bgi::quadratic<16>> tree(pts.begin(), pts.end());
  double worst = 0.0;
  std::vector<P3> hit;
  for (const auto& p : from) {
    const auto v = p.to_unit_vector();
    hit.clear();
    tree.query(bgi::nearest(P3(v[0], v[1], v[2]), 1), std::back_inserter(hit));
    const double chord = bg::distance(P3(v[0], v[1], v[2]), hit.front());
    worst = std::max(worst, chord_to_arc(chord));
  }
  return worst;
}

}  // namespace

HausdorffReport hausdorff(const std::vector<SpherePoint>& A, const std::vector<SpherePoint>& B) {
  if (A.empty() || B.empty()) throw EmptySetError("hausdorff: empty set");
  HausdorffReport r;
  r.forward = directed(A, B);
  r.backward = directed(B, A);
  r.distance = std::max(r.forward, r.backward);
  return r;
}

HausdorffReport hausdorff(const PointCloud& A, const PointCloud& B) { return hausdorff(A.points, B.points); }

HausdorffReport hausdorff(const CellCover& A, const PointCloud& B) {
  auto r = hausdorff(A.centers(), B.points);
  r.inflation = A.h * std::numbers::sqrt2 / 2;
  return r;
}

HausdorffReport hausdorff(const CellCover& A, const CellCover& B) {
  auto r = hausdorff(A.centers(), B.centers());
  r.inflation = std::max(A.h, B.h) * std::numbers::sqrt2 / 2;
  return r;
}

std::string cover_to_pgm(const CellCover& cover) {
  std::ostringstream os;
  os << "P5\n" << cover.nx << " " << cover.ny << "\n255\n";
  std::string row(static_cast<std::size_t>(cover.nx), '\0');
  for (int iy = cover.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < cover.nx; ++ix) row[ix] = cover.at(ix, iy) ? static_cast<char>(255) : '\0';
    os << row;
  }
  return os.str();
}

nlohmann::json cover_to_json(const CellCover& cover) {
  nlohmann::json cells = nlohmann::json::array();
  for (int iy = 0; iy < cover.ny; ++iy)
    for (int ix = 0; ix < cover.nx; ++ix)
      if (cover.at(ix, iy)) cells.push_back({ix, iy});
  return {{"origin", {cover.origin_re, cover.origin_im}},
          {"h", cover.h},
          {"nx", cover.nx},
          {"ny", cover.ny},
          {"budget", cover.budget},
          {"escape_radius", cover.M},
          {"occupied_count", cover.count()},
          {"cells", cells}};
}

std::string cloud_to_csv(const PointCloud& cloud) {
  std::ostringstream os;
  os.precision(17);
  os << "re,im\n";
  for (const auto& p : cloud.points) {
    if (p.is_infinity())
      os << "inf,\n";
    else
      os << p.value().real() << "," << p.value().imag() << "\n";
  }
  return os.str();
}

}  // namespace brolin
