#include <doctest.h>

#include <cmath>
#include <numbers>

#include "brolin/errors.hpp"
#include "brolin/julia.hpp"
#include "brolin/pullback.hpp"

using namespace brolin;
using std::numbers::pi;

namespace {

RationalMap quad(cplx c) { return RationalMap::polynomial({c, cplx(0), cplx(1)}); }

// |P(z)| >= 2|z| on 360 points of several circles at and beyond M.
bool escape_oracle(const RationalMap& P, double M) {
  const auto a = P.polynomial_coeffs();
  for (double s : {1.0, 1.01, 1.3, 2.0, 10.0})
    for (int k = 0; k < 360; ++k) {
      const cplx z = std::polar(M * s, 2 * pi * k / 360.0);
      cplx v = 0;
      for (std::size_t i = a.size(); i-- > 0;) v = v * z + a[i];
      if (std::abs(v) < 2 * std::abs(z) * (1 - 1e-12)) return false;
    }
  return true;
}

// Euclidean distance from the closed cell to the origin: nearest and farthest.
std::pair<double, double> cell_radii(const CellCover& c, int ix, int iy) {
  const double x0 = c.origin_re + ix * c.h, y0 = c.origin_im + iy * c.h;
  const double nx = std::max({x0, 0.0, -(x0 + c.h)}), ny = std::max({y0, 0.0, -(y0 + c.h)});
  const double fx = std::max(std::abs(x0), std::abs(x0 + c.h)), fy = std::max(std::abs(y0), std::abs(y0 + c.h));
  return {std::hypot(nx, ny), std::hypot(fx, fy)};
}

}  // namespace

TEST_CASE("escape radius") {
  CHECK(escape_radius(quad(0.0)) == 2.0);
  CHECK(escape_oracle(quad(0.0), 2.0));
  for (cplx c : {cplx(-1.0), cplx(0.0, 1.0), cplx(0.3, -0.5), cplx(-0.75)}) {
    const double M = escape_radius(quad(c));
    CHECK(M >= 2.0);
    CHECK(escape_oracle(quad(c), M));
    CHECK(verify_escape_radius(quad(c), M));
  }
  const auto cubic = RationalMap::polynomial({0, 0, 0, 3});
  CHECK(escape_radius(cubic) == 1.0);
  CHECK(escape_oracle(cubic, 1.0));
  CHECK_THROWS_AS(escape_radius(RationalMap({cplx(1), cplx(0), cplx(1)}, {cplx(0), cplx(1)})), InputError);
}

TEST_CASE("outer cover of z^2 against the unit disk") {
  const auto cov = filled_julia_outer(quad(0.0), 1.0 / 64, 30);
  CHECK(cov.nx == 256);
  for (int iy = 0; iy < cov.ny; ++iy)
    for (int ix = 0; ix < cov.nx; ++ix) {
      const auto [near, far] = cell_radii(cov, ix, iy);
      if (cov.at(ix, iy)) {
        CHECK(near <= 1.0 + 2 * cov.h);  // occupied cells touch the disk inflated by 2h
      }
      if (near <= 1.0) {
        CHECK(cov.at(ix, iy));  // cells meeting the disk are never discarded
      }
    }
  const auto cloud = julia_inner(quad(0.0), 8);
  const auto rep = hausdorff(cov, cloud);
  CHECK(rep.forward <= pi / 2 + 1e-9);  // the center of the disk is a quarter turn from the circle
  CHECK(rep.backward <= 2 * cov.h);
}

TEST_CASE("budget zero keeps every cell meeting B(0, M)") {
  const auto cov = filled_julia_outer(quad(0.0), 1.0 / 32, 0);
  for (int iy = 0; iy < cov.ny; ++iy)
    for (int ix = 0; ix < cov.nx; ++ix) {
      const auto [near, far] = cell_radii(cov, ix, iy);
      if (near < 2.0) CHECK(cov.at(ix, iy));
      if (near > 2.0 + 1e-12) CHECK_FALSE(cov.at(ix, iy));
    }
}

TEST_CASE("cover shrinks with the budget and ignores the worker count") {
  for (cplx c : {cplx(-1.0), cplx(0.0, 1.0)}) {
    const auto a = filled_julia_outer(quad(c), 1.0 / 64, 20), b = filled_julia_outer(quad(c), 1.0 / 64, 40, 3);
    for (std::size_t i = 0; i < a.occupied.size(); ++i)
      if (b.occupied[i]) CHECK(a.occupied[i]);
    CHECK(b.count() <= a.count());
    CHECK(filled_julia_outer(quad(c), 1.0 / 64, 40, 1).occupied == b.occupied);
  }
}

TEST_CASE("inner cloud examples") {
  const auto z2 = quad(0.0);
  const auto c3 = julia_inner(z2, 3);
  CHECK(c3.seed.point == SpherePoint(cplx(1.0)));
  REQUIRE(c3.points.size() == 8);
  for (const auto& p : c3.points) CHECK(std::abs(std::pow(p.value(), 8) - 1.0) < 1e-12);
  const auto c0 = julia_inner(z2, 0);
  REQUIRE(c0.points.size() == 1);
  CHECK(c0.points[0] == c0.seed.point);

  const auto bas = julia_inner(quad(-1.0), 4);
  CHECK(bas.seed.kind == PointKind::Repelling);
  CHECK(sph_dist(bas.seed.point, cplx((1 - std::sqrt(5.0)) / 2)) < 1e-12);
  CHECK(bas.max_residual < 1e-9);

  JuliaInnerOptions o;
  o.start = SpherePoint(cplx(-1.0));
  CHECK(julia_inner(z2, 1, o).points.size() == 3);
}

TEST_CASE("sandwich: inner clouds lie in inflated outer covers") {
  for (cplx c : {cplx(0.0), cplx(-1.0), cplx(0.0, 1.0)}) {
    const auto cov = filled_julia_outer(quad(c), 1.0 / 128, 60);
    const auto cloud = julia_inner(quad(c), 10);
    int miss = 0;
    for (const auto& p : cloud.points) miss += cov.contains(p) ? 0 : 1;
    CHECK(miss == 0);
  }
}

TEST_CASE("hausdorff") {
  const auto c3 = julia_inner(quad(0.0), 3);
  CHECK(hausdorff(c3, c3).distance == 0.0);
  CHECK(hausdorff(std::vector<SpherePoint>{cplx(0.0)}, std::vector<SpherePoint>{cplx(1.0)}).distance ==
        doctest::Approx(pi / 2).epsilon(1e-15));
  std::vector<SpherePoint> circle;
  for (int k = 0; k < 4096; ++k) circle.emplace_back(std::polar(1.0, 2 * pi * k / 4096));
  const auto r = hausdorff(c3.points, circle);
  CHECK(r.distance <= pi / 8 + 1e-12);
  CHECK(r.distance >= pi / 8 - 2 * pi / 4096);
  CHECK_THROWS_AS(hausdorff(std::vector<SpherePoint>{}, circle), EmptySetError);

  // Refinement: deeper clouds approach each other.
  for (cplx c : {cplx(0.0), cplx(-1.0), cplx(0.0, 1.0)}) {
    double prev = 10.0;
    for (int k = 2; k <= 10; k += 4) {
      const double d = hausdorff(julia_inner(quad(c), k), julia_inner(quad(c), k + 2)).distance;
      CHECK(d < prev);
      prev = d;
    }
  }
}

TEST_CASE("cover output formats and dichotomy diagnostic") {
  const auto cov = filled_julia_outer(quad(0.0), 1.0 / 16, 20);
  const auto pgm = cover_to_pgm(cov);
  const std::string header = "P5\n64 64\n255\n";
  REQUIRE(pgm.size() == header.size() + 64 * 64);
  CHECK(pgm.substr(0, header.size()) == header);
  // Top-left pixel is far outside the disk; the middle pixel is inside.
  CHECK(static_cast<unsigned char>(pgm[header.size()]) == 0);
  CHECK(static_cast<unsigned char>(pgm[header.size() + 32 * 64 + 32]) == 255);
  const auto j = cover_to_json(cov);
  CHECK(j["cells"].size() == cov.count());

  CHECK_FALSE(critical_orbit_escapes(quad(-1.0), 100));
  CHECK_FALSE(critical_orbit_escapes(quad(cplx(0.0, 1.0)), 100));
  CHECK(critical_orbit_escapes(quad(1.0), 100));
  CHECK_THROWS_AS(filled_julia_outer(RationalMap({cplx(1), cplx(0), cplx(1)}, {cplx(0), cplx(1)}), 0.1, 5), InputError);
}
