#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

#include "brolin/errors.hpp"
#include "brolin/measure.hpp"
#include "brolin/rational_map.hpp"
#include "brolin/test_function.hpp"
#include "brolin/transport.hpp"

using namespace brolin;
using std::numbers::pi;

namespace {

SpherePoint random_sphere_point(std::mt19937_64& g) {
  // Uniform on the unit sphere, then stereographic projection.
  std::normal_distribution<double> nd;
  double x = nd(g), y = nd(g), z = nd(g);
  const double s = std::sqrt(x * x + y * y + z * z);
  x /= s, y /= s, z /= s;
  if (z > 0.999999999) return SpherePoint::infinity();
  return SpherePoint(cplx(x, y) / (1.0 - z));
}

std::vector<SpherePoint> circle_points(int n, double phase = 0.0) {
  std::vector<SpherePoint> pts;
  for (int k = 0; k < n; ++k) pts.emplace_back(std::polar(1.0, 2 * pi * (k + phase) / n));
  return pts;
}

}  // namespace

TEST_CASE("measure normalization merges, prunes and sorts") {
  auto mu = DiscreteMeasure::from_weighted({cplx(1.0), SpherePoint::infinity(), cplx(1.0 + 1e-14), cplx(2.0)},
                                           {1.0, 2.0, 1.0, 0.0});
  REQUIRE(mu.size() == 2);
  CHECK(mu.atoms()[0] == SpherePoint(cplx(1.0)));
  CHECK(mu.atoms()[1].is_infinity());
  CHECK(mu.weights()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mu.weights()[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(DiscreteMeasure::from_weighted({cplx(1.0)}, {0.0}), InputError);
  CHECK_THROWS_AS(DiscreteMeasure::from_weighted({cplx(1.0)}, {1.0, 2.0}), InputError);
}

TEST_CASE("bump_eval follows the piecewise linear profile") {
  const TestFunction phi{SpherePoint(cplx(0.0)), 0.3, 0.2};
  CHECK(bump_eval(phi, cplx(0.0)) == 1.0);
  // Point at spherical distance t from 0 is tan(t/2) on the real axis.
  auto at = [](double t) { return SpherePoint(cplx(std::tan(t / 2), 0.0)); };
  CHECK(bump_eval(phi, at(0.5)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bump_eval(phi, at(0.4)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bump_eval(phi, at(0.29)) == 1.0);
  CHECK(bump_eval(phi, at(1.0)) == 0.0);
}

TEST_CASE("enumerate_family is deterministic, duplicate-free and prefix-stable") {
  const auto one = enumerate_family(1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].center == SpherePoint(cplx(0.0)));
  CHECK(one[0].r == 0.5);
  CHECK(one[0].eps == 0.5);

  const auto ten = enumerate_family(10);
  std::set<std::tuple<double, double, double, double, double, double>> seen;
  for (const auto& f : ten)
    seen.insert({f.center.u().real(), f.center.u().imag(), f.center.v().real(), f.center.v().imag(), f.r, f.eps});
  CHECK(seen.size() == 10);

  const auto big = enumerate_family(500);
  for (int i = 0; i < 10; ++i) {
    CHECK(big[i].center == ten[i].center);
    CHECK(big[i].r == ten[i].r);
    CHECK(big[i].eps == ten[i].eps);
  }
  // Centers cover both charts, including infinity.
  bool has_inf = false, has_far = false;
  for (int i = 0; i < 200; ++i) {
    const auto c = family_center(i);
    has_inf |= c.is_infinity();
    has_far |= !c.is_infinity() && std::abs(c.value()) > 2.0;
  }
  CHECK(has_inf);
  CHECK(has_far);
}

TEST_CASE("enumerated bumps are [0,1]-valued and 1/eps-Lipschitz") {
  std::mt19937_64 g(7);
  const auto fam = enumerate_family(300);
  for (const auto& phi : fam) {
    CHECK(phi.r > 0);
    CHECK(phi.eps > 0);
    for (int t = 0; t < 50; ++t) {
      const auto x = random_sphere_point(g);
      // Second point nearby so the linear part is exercised.
      const auto y = t % 2 ? random_sphere_point(g) : SpherePoint(x.is_infinity() ? cplx(1e3) : x.value() * cplx(1.01, 0.01));
      const double fx = bump_eval(phi, x), fy = bump_eval(phi, y);
      CHECK(fx >= 0.0);
      CHECK(fx <= 1.0);
      CHECK(std::abs(fx - fy) <= sph_dist(x, y) / phi.eps + 1e-12);
    }
  }
}

TEST_CASE("integrate examples") {
  const auto a = SpherePoint(cplx(0.3, -0.2));
  CHECK(integrate(DiscreteMeasure::dirac(a), [](const SpherePoint&) { return 1.0; }) == 1.0);
  const auto sym = DiscreteMeasure::uniform({cplx(1.0), cplx(-1.0)});
  CHECK(integrate(sym, [](const SpherePoint& p) { return p.value().real(); }) == 0.0);
  const TestFunction phi{a, 0.1, 0.05};
  CHECK(integrate(DiscreteMeasure::dirac(a), [&](const SpherePoint& p) { return bump_eval(phi, p); }) == 1.0);
}

TEST_CASE("thin_measure") {
  const auto a = SpherePoint(cplx(0.5, 0.5));
  const auto t = thin_measure(DiscreteMeasure::dirac(a), 17, 3);
  REQUIRE(t.size() == 1);
  CHECK(t.atoms()[0] == a);

  const auto circ = DiscreteMeasure::uniform(circle_points(64));
  const auto same = thin_measure(circ, 64, 99);
  REQUIRE(same.size() == circ.size());
  for (std::size_t i = 0; i < circ.size(); ++i) {
    CHECK(same.atoms()[i] == circ.atoms()[i]);
    CHECK(same.weights()[i] == doctest::Approx(circ.weights()[i]).epsilon(1e-14));
  }

  const auto iid = thin_measure(circ, 1000, 5, ThinMode::Iid);
  CHECK(iid.size() <= 64);

  const auto big = DiscreteMeasure::uniform(circle_points(4096));
  const auto thin = thin_measure(big, 1000, 11);
  const double d = w1(thin, big);
  CHECK(d <= pi / std::sqrt(1000.0));

  // Fixed seed reproduces the draw.
  const auto again = thin_measure(big, 1000, 11);
  CHECK(again.atoms() == thin.atoms());
  CHECK(again.weights() == thin.weights());
}

TEST_CASE("pushforward maps atoms through the map") {
  const auto R = RationalMap::polynomial({cplx(0), cplx(0), cplx(1)});
  const auto mu = DiscreteMeasure::uniform(circle_points(8));
  const auto img = pushforward(R, mu);
  REQUIRE(img.size() == 4);
  for (double w : img.weights()) CHECK(w == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("measure file round trips and validation") {
  const auto mu = DiscreteMeasure::from_weighted({cplx(0.25, -1.5), SpherePoint::infinity(), cplx(3.0)}, {0.2, 0.3, 0.5});
  const auto rj = raw_measure_from_json(measure_to_json(mu));
  const auto back = DiscreteMeasure::from_weighted(rj.atoms, rj.weights);
  REQUIRE(back.size() == mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) CHECK(same_point(back.atoms()[i], mu.atoms()[i], 1e-15));
  const auto rc = raw_measure_from_csv(measure_to_csv(mu));
  REQUIRE(rc.atoms.size() == 3);
  CHECK(rc.atoms[2].is_infinity() == mu.atoms()[2].is_infinity());
  for (std::size_t i = 0; i < 3; ++i) CHECK(rc.weights[i] == mu.weights()[i]);

  RawMeasure bad{{cplx(1.0), cplx(2.0)}, {0.25, 0.25}};
  CHECK(!check_raw_measure(bad).empty());
  CHECK(check_raw_measure(rj).empty());
  CHECK_THROWS_AS(raw_measure_from_json(nlohmann::json::parse(R"({"atoms":[[1,2]],"weights":[1,2]})")), InputError);
  CHECK_THROWS_AS(raw_measure_from_csv("re,im,weight\n1,x,1\n"), InputError);
}
