#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "brolin/errors.hpp"
#include "brolin/rational_map.hpp"
#include "brolin/sphere.hpp"

using namespace brolin;
using std::numbers::pi;

namespace {

const double kMachEps = std::numeric_limits<double>::epsilon();

SpherePoint random_point(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  // Uniform on the sphere, projected stereographically.
  double x = g(rng), y = g(rng), z = g(rng);
  const double n = std::sqrt(x * x + y * y + z * z);
  x /= n, y /= n, z /= n;
  if (z > 0.0) return SpherePoint(cplx(x, y), cplx(1.0 - z));
  return SpherePoint(cplx(x, y) / (1.0 - z));
}

RationalMap z2() { return RationalMap::polynomial({0.0, 0.0, 1.0}); }
RationalMap basilica() { return RationalMap::polynomial({-1.0, 0.0, 1.0}); }

}  // namespace

TEST_CASE("sph_dist examples") {
  CHECK(sph_dist(SpherePoint(0.0), SpherePoint::infinity()) == doctest::Approx(pi).epsilon(1e-15));
  const SpherePoint z(cplx(0.3, -1.7));
  CHECK(sph_dist(z, z) == 0.0);
  CHECK(sph_dist(SpherePoint(1.0), SpherePoint(-1.0)) == doctest::Approx(pi).epsilon(1e-15));
  CHECK(sph_dist(SpherePoint(1.0), SpherePoint(cplx(0.0, 1.0))) == doctest::Approx(pi / 2).epsilon(1e-15));
}

TEST_CASE("sph_dist metric axioms on random triples") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20000; ++t) {
    const auto a = random_point(rng), b = random_point(rng), c = random_point(rng);
    const double ab = sph_dist(a, b), bc = sph_dist(b, c), ac = sph_dist(a, c);
    REQUIRE(ab == sph_dist(b, a));
    REQUIRE(ab <= pi);
    REQUIRE(ab >= 0.0);
    REQUIRE(ac <= ab + bc + 4.0 * kMachEps);
  }
}

TEST_CASE("canonical representative makes max(|u|,|v|) = 1") {
  const SpherePoint a(cplx(3.0, 4.0), cplx(0.5));
  CHECK(a.u() == cplx(1.0));
  CHECK(std::abs(a.value() - cplx(6.0, 8.0)) < 1e-14);
  CHECK(SpherePoint::infinity().is_infinity());
  CHECK_THROWS_AS(SpherePoint(cplx(0.0), cplx(0.0)), InputError);
  CHECK(same_point(SpherePoint(cplx(2.0), cplx(1.0)), SpherePoint(cplx(4.0), cplx(2.0)), 1e-15));
}

TEST_CASE("eval examples") {
  CHECK(same_point(eval(z2(), SpherePoint(2.0)), SpherePoint(4.0), 1e-15));
  CHECK(eval(z2(), SpherePoint::infinity()).is_infinity());
  const RationalMap inv({1.0, 0.0, 0.0}, {0.0, 0.0, 1.0});  // 1/z^2 keeps degree 2
  CHECK(eval(inv, SpherePoint(0.0)).is_infinity());
  const RationalMap recip({cplx(1.0)}, {cplx(0.0), cplx(0.0), cplx(1.0)});
  CHECK(eval(recip, SpherePoint(0.0)).is_infinity());
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(RationalMap({0.0}, {0.0}), InputError);
  CHECK_THROWS_AS(RationalMap::polynomial({0.0, 1.0}), InputError);
  // (z-1)(z+1) / (z-1) shares the root 1.
  CHECK_THROWS_AS(RationalMap({-1.0, 0.0, 1.0}, {-1.0, 1.0}), CoprimalityError);
}

TEST_CASE("chart consistency near |z| = 1") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> th(0.0, 2 * pi), rr(0.999, 1.001);
  const RationalMap R({cplx(0.2, 0.1), 1.0, cplx(0.5, -0.3)}, {1.0, cplx(0.0, 0.4), 0.3});
  for (int t = 0; t < 1000; ++t) {
    const cplx z = std::polar(rr(rng), th(rng));
    // Direct z-chart evaluation vs the 1/z-chart through the canonical point.
    const cplx direct = poly::horner(R.p(), z) / poly::horner(R.q(), z);
    const SpherePoint via = eval(R, SpherePoint(cplx(1.0), 1.0 / z));
    CHECK(same_point(via, SpherePoint(direct), 1e-12));
  }
}

TEST_CASE("preimages examples") {
  auto pre = preimages(z2(), SpherePoint(1.0));
  REQUIRE(pre.size() == 2);
  CHECK(sph_dist(pre[0], SpherePoint(-1.0)) < 1e-14);
  CHECK(sph_dist(pre[1], SpherePoint(1.0)) < 1e-14);

  auto zero = preimage_roots(z2(), SpherePoint(0.0));
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].multiplicity == 2);
  CHECK(zero[0].point == SpherePoint(0.0));

  auto inf = preimages(basilica(), SpherePoint::infinity());
  REQUIRE(inf.size() == 2);
  CHECK(inf[0].is_infinity());
  CHECK(inf[1].is_infinity());
}

TEST_CASE("preimage round trip for generic targets") {
  std::mt19937_64 rng(11);
  const RationalMap R({cplx(0.2, 0.1), 1.0, cplx(0.5, -0.3), 0.1}, {1.0, cplx(0.0, 0.4), 0.3});
  const auto cv = critical_values(R);
  for (int t = 0; t < 300; ++t) {
    const auto w = random_point(rng);
    bool near_cv = false;
    for (const auto& c : cv) near_cv |= sph_dist(c, w) < 1e-3;
    if (near_cv) continue;
    const auto pre = preimages(R, w);
    REQUIRE(pre.size() == 3);
    for (std::size_t i = 0; i < pre.size(); ++i) {
      CHECK(sph_dist(eval(R, pre[i]), w) <= 1e-10);
      for (std::size_t j = 0; j < i; ++j) CHECK(sph_dist(pre[i], pre[j]) > 1e-8);
    }
  }
}

TEST_CASE("multiplier examples") {
  CHECK(std::abs(multiplier(z2(), SpherePoint(1.0)) - 2.0) < 1e-15);
  CHECK(std::abs(multiplier(z2(), SpherePoint(0.0))) == 0.0);
  const double beta = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(std::abs(multiplier(basilica(), SpherePoint(beta)) - (1.0 + std::sqrt(5.0))) < 1e-13);
}

TEST_CASE("periodic points of z^2, period 1") {
  const auto pts = periodic_points(z2(), 1);
  int total = 0;
  for (const auto& p : pts) total += p.multiplicity;
  CHECK(total == 3);
  REQUIRE(pts.size() == 3);
  bool saw0 = false, saw1 = false, sawinf = false;
  for (const auto& p : pts) {
    if (p.point.is_infinity()) {
      sawinf = true;
      CHECK(p.kind == PointKind::SuperAttracting);
    } else if (std::abs(p.point.value()) < 1e-12) {
      saw0 = true;
      CHECK(std::abs(p.multiplier) < 1e-12);
    } else {
      saw1 = std::abs(p.point.value() - 1.0) < 1e-12;
      CHECK(std::abs(p.multiplier - 2.0) < 1e-12);
      CHECK(p.kind == PointKind::Repelling);
    }
  }
  CHECK((saw0 && saw1 && sawinf));
}

TEST_CASE("periodic points of z^2 - 1, period 1") {
  // Fixed points solve z^2 - z - 1 = 0; multiplier 2z.
  const double b = (1.0 + std::sqrt(5.0)) / 2.0, a = (1.0 - std::sqrt(5.0)) / 2.0;
  const auto pts = periodic_points(basilica(), 1);
  REQUIRE(pts.size() == 3);
  int matched = 0;
  for (const auto& p : pts) {
    if (p.point.is_infinity()) continue;
    const cplx z = p.point.value();
    if (std::abs(z - b) < 1e-12) {
      CHECK(std::abs(p.multiplier - (1.0 + std::sqrt(5.0))) < 1e-11);
      ++matched;
    }
    if (std::abs(z - a) < 1e-12) {
      CHECK(std::abs(p.multiplier - (1.0 - std::sqrt(5.0))) < 1e-11);
      ++matched;
    }
  }
  CHECK(matched == 2);
}

TEST_CASE("periodic points of z^2, period 2") {
  // z^4 = z: 0, inf, 1 (lower period) and the 2-cycle of primitive cube roots,
  // multiplier 2 z1 * 2 z2 = 4.
  const auto pts = periodic_points(z2(), 2);
  int total = 0, cycle = 0;
  for (const auto& p : pts) {
    total += p.multiplicity;
    if (!p.lower_period) {
      ++cycle;
      CHECK(p.period == 2);
      CHECK(std::abs(p.multiplier - 4.0) < 1e-11);
      const cplx z = p.point.value();
      CHECK(std::abs(z * z * z - 1.0) < 1e-12);
      CHECK(std::abs(z - 1.0) > 0.5);
    }
  }
  CHECK(total == 5);
  CHECK(cycle == 2);
}

TEST_CASE("periodic_points(R, 1) counts d + 1 for a cubic rational map") {
  const RationalMap R({cplx(0.2, 0.1), 1.0, cplx(0.5, -0.3), 0.1}, {1.0, cplx(0.0, 0.4), 0.3});
  int total = 0;
  for (const auto& p : periodic_points(R, 1)) total += p.multiplicity;
  CHECK(total == 4);
}

TEST_CASE("critical points of z^2 are 0 and infinity") {
  const auto cp = critical_points(z2());
  REQUIRE(cp.size() == 2);
  CHECK(cp[0] == SpherePoint(0.0));
  CHECK(cp[1].is_infinity());
}

TEST_CASE("map JSON round trip") {
  const auto R = basilica();
  const auto j = R.to_json();
  const auto S = RationalMap::from_json(j);
  CHECK(S.p() == R.p());
  CHECK(S.q() == R.q());
  CHECK_THROWS_AS(RationalMap::from_json(nlohmann::json::parse(R"({"p": [[0,0]], "q": [[0,0]]})")), InputError);
}
