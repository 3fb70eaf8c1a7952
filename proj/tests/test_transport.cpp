#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "brolin/errors.hpp"
#include "brolin/measure.hpp"
#include "brolin/test_function.hpp"
#include "brolin/transport.hpp"
#include "support/transport_oracle.hpp"

using namespace brolin;
using std::numbers::pi;

namespace {

SpherePoint random_point(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  if (g() % 23 == 0) return SpherePoint::infinity();
  return SpherePoint(cplx(u(g), u(g)));
}

DiscreteMeasure random_measure(std::mt19937_64& g, int n) {
  std::vector<SpherePoint> a;
  std::vector<double> w;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < n; ++i) {
    a.push_back(random_point(g));
    w.push_back(u(g));
  }
  return DiscreteMeasure::from_weighted(a, w);
}

double brute_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<double> cost;
  for (const auto& x : mu.atoms())
    for (const auto& y : nu.atoms()) cost.push_back(sph_dist(x, y));
  return oracle::brute_force_transport(mu.weights(), nu.weights(), cost);
}

void check_marginals(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const W1Result& r) {
  std::vector<double> rows(mu.size(), 0.0), cols(nu.size(), 0.0);
  double obj = 0.0;
  for (const auto& p : r.plan.pairs) {
    CHECK(p.mass >= 0.0);
    rows[p.i] += p.mass;
    cols[p.j] += p.mass;
    obj += p.mass * sph_dist(mu.atoms()[p.i], nu.atoms()[p.j]);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(std::abs(rows[i] - mu.weights()[i]) <= 1e-12);
  for (std::size_t j = 0; j < cols.size(); ++j) CHECK(std::abs(cols[j] - nu.weights()[j]) <= 1e-12);
  CHECK(std::abs(obj - r.distance) <= 1e-12);
}

}  // namespace

TEST_CASE("bipartite Prufer decoding enumerates every spanning tree once") {
  for (auto [n, m] : {std::pair{1, 1}, {1, 4}, {2, 3}, {3, 3}, {3, 4}, {4, 2}}) {
    std::set<std::vector<std::pair<int, int>>> trees;
    long long codes = 0;
    std::vector<double> s(n, 1.0), d(m, 1.0);
    std::vector<oracle::TreeEdge> edges;
    oracle::for_each_code(n, m, [&](const std::vector<int>& a, const std::vector<int>& b) {
      ++codes;
      oracle::decode_tree(n, m, a, b, s, d, edges);
      std::vector<std::pair<int, int>> key;
      for (const auto& e : edges) key.emplace_back(e.row, e.col);
      std::sort(key.begin(), key.end());
      // A spanning tree on n+m vertices has n+m-1 distinct edges.
      CHECK(std::set(key.begin(), key.end()).size() == static_cast<std::size_t>(n + m - 1));
      trees.insert(key);
    });
    const long long expect = static_cast<long long>(std::pow(n, m - 1) * std::pow(m, n - 1));
    CHECK(codes == expect);
    CHECK(static_cast<long long>(trees.size()) == expect);
  }
}

TEST_CASE("w1 examples") {
  const SpherePoint a(cplx(0.2, 0.7)), b(cplx(-1.5, 0.1));
  CHECK(w1(DiscreteMeasure::dirac(a), DiscreteMeasure::dirac(b)) == doctest::Approx(sph_dist(a, b)).epsilon(1e-14));
  std::mt19937_64 g(1);
  const auto mu = random_measure(g, 40);
  CHECK(w1(mu, mu) == 0.0);
  const auto sym = DiscreteMeasure::uniform({cplx(1.0), cplx(-1.0)});
  CHECK(w1(sym, DiscreteMeasure::dirac(cplx(1.0))) == doctest::Approx(pi / 2).epsilon(1e-14));
}

TEST_CASE("network simplex matches exhaustive vertex enumeration") {
  std::mt19937_64 g(2024);
  for (int t = 0; t < 60; ++t) {
    const int n = 1 + static_cast<int>(g() % 5), m = 1 + static_cast<int>(g() % 5);
    const auto mu = random_measure(g, n), nu = random_measure(g, m);
    const auto r = w1_plan(mu, nu);
    CHECK(std::abs(r.distance - brute_w1(mu, nu)) <= 1e-9);
    check_marginals(mu, nu, r);
  }
}

TEST_CASE("degenerate instances with equal partial sums") {
  // Supplies and demands with many coinciding partial sums force zero-flow
  // basic arcs.
  std::mt19937_64 g(5);
  for (int t = 0; t < 30; ++t) {
    std::vector<SpherePoint> a, b;
    for (int i = 0; i < 4; ++i) a.push_back(random_point(g));
    for (int j = 0; j < 4; ++j) b.push_back(random_point(g));
    const auto mu = DiscreteMeasure::uniform(a), nu = DiscreteMeasure::uniform(b);
    const auto r = w1_plan(mu, nu);
    CHECK(std::abs(r.distance - brute_w1(mu, nu)) <= 1e-9);
    check_marginals(mu, nu, r);
  }
}

TEST_CASE("w1 metric axioms on random triples") {
  std::mt19937_64 g(77);
  for (int t = 0; t < 40; ++t) {
    const auto x = random_measure(g, 2 + g() % 30), y = random_measure(g, 2 + g() % 30), z = random_measure(g, 2 + g() % 30);
    const double xy = w1(x, y), yx = w1(y, x), yz = w1(y, z), xz = w1(x, z);
    CHECK(std::abs(xy - yx) <= 1e-9);
    CHECK(xz <= xy + yz + 1e-9);
    CHECK(xy > 0.0);
  }
}

TEST_CASE("shared atoms are transported in place") {
  std::mt19937_64 g(8);
  std::vector<SpherePoint> pts;
  for (int i = 0; i < 30; ++i) pts.push_back(random_point(g));
  std::vector<double> wa, wb;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int i = 0; i < 30; ++i) wa.push_back(u(g)), wb.push_back(u(g));
  const auto mu = DiscreteMeasure::from_weighted(pts, wa);
  auto shifted = pts;
  shifted.push_back(cplx(0.123, 0.456));
  wb.push_back(0.5);
  const auto nu = DiscreteMeasure::from_weighted(shifted, wb);
  const auto r = w1_plan(mu, nu);
  check_marginals(mu, nu, r);
  // Same answer without the shortcut: perturb the atoms of nu by far less
  // than any pairwise gap so nothing coincides.
  std::vector<SpherePoint> moved;
  for (const auto& p : nu.atoms()) moved.push_back(p.is_infinity() ? p : SpherePoint(p.value() + cplx(1e-10, 0)));
  const auto nu2 = DiscreteMeasure::from_weighted(moved, nu.weights());
  CHECK(std::abs(w1(mu, nu2) - r.distance) <= 1e-8);
}

TEST_CASE("dual lower bound never exceeds w1") {
  std::mt19937_64 g(31);
  const auto fam = enumerate_family(200);
  for (int t = 0; t < 100; ++t) {
    const auto mu = random_measure(g, 1 + g() % 12), nu = random_measure(g, 1 + g() % 12);
    const double lb = w1_dual_lb(mu, nu, fam);
    CHECK(lb <= w1(mu, nu) + 1e-12);
    CHECK(w1_dual_lb(mu, mu, fam) == 0.0);
  }
  // A bump at 0 whose support misses the far point separates completely.
  const TestFunction phi{SpherePoint(cplx(0.0)), 0.25, 0.125};
  const double lb = w1_dual_lb(DiscreteMeasure::dirac(cplx(0.0)), DiscreteMeasure::dirac(cplx(5.0)), {phi});
  CHECK(lb == doctest::Approx(0.125).epsilon(1e-15));
  CHECK_THROWS_AS(w1_dual_lb(DiscreteMeasure::dirac(cplx(0.0)), DiscreteMeasure::dirac(cplx(1.0)), {}), InputError);
}

TEST_CASE("w1 budget") {
  std::vector<SpherePoint> a, b;
  for (int i = 0; i < 50; ++i) a.emplace_back(cplx(i, 0)), b.emplace_back(cplx(0, i + 0.5));
  const auto mu = DiscreteMeasure::uniform(a), nu = DiscreteMeasure::uniform(b);
  W1Options opts;
  opts.budget_pairs = 2499;
  CHECK_THROWS_AS(w1(mu, nu, opts), BudgetExceeded);
  opts.budget_pairs = 2500;
  CHECK_NOTHROW(w1(mu, nu, opts));
}

TEST_CASE("larger instance: plan feasibility and circle shift") {
  // Two interleaved n-point circle discretizations: every atom moves half a
  // spacing, so W1 = pi / n.
  const int n = 400;
  std::vector<SpherePoint> a, b;
  for (int k = 0; k < n; ++k) {
    a.emplace_back(std::polar(1.0, 2 * pi * k / n));
    b.emplace_back(std::polar(1.0, 2 * pi * (k + 0.5) / n));
  }
  const auto mu = DiscreteMeasure::uniform(a), nu = DiscreteMeasure::uniform(b);
  const auto r = w1_plan(mu, nu);
  CHECK(r.distance == doctest::Approx(pi / n).epsilon(1e-10));
  check_marginals(mu, nu, r);
}
