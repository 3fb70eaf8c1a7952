#pragma once

#include <cstddef>
#include <vector>

#include "brolin/measure.hpp"
#include "brolin/test_function.hpp"

namespace brolin {

struct TransportPair {
  int i;
  int j;
  double mass;
};

struct TransportPlan {
  std::vector<TransportPair> pairs;
  double objective = 0.0;
};

/// Minimum-cost transport between supplies a (n) and demands b (m) with
/// dense row-major cost matrix (n*m), solved exactly by the primal network
/// simplex method. Supplies and demands must be positive with equal totals.
TransportPlan solve_transport(const std::vector<double>& a, const std::vector<double>& b,
                              const std::vector<double>& cost);

struct W1Options {
  std::size_t budget_pairs = 4'000'000;
  double tau_eq = 1e-12;
};

struct W1Result {
  double distance = 0.0;
  TransportPlan plan;  // indices refer to mu.atoms() and nu.atoms()
};

/// Wasserstein-1 distance with spherical ground cost. Mass shared by
/// coincident atoms stays in place; the remainder goes to the solver.
/// Throws BudgetExceeded when the remaining problem has more than
/// budget_pairs source-target pairs.
W1Result w1_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const W1Options& opts = {});
double w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const W1Options& opts = {});

/// Lower bound on W1 from the bumps in `family`: each eps*phi is 1-Lipschitz,
/// so scale*eps*|int phi dmu - int phi dnu| cannot exceed W1 for scale in (0, 1].
double w1_dual_lb(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const std::vector<TestFunction>& family,
                  double scale = 1.0);

}  // namespace brolin
