#pragma once

#include <vector>

#include "brolin/sphere.hpp"

namespace brolin {

/// Piecewise-linear bump: 1 on B(s, r), 0 outside B(s, r + eps), linear
/// in sph_dist between. Lipschitz constant 1/eps.
struct TestFunction {
  SpherePoint center;
  double r = 0.5;
  double eps = 0.5;
};

double bump_eval(const TestFunction& phi, const SpherePoint& x);

/// First k members of a fixed dense enumeration of bumps. Centers are dyadic
/// points of [-2,2]^2 in the z-chart interleaved with dyadic points of the
/// 1/z-chart disk |w| < 1/2; radii and margins are 2^-(j+1). Triples
/// (center, radius, margin) are walked along diagonals of constant index
/// sum, so every triple appears after finitely many steps.
std::vector<TestFunction> enumerate_family(int k);

/// The i-th center of the enumeration (0-based).
SpherePoint family_center(int i);

}  // namespace brolin
