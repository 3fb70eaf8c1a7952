#pragma once

#include <optional>
#include <span>
#include <vector>

#include "brolin/polynomial.hpp"
#include "brolin/sphere.hpp"

namespace brolin {

struct RootOptions {
  int max_iterations = 600;
  /// Roots closer than this (spherical) are merged into one multiple root.
  double cluster_radius = 1e-9;
};

/// A root of a homogeneous form together with its multiplicity.
struct HomogeneousRoot {
  SpherePoint point;
  int multiplicity = 1;
};

/// Aberth-Ehrlich simultaneous iteration for a polynomial with nonzero
/// leading and constant coefficients. Optional seeds warm-start the
/// iteration; duplicates among them are perturbed apart. Returns the
/// approximations in seed order, or std::nullopt if the backward-error
/// test is not met within the iteration budget.
std::optional<std::vector<cplx>> aberth(std::span<const cplx> coeffs, const RootOptions& opts,
                                        std::span<const cplx> seeds = {});

/// One Newton correction applied in whichever chart keeps |z| <= 1.
/// Returns the corrected root, or z when the step does not lower the residual.
cplx polish_root(std::span<const cplx> coeffs, cplx z);

/// Relative backward error |p(z)| / sum |c_k| |z|^k, evaluated in the chart
/// where |z| <= 1.
double backward_error(std::span<const cplx> coeffs, cplx z);

/// All roots of the binary form F(u, v) = sum c_k u^k v^(D-k), D = c.size()-1,
/// counted with multiplicity (the multiplicities sum to D). Roots at 0 and
/// infinity come from exactly vanishing end coefficients.
///
/// Throws RootConvergenceError when the iteration fails and CoprimalityError
/// when the form vanishes identically.
std::vector<HomogeneousRoot> homogeneous_roots(std::span<const cplx> c, const RootOptions& opts = {},
                                               std::span<const cplx> seeds = {});

/// Expands homogeneous roots into a flat list with each root repeated by multiplicity.
std::vector<SpherePoint> expand_multiplicity(std::span<const HomogeneousRoot> roots);

}  // namespace brolin
