#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "brolin/polynomial.hpp"
#include "brolin/roots.hpp"
#include "brolin/sphere.hpp"
#include "brolin/tolerances.hpp"

namespace brolin {

/// R = P/Q of degree d = max(deg P, deg Q) >= 2 with P, Q coprime.
///
/// Both coefficient vectors are padded to length d + 1 so that the
/// homogeneous forms P(u, v) = sum p_k u^k v^(d-k) and Q(u, v) share the
/// degree d; evaluation, preimages and derivatives all work on these forms.
class RationalMap {
 public:
  RationalMap(poly::Coeffs p, poly::Coeffs q, const Tolerances& tol = kDefaultTolerances);

  static RationalMap polynomial(poly::Coeffs p, const Tolerances& tol = kDefaultTolerances) {
    return RationalMap(std::move(p), {cplx(1.0)}, tol);
  }

  int degree() const { return degree_; }
  const poly::Coeffs& p() const { return p_; }
  const poly::Coeffs& q() const { return q_; }
  /// True when Q is a nonzero constant, i.e. R is a polynomial.
  bool is_polynomial() const { return is_polynomial_; }
  const Tolerances& tolerances() const { return tol_; }
  /// Normalized homogeneous resultant of P and Q; bounded away from 0.
  double resultant() const { return resultant_; }

  /// Coefficients of the polynomial R as a map of the plane (Q divided out);
  /// only valid when is_polynomial().
  poly::Coeffs polynomial_coeffs() const;

  nlohmann::json to_json() const;
  static RationalMap from_json(const nlohmann::json& j, const Tolerances& tol = kDefaultTolerances);

 private:
  poly::Coeffs p_, q_;
  int degree_ = 0;
  bool is_polynomial_ = false;
  double resultant_ = 0.0;
  Tolerances tol_;
};

/// [P(u,v) : Q(u,v)], computed in whichever chart holds the input.
SpherePoint eval(const RationalMap& R, const SpherePoint& z);

/// Forward orbit point R^n(z).
SpherePoint iterate(const RationalMap& R, const SpherePoint& z, int n);

/// The d preimages of w counted with multiplicity, in canonical order.
/// Warm-start seeds (finite values) are optional.
std::vector<SpherePoint> preimages(const RationalMap& R, const SpherePoint& w,
                                   std::span<const cplx> seeds = {});
/// Same, keeping the multiplicity structure.
std::vector<HomogeneousRoot> preimage_roots(const RationalMap& R, const SpherePoint& w,
                                            std::span<const cplx> seeds = {});

/// Chart index used for a point: 0 is the z-chart (|z| <= 1), 1 is w = 1/z.
int chart_of(const SpherePoint& z);

/// Derivative of R read in the given input and output charts at z.
cplx derivative_in_charts(const RationalMap& R, const SpherePoint& z, int chart_in, int chart_out);

/// Derivative of R at z, with input chart chosen by z and output chart by R(z).
/// At a fixed point both charts agree, so the value is the multiplier.
cplx multiplier(const RationalMap& R, const SpherePoint& z);

/// Multiplier of the cycle through z of exact period p: product of
/// chart derivatives along the orbit with matching charts.
cplx cycle_multiplier(const RationalMap& R, const SpherePoint& z, int p);

enum class PointKind { SuperAttracting, Attracting, Indifferent, Repelling };

struct PeriodicPoint {
  SpherePoint point;
  int period = 1;        // exact (minimal) period
  cplx multiplier;       // D(R^period)(point)
  PointKind kind = PointKind::Indifferent;
  bool lower_period = false;  // exact period divides but is less than the requested one
  int multiplicity = 1;
};

std::string to_string(PointKind k);

/// Classification band: |lambda| > 1 + band is repelling, < 1 - band attracting.
PointKind classify_multiplier(cplx lambda, double band = 1e-6);

/// All solutions of R^p(z) = z with multiplicity (d^p + 1 of them), each with
/// exact period, multiplier and classification. Throws BudgetExceeded when
/// d^p + 1 exceeds max_degree.
std::vector<PeriodicPoint> periodic_points(const RationalMap& R, int p, int max_degree = 512);

/// Critical points (zeros of the Wronskian P'Q - PQ' in homogeneous form), 2d - 2 with multiplicity.
std::vector<SpherePoint> critical_points(const RationalMap& R);
std::vector<SpherePoint> critical_values(const RationalMap& R);

}  // namespace brolin
