#pragma once

#include <span>
#include <vector>

#include "brolin/sphere.hpp"

namespace brolin::poly {

/// Coefficients low-to-high: c[0] + c[1] z + ... + c[n] z^n.
using Coeffs = std::vector<cplx>;

cplx horner(std::span<const cplx> c, cplx z);
/// Value and first derivative in one pass.
void horner2(std::span<const cplx> c, cplx z, cplx& value, cplx& deriv);
/// Sum |c_k| |z|^k, the scale of rounding error in horner(c, z).
double abs_horner(std::span<const cplx> c, double r);

Coeffs derivative(std::span<const cplx> c);
Coeffs multiply(std::span<const cplx> a, std::span<const cplx> b);
Coeffs add(std::span<const cplx> a, std::span<const cplx> b);
Coeffs scale(std::span<const cplx> a, cplx s);
Coeffs reversed(std::span<const cplx> c);

/// Taylor coefficients t_k with p(center + h) = sum t_k h^k.
Coeffs taylor_at(std::span<const cplx> c, cplx center);

/// Index of the highest coefficient that is exactly nonzero; -1 for the zero polynomial.
int degree(std::span<const cplx> c);
/// Drops exactly-zero leading coefficients.
Coeffs trimmed(std::span<const cplx> c);

double max_abs(std::span<const cplx> c);

}  // namespace brolin::poly
