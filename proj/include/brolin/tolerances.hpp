#pragma once

namespace brolin {

struct Tolerances {
  double eq = 1e-12;    // point identity on normalized homogeneous coordinates
  double root = 1e-10;  // spherical residual of a computed preimage
  double res = 1e-10;   // resultant floor for coprimality of P and Q
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace brolin
