#pragma once

#include <array>
#include <complex>
#include <compare>

namespace brolin {

using cplx = std::complex<double>;

/// Point of the Riemann sphere in homogeneous coordinates [u:v], z = u/v.
///
/// The representative is canonical: whichever coordinate has the larger
/// modulus is scaled to exactly 1, so equal points built the same way
/// compare bitwise equal and sort deterministically.
class SpherePoint {
 public:
  SpherePoint() : u_(0.0), v_(1.0) {}
  SpherePoint(cplx z) : SpherePoint(z, cplx(1.0)) {}  // NOLINT: implicit from finite value
  SpherePoint(cplx u, cplx v);

  static SpherePoint infinity() { return SpherePoint(cplx(1.0), cplx(0.0)); }

  const cplx& u() const { return u_; }
  const cplx& v() const { return v_; }

  bool is_infinity() const { return v_ == cplx(0.0); }
  /// Coordinate in the z-chart; infinite for ∞.
  cplx value() const;
  /// Coordinate in the w = 1/z chart; infinite for 0.
  cplx inverse_value() const;

  /// Unit vector on the 2-sphere under inverse stereographic projection.
  std::array<double, 3> to_unit_vector() const;

  /// Lexicographic order on the canonical coordinates (v-normalized first).
  friend std::strong_ordering canonical_order(const SpherePoint& a, const SpherePoint& b);
  friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
    return a.u_ == b.u_ && a.v_ == b.v_;
  }

 private:
  cplx u_, v_;
};

inline bool canonical_less(const SpherePoint& a, const SpherePoint& b) {
  return canonical_order(a, b) < 0;
}

/// |u1 v2 - u2 v1| / sqrt((|u1|^2+|v1|^2)(|u2|^2+|v2|^2)); half the chordal distance.
double chordal_half(const SpherePoint& a, const SpherePoint& b);

/// Chordal distance on the unit sphere, in [0, 2].
double chordal_dist(const SpherePoint& a, const SpherePoint& b);

/// Geodesic (great-circle) distance on the unit sphere, in [0, pi].
double sph_dist(const SpherePoint& a, const SpherePoint& b);

/// Homogeneous equality test u1 v2 - u2 v1 = 0 within tol.
bool same_point(const SpherePoint& a, const SpherePoint& b, double tol);

/// Converts a chordal length into geodesic arc length.
double chord_to_arc(double chord);

}  // namespace brolin
