#include "brolin/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "brolin/errors.hpp"

namespace brolin {

SpherePoint::SpherePoint(cplx u, cplx v) {
  const double au = std::abs(u);
  const double av = std::abs(v);
  if (!(std::isfinite(au) && std::isfinite(av))) {
    // A non-finite finite-chart value is read as the point at infinity.
    if (!std::isfinite(au) && std::isfinite(av)) {
      u_ = 1.0;
      v_ = 0.0;
      return;
    }
    throw InputError("SpherePoint: non-finite homogeneous coordinates");
  }
  if (au == 0.0 && av == 0.0) throw InputError("SpherePoint: [0:0] is not a point");
  if (av >= au) {
    u_ = u / v;
    v_ = 1.0;
  } else {
    u_ = 1.0;
    v_ = v / u;
  }
}

cplx SpherePoint::value() const {
  if (v_ == cplx(0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
  return u_ / v_;
}

cplx SpherePoint::inverse_value() const {
  if (u_ == cplx(0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
  return v_ / u_;
}

std::array<double, 3> SpherePoint::to_unit_vector() const {
  // (2 Re(u conj v), 2 Im(u conj v), |u|^2 - |v|^2) / (|u|^2 + |v|^2)
  const cplx w = u_ * std::conj(v_);
  const double nu = std::norm(u_);
  const double nv = std::norm(v_);
  const double s = nu + nv;
  return {2.0 * w.real() / s, 2.0 * w.imag() / s, (nu - nv) / s};
}

std::strong_ordering canonical_order(const SpherePoint& a, const SpherePoint& b) {
  // Finite-chart points (v == 1) sort before infinite-chart points (u == 1).
  const bool af = a.v_ == cplx(1.0);
  const bool bf = b.v_ == cplx(1.0);
  if (af != bf) return af ? std::strong_ordering::less : std::strong_ordering::greater;
  const cplx& x = af ? a.u_ : a.v_;
  const cplx& y = bf ? b.u_ : b.v_;
  if (x.real() < y.real()) return std::strong_ordering::less;
  if (x.real() > y.real()) return std::strong_ordering::greater;
  if (x.imag() < y.imag()) return std::strong_ordering::less;
  if (x.imag() > y.imag()) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

double chordal_half(const SpherePoint& a, const SpherePoint& b) {
  const double num = std::abs(a.u() * b.v() - b.u() * a.v());
  const double na = std::norm(a.u()) + std::norm(a.v());
  const double nb = std::norm(b.u()) + std::norm(b.v());
  return std::min(1.0, num / std::sqrt(na * nb));
}

double chordal_dist(const SpherePoint& a, const SpherePoint& b) { return 2.0 * chordal_half(a, b); }

double chord_to_arc(double chord) { return 2.0 * std::asin(std::clamp(chord / 2.0, 0.0, 1.0)); }

double sph_dist(const SpherePoint& a, const SpherePoint& b) {
  const double s = chordal_half(a, b);
  if (s > 0.7) {
    // Near antipodal asin loses accuracy; use the complementary chord.
    const auto pa = a.to_unit_vector();
    const auto pb = b.to_unit_vector();
    const double sx = pa[0] + pb[0], sy = pa[1] + pb[1], sz = pa[2] + pb[2];
    const double half_sum = 0.5 * std::sqrt(sx * sx + sy * sy + sz * sz);
    return std::numbers::pi - 2.0 * std::asin(std::min(1.0, half_sum));
  }
  return 2.0 * std::asin(s);
}

bool same_point(const SpherePoint& a, const SpherePoint& b, double tol) {
  return std::abs(a.u() * b.v() - b.u() * a.v()) <= tol;
}

}  // namespace brolin
