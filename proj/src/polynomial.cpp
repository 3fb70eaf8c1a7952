#include "brolin/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace brolin::poly {

cplx horner(std::span<const cplx> c, cplx z) {
  cplx acc(0.0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

void horner2(std::span<const cplx> c, cplx z, cplx& value, cplx& deriv) {
  value = 0.0;
  deriv = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    deriv = deriv * z + value;
    value = value * z + *it;
  }
}

double abs_horner(std::span<const cplx> c, double r) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

Coeffs derivative(std::span<const cplx> c) {
  if (c.size() <= 1) return {cplx(0.0)};
  Coeffs d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
  return d;
}

Coeffs multiply(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.empty() || b.empty()) return {};
  Coeffs out(a.size() + b.size() - 1, cplx(0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Coeffs add(std::span<const cplx> a, std::span<const cplx> b) {
  Coeffs out(std::max(a.size(), b.size()), cplx(0.0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Coeffs scale(std::span<const cplx> a, cplx s) {
  Coeffs out(a.begin(), a.end());
  for (auto& x : out) x *= s;
  return out;
}

Coeffs reversed(std::span<const cplx> c) { return Coeffs(c.rbegin(), c.rend()); }

Coeffs taylor_at(std::span<const cplx> c, cplx center) {
  // Repeated synthetic division by (z - center).
  Coeffs t(c.begin(), c.end());
  const std::size_t n = t.size();
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (std::size_t j = n - 1; j > k; --j) t[j - 1] += center * t[j];
  return t;
}

int degree(std::span<const cplx> c) {
  for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k)
    if (c[k] != cplx(0.0)) return k;
  return -1;
}

Coeffs trimmed(std::span<const cplx> c) {
  const int d = degree(c);
  if (d < 0) return {cplx(0.0)};
  return Coeffs(c.begin(), c.begin() + d + 1);
}

double max_abs(std::span<const cplx> c) {
  double m = 0.0;
  for (const auto& x : c) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace brolin::poly
