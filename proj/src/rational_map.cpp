#include "brolin/rational_map.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "brolin/errors.hpp"

namespace brolin {
namespace {

poly::Coeffs padded(const poly::Coeffs& c, int n) {
  poly::Coeffs out(c);
  out.resize(static_cast<std::size_t>(n) + 1, cplx(0.0));
  return out;
}

// Resultant of two binary forms of common degree d, each scaled to unit
// max coefficient, from the 2d x 2d Sylvester matrix.
double form_resultant(const poly::Coeffs& p, const poly::Coeffs& q, int d) {
  const double sp = poly::max_abs(p), sq = poly::max_abs(q);
  Eigen::MatrixXcd syl = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
  for (int r = 0; r < d; ++r)
    for (int k = 0; k <= d; ++k) {
      syl(r, r + k) = p[d - k] / sp;
      syl(d + r, r + k) = q[d - k] / sq;
    }
  return std::abs(syl.partialPivLu().determinant());
}

// Homogeneous form products: index is the power of u.
poly::Coeffs form_pow(const poly::Coeffs& a, int k) {
  poly::Coeffs out{cplx(1.0)};
  for (int i = 0; i < k; ++i) out = poly::multiply(out, a);
  return out;
}

poly::Coeffs parse_coeffs(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw InputError(std::string("map JSON: missing array '") + key + "'");
  poly::Coeffs c;
  for (const auto& e : j.at(key)) {
    if (e.is_number()) {
      c.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      c.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      throw InputError(std::string("map JSON: bad coefficient in '") + key + "'");
    }
  }
  return c;
}

nlohmann::json coeffs_json(const poly::Coeffs& c) {
  auto t = poly::trimmed(c);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& x : t) arr.push_back({x.real(), x.imag()});
  return arr;
}

}  // namespace

RationalMap::RationalMap(poly::Coeffs p, poly::Coeffs q, const Tolerances& tol) : tol_(tol) {
  for (const auto& x : p)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw InputError("RationalMap: non-finite coefficient");
  for (const auto& x : q)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw InputError("RationalMap: non-finite coefficient");
  const int dp = poly::degree(p), dq = poly::degree(q);
  if (dp < 0 || dq < 0) throw InputError("RationalMap: P and Q must both be nonzero");
  degree_ = std::max(dp, dq);
  if (degree_ < 2) throw InputError("RationalMap: degree must be at least 2");
  p_ = padded(poly::trimmed(p), degree_);
  q_ = padded(poly::trimmed(q), degree_);
  is_polynomial_ = dq == 0;
  resultant_ = form_resultant(p_, q_, degree_);
  if (!(resultant_ > tol_.res))
    throw CoprimalityError("RationalMap: P and Q are not coprime (resultant " + std::to_string(resultant_) + ")");
}

poly::Coeffs RationalMap::polynomial_coeffs() const {
  if (!is_polynomial_) throw InputError("map is not a polynomial");
  return poly::trimmed(poly::scale(p_, 1.0 / q_[0]));
}

nlohmann::json RationalMap::to_json() const { return {{"p", coeffs_json(p_)}, {"q", coeffs_json(q_)}}; }

RationalMap RationalMap::from_json(const nlohmann::json& j, const Tolerances& tol) {
  if (!j.is_object()) throw InputError("map JSON must be an object");
  return RationalMap(parse_coeffs(j, "p"), parse_coeffs(j, "q"), tol);
}

int chart_of(const SpherePoint& z) { return z.v() == cplx(1.0) ? 0 : 1; }

SpherePoint eval(const RationalMap& R, const SpherePoint& z) {
  cplx a, b;
  double scale;
  if (chart_of(z) == 0) {
    a = poly::horner(R.p(), z.u());
    b = poly::horner(R.q(), z.u());
    scale = poly::abs_horner(R.p(), std::abs(z.u())) + poly::abs_horner(R.q(), std::abs(z.u()));
  } else {
    const auto rp = poly::reversed(R.p());
    const auto rq = poly::reversed(R.q());
    a = poly::horner(rp, z.v());
    b = poly::horner(rq, z.v());
    scale = poly::abs_horner(rp, std::abs(z.v())) + poly::abs_horner(rq, std::abs(z.v()));
  }
  if (std::abs(a) + std::abs(b) <= R.tolerances().eq * scale)
    throw CoprimalityError("eval: both homogeneous values vanish");
  return SpherePoint(a, b);
}

SpherePoint iterate(const RationalMap& R, const SpherePoint& z, int n) {
  SpherePoint w = z;
  for (int i = 0; i < n; ++i) w = eval(R, w);
  return w;
}

std::vector<HomogeneousRoot> preimage_roots(const RationalMap& R, const SpherePoint& w,
                                            std::span<const cplx> seeds) {
  const int d = R.degree();
  poly::Coeffs c(d + 1);
  for (int k = 0; k <= d; ++k) c[k] = w.v() * R.p()[k] - w.u() * R.q()[k];
  RootOptions opts;
  opts.cluster_radius = 10.0 * R.tolerances().root;

  auto residual_ok = [&](const std::vector<HomogeneousRoot>& roots) {
    for (const auto& r : roots)
      if (sph_dist(eval(R, r.point), w) > R.tolerances().root) return false;
    return true;
  };
  auto roots = homogeneous_roots(c, opts, seeds);
  if (residual_ok(roots)) return roots;
  if (!seeds.empty()) {
    roots = homogeneous_roots(c, opts);
    if (residual_ok(roots)) return roots;
  }
  throw RootConvergenceError("preimages: residual tolerance not met");
}

std::vector<SpherePoint> preimages(const RationalMap& R, const SpherePoint& w, std::span<const cplx> seeds) {
  return expand_multiplicity(preimage_roots(R, w, seeds));
}

cplx derivative_in_charts(const RationalMap& R, const SpherePoint& z, int chart_in, int chart_out) {
  cplx s;
  poly::Coeffs pc, qc;
  if (chart_in == 0) {
    s = z.value();
    pc = R.p();
    qc = R.q();
  } else {
    s = z.inverse_value();
    pc = poly::reversed(R.p());
    qc = poly::reversed(R.q());
  }
  if (!std::isfinite(s.real())) throw InputError("derivative: point not in requested chart");
  cplx P, dP, Q, dQ;
  poly::horner2(pc, s, P, dP);
  poly::horner2(qc, s, Q, dQ);
  if (chart_out == 0) return (dP * Q - P * dQ) / (Q * Q);
  return (dQ * P - Q * dP) / (P * P);
}

cplx multiplier(const RationalMap& R, const SpherePoint& z) {
  return derivative_in_charts(R, z, chart_of(z), chart_of(eval(R, z)));
}

cplx cycle_multiplier(const RationalMap& R, const SpherePoint& z, int p) {
  std::vector<SpherePoint> orbit{z};
  for (int i = 1; i < p; ++i) orbit.push_back(eval(R, orbit.back()));
  cplx prod(1.0);
  for (int i = 0; i < p; ++i) {
    const int cin = chart_of(orbit[i]);
    const int cout = chart_of(orbit[(i + 1) % p]);
    prod *= derivative_in_charts(R, orbit[i], cin, cout);
  }
  return prod;
}

std::string to_string(PointKind k) {
  switch (k) {
    case PointKind::SuperAttracting: return "superattracting";
    case PointKind::Attracting: return "attracting";
    case PointKind::Indifferent: return "indifferent";
    case PointKind::Repelling: return "repelling";
  }
  return "unknown";
}

PointKind classify_multiplier(cplx lambda, double band) {
  const double a = std::abs(lambda);
  if (a <= 1e-9) return PointKind::SuperAttracting;
  if (a < 1.0 - band) return PointKind::Attracting;
  if (a > 1.0 + band) return PointKind::Repelling;
  return PointKind::Indifferent;
}

std::vector<PeriodicPoint> periodic_points(const RationalMap& R, int p, int max_degree) {
  if (p < 1) throw InputError("periodic_points: period must be >= 1");
  const int d = R.degree();
  double D = 1.0;
  for (int i = 0; i < p; ++i) D *= d;
  if (D + 1.0 > max_degree) throw BudgetExceeded("periodic_points: d^p + 1 exceeds root-solver budget");

  // Homogeneous forms of R^p, built by composition.
  poly::Coeffs A{cplx(0.0), cplx(1.0)};  // u
  poly::Coeffs B{cplx(1.0)};             // v  (degree-1 form: v = u^0 v^1)
  B.push_back(cplx(0.0));
  for (int it = 0; it < p; ++it) {
    const int deg = static_cast<int>(A.size()) - 1;
    poly::Coeffs nA(static_cast<std::size_t>(deg) * d + 1, cplx(0.0)), nB = nA;
    for (int k = 0; k <= d; ++k) {
      const auto term = poly::multiply(form_pow(A, k), form_pow(B, d - k));
      for (std::size_t i = 0; i < term.size(); ++i) {
        nA[i] += R.p()[k] * term[i];
        nB[i] += R.q()[k] * term[i];
      }
    }
    const double s = std::max(poly::max_abs(nA), poly::max_abs(nB));
    A = poly::scale(nA, 1.0 / s);
    B = poly::scale(nB, 1.0 / s);
  }
  // u B(u,v) - v A(u,v)
  const int Dp = static_cast<int>(A.size()) - 1;
  poly::Coeffs F(Dp + 2, cplx(0.0));
  for (int k = 0; k <= Dp; ++k) {
    F[k + 1] += B[k];
    F[k] -= A[k];
  }
  RootOptions opts;
  opts.cluster_radius = 10.0 * R.tolerances().root;
  const auto roots = homogeneous_roots(F, opts);

  const double fix_tol = std::max(1e-8, 100.0 * R.tolerances().root);
  std::vector<PeriodicPoint> out;
  for (const auto& r : roots) {
    PeriodicPoint pp;
    pp.point = r.point;
    pp.multiplicity = r.multiplicity;
    pp.period = p;
    for (int q = 1; q <= p; ++q) {
      if (p % q != 0) continue;
      if (sph_dist(iterate(R, r.point, q), r.point) <= fix_tol) {
        pp.period = q;
        break;
      }
    }
    pp.lower_period = pp.period < p;
    pp.multiplier = cycle_multiplier(R, r.point, pp.period);
    pp.kind = classify_multiplier(pp.multiplier);
    out.push_back(pp);
  }
  return out;
}

std::vector<SpherePoint> critical_points(const RationalMap& R) {
  const int d = R.degree();
  const auto& p = R.p();
  const auto& q = R.q();
  poly::Coeffs pu(d), pv(d), qu(d), qv(d);
  for (int k = 1; k <= d; ++k) {
    pu[k - 1] = static_cast<double>(k) * p[k];
    qu[k - 1] = static_cast<double>(k) * q[k];
  }
  for (int k = 0; k < d; ++k) {
    pv[k] = static_cast<double>(d - k) * p[k];
    qv[k] = static_cast<double>(d - k) * q[k];
  }
  const auto w = poly::add(poly::multiply(pu, qv), poly::scale(poly::multiply(pv, qu), -1.0));
  RootOptions opts;
  opts.cluster_radius = 10.0 * R.tolerances().root;
  return expand_multiplicity(homogeneous_roots(w, opts));
}

std::vector<SpherePoint> critical_values(const RationalMap& R) {
  std::vector<SpherePoint> out;
  for (const auto& c : critical_points(R)) out.push_back(eval(R, c));
  return out;
}

}  // namespace brolin
