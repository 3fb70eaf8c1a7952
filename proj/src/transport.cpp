#include "brolin/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brolin/errors.hpp"
#include "brolin/measure.hpp"

namespace brolin {
namespace {

// Primal network simplex on the complete bipartite graph sources -> sinks,
// with an artificial root joined to every node. Arc k < n*m is (k/m -> n + k%m);
// arc n*m + v is the artificial arc of node v (v -> root for sources,
// root -> v for sinks). The spanning tree is kept as parent pointers with the
// flow of each node's parent arc; nontree arcs carry zero flow.
class NetworkSimplex {
 public:
  NetworkSimplex(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& cost)
      : n_(static_cast<int>(a.size())),
        m_(static_cast<int>(b.size())),
        nodes_(n_ + m_ + 1),
        root_(n_ + m_),
        real_arcs_(static_cast<std::size_t>(n_) * m_),
        cost_(cost) {
    double max_cost = 0.0;
    for (double c : cost_) max_cost = std::max(max_cost, c);
    art_cost_ = max_cost + 1.0;
    tol_ = 1e-13 * art_cost_;

    parent_.assign(nodes_, -1);
    pred_.assign(nodes_, -1);
    up_.assign(nodes_, 0);
    flow_.assign(nodes_, 0.0);
    depth_.assign(nodes_, 1);
    pi_.assign(nodes_, 0.0);
    children_.assign(nodes_, {});
    depth_[root_] = 0;
    for (int v = 0; v < root_; ++v) {
      parent_[v] = root_;
      pred_[v] = static_cast<long long>(real_arcs_) + v;
      children_[root_].push_back(v);
      if (v < n_) {
        up_[v] = 1;
        flow_[v] = a[v];
        pi_[v] = -art_cost_;
      } else {
        up_[v] = 0;
        flow_[v] = b[v - n_];
        pi_[v] = art_cost_;
      }
    }
    block_ = std::max<std::size_t>(static_cast<std::size_t>(std::sqrt(static_cast<double>(real_arcs_ + nodes_))), 10);
  }

  void run() {
    long long in_arc;
    while ((in_arc = find_entering()) >= 0) pivot(in_arc);
  }

  TransportPlan plan() const {
    TransportPlan p;
    for (int v = 0; v < root_; ++v) {
      const long long e = pred_[v];
      if (e >= static_cast<long long>(real_arcs_) || flow_[v] <= 0.0) continue;
      const int i = static_cast<int>(e / m_), j = static_cast<int>(e % m_);
      p.pairs.push_back({i, j, flow_[v]});
      p.objective += flow_[v] * cost_[e];
    }
    std::sort(p.pairs.begin(), p.pairs.end(),
              [](const TransportPair& x, const TransportPair& y) { return x.i != y.i ? x.i < y.i : x.j < y.j; });
    return p;
  }

 private:
  int tail(long long e) const {
    if (e < static_cast<long long>(real_arcs_)) return static_cast<int>(e / m_);
    const int v = static_cast<int>(e - static_cast<long long>(real_arcs_));
    return v < n_ ? v : root_;
  }
  int head(long long e) const {
    if (e < static_cast<long long>(real_arcs_)) return n_ + static_cast<int>(e % m_);
    const int v = static_cast<int>(e - static_cast<long long>(real_arcs_));
    return v < n_ ? root_ : v;
  }
  double arc_cost(long long e) const {
    return e < static_cast<long long>(real_arcs_) ? cost_[e] : art_cost_;
  }
  double reduced(long long e) const { return arc_cost(e) + pi_[tail(e)] - pi_[head(e)]; }

  // Block search: scan arcs cyclically in blocks, return the most negative
  // reduced cost of the first block that has one.
  long long find_entering() {
    const std::size_t total = real_arcs_ + nodes_ - 1;
    long long best = -1;
    double best_rc = -tol_;
    std::size_t scanned_in_block = 0;
    for (std::size_t count = 0; count < total; ++count) {
      const long long e = static_cast<long long>(next_arc_);
      next_arc_ = next_arc_ + 1 == total ? 0 : next_arc_ + 1;
      const double rc = reduced(e);
      if (rc < best_rc) {
        best_rc = rc;
        best = e;
      }
      if (++scanned_in_block == block_) {
        if (best >= 0) return best;
        scanned_in_block = 0;
      }
    }
    return best;
  }

  void pivot(long long in_arc) {
    const int first = tail(in_arc), second = head(in_arc);
    int join;
    {
      int x = first, y = second;
      while (x != y) {
        if (depth_[x] >= depth_[y])
          x = parent_[x];
        else
          y = parent_[y];
      }
      join = x;
    }

    constexpr double kInf = std::numeric_limits<double>::infinity();
    double delta = kInf;
    int u_out = -1;
    int side = 0;
    for (int u = first; u != join; u = parent_[u]) {
      if (!up_[u]) continue;
      const double d = std::max(flow_[u], 0.0);
      if (d < delta) {
        delta = d;
        u_out = u;
        side = 1;
      }
    }
    for (int u = second; u != join; u = parent_[u]) {
      if (up_[u]) continue;
      const double d = std::max(flow_[u], 0.0);
      if (d <= delta) {
        delta = d;
        u_out = u;
        side = 2;
      }
    }
    if (u_out < 0) throw Error(ErrorKind::Invariant, "transport: unbounded pivot");

    if (delta > 0.0) {
      for (int u = first; u != join; u = parent_[u]) flow_[u] += up_[u] ? -delta : delta;
      for (int u = second; u != join; u = parent_[u]) flow_[u] += up_[u] ? delta : -delta;
    }

    const int u_in = side == 1 ? first : second;
    const int v_in = side == 1 ? second : first;

    // Detach the subtree of u_out and hang it from v_in through in_arc,
    // reversing parent links along the path u_in -> u_out.
    detach(u_out);
    int node = u_in;
    int new_parent = v_in;
    long long new_pred = in_arc;
    char new_up = (u_in == tail(in_arc)) ? 1 : 0;
    double new_flow = delta;
    for (;;) {
      const int old_parent = parent_[node];
      const long long old_pred = pred_[node];
      const char old_up = up_[node];
      const double old_flow = flow_[node];
      const bool last = (node == u_out);
      if (!last) detach(node);
      parent_[node] = new_parent;
      pred_[node] = new_pred;
      up_[node] = new_up;
      flow_[node] = new_flow;
      children_[new_parent].push_back(node);
      if (last) break;
      new_parent = node;
      new_pred = old_pred;
      new_up = old_up ? 0 : 1;
      new_flow = old_flow;
      node = old_parent;
    }
    relabel(u_in);
  }

  void detach(int v) {
    auto& c = children_[parent_[v]];
    auto it = std::find(c.begin(), c.end(), v);
    *it = c.back();
    c.pop_back();
  }

  void relabel(int start) {
    stack_.clear();
    stack_.push_back(start);
    while (!stack_.empty()) {
      const int v = stack_.back();
      stack_.pop_back();
      const int p = parent_[v];
      depth_[v] = depth_[p] + 1;
      const double c = arc_cost(pred_[v]);
      pi_[v] = up_[v] ? pi_[p] - c : pi_[p] + c;
      for (int w : children_[v]) stack_.push_back(w);
    }
  }

  int n_, m_, nodes_, root_;
  std::size_t real_arcs_;
  const std::vector<double>& cost_;
  double art_cost_ = 1.0;
  double tol_ = 0.0;
  std::vector<int> parent_;
  std::vector<long long> pred_;
  std::vector<char> up_;
  std::vector<double> flow_;
  std::vector<int> depth_;
  std::vector<double> pi_;
  std::vector<std::vector<int>> children_;
  std::vector<int> stack_;
  std::size_t block_ = 10;
  std::size_t next_arc_ = 0;
};

double unit_arc(const std::array<double, 3>& p, const std::array<double, 3>& q) {
  const double cx = p[1] * q[2] - p[2] * q[1];
  const double cy = p[2] * q[0] - p[0] * q[2];
  const double cz = p[0] * q[1] - p[1] * q[0];
  const double dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

}  // namespace

TransportPlan solve_transport(const std::vector<double>& a, const std::vector<double>& b,
                              const std::vector<double>& cost) {
  if (a.empty() || b.empty()) throw InputError("transport: empty side");
  if (cost.size() != a.size() * b.size()) throw InputError("transport: cost matrix has wrong size");
  NetworkSimplex ns(a, b, cost);
  ns.run();
  return ns.plan();
}

W1Result w1_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const W1Options& opts) {
  if (mu.empty() || nu.empty()) throw InputError("w1: empty measure");
  std::vector<double> ra = mu.weights(), rb = nu.weights();
  W1Result out;

  // Coincident atoms: both atom lists are duplicate-free at tau_eq, so
  // cluster the union and pair members of the same cluster.
  std::vector<SpherePoint> all(mu.atoms());
  all.insert(all.end(), nu.atoms().begin(), nu.atoms().end());
  const auto group = cluster_points(all, opts.tau_eq);
  const int na = static_cast<int>(mu.size());
  std::vector<int> first_mu(all.size(), -1);
  for (int i = 0; i < na; ++i)
    if (first_mu[group[i]] < 0) first_mu[group[i]] = i;
  for (std::size_t k = na; k < all.size(); ++k) {
    const int i = first_mu[group[k]];
    if (i < 0) continue;
    const int j = static_cast<int>(k) - na;
    const double common = std::min(ra[i], rb[j]);
    if (common <= 0.0) continue;
    out.plan.pairs.push_back({i, j, common});
    out.plan.objective += common * sph_dist(mu.atoms()[i], nu.atoms()[j]);
    ra[i] -= common;
    rb[j] -= common;
  }

  constexpr double kDrop = 1e-15;
  std::vector<int> si, sj;
  for (int i = 0; i < na; ++i)
    if (ra[i] > kDrop) si.push_back(i);
  for (int j = 0; j < static_cast<int>(nu.size()); ++j)
    if (rb[j] > kDrop) sj.push_back(j);

  if (!si.empty() && !sj.empty()) {
    const std::size_t pairs = si.size() * sj.size();
    if (pairs > opts.budget_pairs)
      throw BudgetExceeded("w1: " + std::to_string(si.size()) + " x " + std::to_string(sj.size()) +
                           " transport exceeds the budget of " + std::to_string(opts.budget_pairs) + " pairs");
    std::vector<std::array<double, 3>> va, vb;
    for (int i : si) va.push_back(mu.atoms()[i].to_unit_vector());
    for (int j : sj) vb.push_back(nu.atoms()[j].to_unit_vector());
    std::vector<double> cost(pairs);
    for (std::size_t x = 0; x < si.size(); ++x)
      for (std::size_t y = 0; y < sj.size(); ++y) cost[x * sj.size() + y] = unit_arc(va[x], vb[y]);
    std::vector<double> a, b;
    for (int i : si) a.push_back(ra[i]);
    for (int j : sj) b.push_back(rb[j]);
    const auto sub = solve_transport(a, b, cost);
    for (const auto& p : sub.pairs) out.plan.pairs.push_back({si[p.i], sj[p.j], p.mass});
    out.plan.objective += sub.objective;
  }
  std::sort(out.plan.pairs.begin(), out.plan.pairs.end(),
            [](const TransportPair& x, const TransportPair& y) { return x.i != y.i ? x.i < y.i : x.j < y.j; });
  out.distance = std::max(0.0, out.plan.objective);
  return out;
}

double w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const W1Options& opts) {
  return w1_plan(mu, nu, opts).distance;
}

double w1_dual_lb(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const std::vector<TestFunction>& family,
                  double scale) {
  if (family.empty()) throw InputError("w1_dual_lb: empty family");
  if (!(scale > 0.0 && scale <= 1.0)) throw InputError("w1_dual_lb: scale must lie in (0, 1]");
  double best = 0.0;
  for (const auto& phi : family) {
    const double im = integrate(mu, [&](const SpherePoint& x) { return bump_eval(phi, x); });
    const double in = integrate(nu, [&](const SpherePoint& x) { return bump_eval(phi, x); });
    best = std::max(best, scale * phi.eps * std::abs(im - in));
  }
  return best;
}

}  // namespace brolin
