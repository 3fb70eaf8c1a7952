#pragma once

// Exhaustive transport oracle for tiny instances: every basic solution of the
// transportation polytope is the unique flow on some spanning tree of the
// complete bipartite graph, so the minimum over all spanning trees with
// non-negative tree flows is the LP optimum. Trees are enumerated through a
// bipartite Prufer code: a in [m]^(n-1) and b in [n]^(m-1).

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

struct TreeEdge {
  int row, col;
  double flow;
};

// Decodes the code into n+m-1 edges with leaf-peeled flows. Rows are vertices
// 0..n-1 and columns n..n+m-1; the smallest remaining leaf is peeled first.
inline void decode_tree(int n, int m, const std::vector<int>& a, const std::vector<int>& b,
                        const std::vector<double>& supply, const std::vector<double>& demand,
                        std::vector<TreeEdge>& edges) {
  edges.clear();
  int deg[16];
  double rem[16];
  for (int i = 0; i < n; ++i) deg[i] = 1, rem[i] = supply[i];
  for (int j = 0; j < m; ++j) deg[n + j] = 1, rem[n + j] = demand[j];
  for (int x : a) ++deg[n + x];
  for (int x : b) ++deg[x];
  std::uint32_t leaves = 0, alive = (1u << (n + m)) - 1;
  for (int v = 0; v < n + m; ++v)
    if (deg[v] == 1) leaves |= 1u << v;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() || ib < b.size()) {
    if (leaves == 0) throw std::logic_error("prufer decode: no leaf");
    const int v = std::countr_zero(leaves);
    int w;
    if (v < n) {
      if (ia >= a.size()) throw std::logic_error("prufer decode: row code exhausted");
      w = n + a[ia++];
      edges.push_back({v, w - n, rem[v]});
    } else {
      if (ib >= b.size()) throw std::logic_error("prufer decode: column code exhausted");
      w = b[ib++];
      edges.push_back({w, v - n, rem[v]});
    }
    rem[w] -= rem[v];
    leaves &= ~(1u << v);
    alive &= ~(1u << v);
    if (--deg[w] == 1) leaves |= 1u << w;
  }
  const int r = std::countr_zero(alive & ((1u << n) - 1));
  const int c = std::countr_zero(alive >> n);
  edges.push_back({r, c, rem[r]});
}

// Calls f(a, b) for every code pair.
template <class F>
void for_each_code(int n, int m, F&& f) {
  std::vector<int> a(n > 0 ? n - 1 : 0, 0), b(m > 0 ? m - 1 : 0, 0);
  for (;;) {
    f(a, b);
    std::size_t k = 0;
    for (; k < a.size(); ++k) {
      if (++a[k] < m) break;
      a[k] = 0;
    }
    if (k < a.size()) continue;
    for (k = 0; k < b.size(); ++k) {
      if (++b[k] < n) break;
      b[k] = 0;
    }
    if (k == b.size()) return;
  }
}

// Cost of the tree coded by (a, b), or infinity as soon as a peeled flow is
// negative. Same peeling order as decode_tree.
inline double tree_cost(int n, int m, const std::vector<int>& a, const std::vector<int>& b,
                        const std::vector<double>& supply, const std::vector<double>& demand,
                        const std::vector<double>& cost, double tol) {
  int deg[16];
  double rem[16];
  for (int i = 0; i < n; ++i) deg[i] = 1, rem[i] = supply[i];
  for (int j = 0; j < m; ++j) deg[n + j] = 1, rem[n + j] = demand[j];
  for (int x : a) ++deg[n + x];
  for (int x : b) ++deg[x];
  std::uint32_t leaves = 0, alive = (1u << (n + m)) - 1;
  for (int v = 0; v < n + m; ++v)
    if (deg[v] == 1) leaves |= 1u << v;
  std::size_t ia = 0, ib = 0;
  double total = 0.0;
  while (ia < a.size() || ib < b.size()) {
    const int v = std::countr_zero(leaves);
    if (rem[v] < -tol) return std::numeric_limits<double>::infinity();
    int w;
    if (v < n) {
      w = n + a[ia++];
      total += rem[v] * cost[v * m + (w - n)];
    } else {
      w = b[ib++];
      total += rem[v] * cost[w * m + (v - n)];
    }
    rem[w] -= rem[v];
    leaves &= ~(1u << v);
    alive &= ~(1u << v);
    if (--deg[w] == 1) leaves |= 1u << w;
  }
  const int r = std::countr_zero(alive & ((1u << n) - 1));
  const int c = std::countr_zero(alive >> n);
  if (rem[r] < -tol) return std::numeric_limits<double>::infinity();
  return total + rem[r] * cost[r * m + c];
}

// Minimum transport cost by exhaustive vertex enumeration (n, m <= 8).
inline double brute_force_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                    const std::vector<double>& cost, double tol = 1e-12) {
  const int n = static_cast<int>(supply.size()), m = static_cast<int>(demand.size());
  double best = std::numeric_limits<double>::infinity();
  for_each_code(n, m, [&](const std::vector<int>& a, const std::vector<int>& b) {
    best = std::min(best, tree_cost(n, m, a, b, supply, demand, cost, tol));
  });
  return best;
}

}  // namespace oracle
