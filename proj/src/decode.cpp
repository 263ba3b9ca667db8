#include "biaffine/decode.hpp"

#include <algorithm>
#include <functional>
#include <limits>

#include "biaffine/errors.hpp"

namespace biaffine {

namespace {

constexpr double kForbidden = -1e18;

void check_matrix(const ArcMatrix& arc) {
  const int n = static_cast<int>(arc.size());
  if (n == 0) throw ContractError("decode: empty score matrix");
  for (const auto& row : arc) {
    if (static_cast<int>(row.size()) != n + 1) {
      throw ContractError("decode: arc matrix must be n x (n+1)");
    }
  }
}

// Chu-Liu/Edmonds over a dense score matrix on nodes 0..n (0 = root).
// score[u][v] is the weight of edge u -> v; forbidden edges sit at kForbidden.
// Returns parent[v] for v in 1..n.
std::vector<int> chu_liu_edmonds(std::vector<std::vector<double>> score) {
  const int m = static_cast<int>(score.size());  // nodes including root
  std::vector<int> best_in(m, -1);
  for (int v = 1; v < m; ++v) {
    double best = -std::numeric_limits<double>::infinity();
    for (int u = 0; u < m; ++u) {
      if (u == v) continue;
      if (score[u][v] > best) {
        best = score[u][v];
        best_in[v] = u;
      }
    }
  }

  // Look for a cycle among the greedy best-in edges.
  std::vector<int> color(m, 0);  // 0 unseen, 1 on path, 2 done
  std::vector<int> cycle;
  color[0] = 2;
  for (int start = 1; start < m && cycle.empty(); ++start) {
    if (color[start]) continue;
    int v = start;
    std::vector<int> path;
    while (v != -1 && color[v] == 0) {
      color[v] = 1;
      path.push_back(v);
      v = best_in[v];
    }
    if (v != -1 && color[v] == 1) {
      // Found a cycle; collect it.
      auto it = std::find(path.begin(), path.end(), v);
      cycle.assign(it, path.end());
    }
    for (int u : path) color[u] = 2;
  }

  if (cycle.empty()) {
    return best_in;
  }

  // Contract the cycle into a supernode and recurse.
  std::vector<bool> in_cycle(m, false);
  double cycle_weight = 0.0;
  for (int v : cycle) {
    in_cycle[v] = true;
    cycle_weight += score[best_in[v]][v];
  }
  std::vector<int> node_of(m, -1);  // original node -> contracted index
  int k = 0;
  for (int v = 0; v < m; ++v) {
    if (!in_cycle[v]) node_of[v] = k++;
  }
  const int super = k;  // contracted cycle node
  const int mc = k + 1;

  std::vector<std::vector<double>> sub(mc, std::vector<double>(mc, kForbidden));
  // For edges entering the cycle remember which cycle member they targeted;
  // for edges leaving it, which member they left from.
  std::vector<int> enter_member(mc, -1);
  std::vector<std::vector<int>> leave_member(mc, std::vector<int>(mc, -1));

  for (int u = 0; u < m; ++u) {
    for (int v = 1; v < m; ++v) {
      if (u == v || score[u][v] <= kForbidden) continue;
      if (!in_cycle[u] && !in_cycle[v]) {
        const int cu = node_of[u], cv = node_of[v];
        if (score[u][v] > sub[cu][cv]) sub[cu][cv] = score[u][v];
      } else if (!in_cycle[u] && in_cycle[v]) {
        // Entering the cycle at v: gain edge u->v, lose v's cycle edge.
        const int cu = node_of[u];
        const double w = score[u][v] - score[best_in[v]][v];
        if (w > sub[cu][super]) {
          sub[cu][super] = w;
          enter_member[cu] = v;
        }
      } else if (in_cycle[u] && !in_cycle[v]) {
        const int cv = node_of[v];
        if (score[u][v] > sub[super][cv]) {
          sub[super][cv] = score[u][v];
          leave_member[super][cv] = u;
        }
      }
    }
  }

  std::vector<int> sub_parent = chu_liu_edmonds(sub);

  // Expand back to original nodes.
  std::vector<int> parent(m, -1);
  // Which original node do contracted indices stand for (non-cycle ones)?
  std::vector<int> orig_of(mc, -1);
  for (int v = 0; v < m; ++v) {
    if (!in_cycle[v]) orig_of[node_of[v]] = v;
  }

  int broken = -1;  // cycle member whose best-in edge is replaced
  for (int cv = 1; cv < mc; ++cv) {
    const int cu = sub_parent[cv];
    if (cv == super) {
      broken = enter_member[cu];
      parent[broken] = orig_of[cu];
    } else {
      const int v = orig_of[cv];
      parent[v] = cu == super ? leave_member[super][cv] : orig_of[cu];
    }
  }
  for (int v : cycle) {
    if (v != broken) parent[v] = best_in[v];
  }
  (void)cycle_weight;
  return parent;
}

}  // namespace

bool reaches_root(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  for (int i = 0; i < n; ++i) {
    if (heads[i] < 0 || heads[i] > n) return false;
    int v = i + 1;
    int steps = 0;
    while (v != 0) {
      v = heads[v - 1];
      if (++steps > n) return false;  // cycle
    }
  }
  return true;
}

double tree_score(const ArcMatrix& arc, const std::vector<int>& heads) {
  double total = 0.0;
  for (std::size_t i = 0; i < heads.size(); ++i) total += arc[i][heads[i]];
  return total;
}

std::vector<int> greedy_heads(const ArcMatrix& arc) {
  check_matrix(arc);
  const int n = static_cast<int>(arc.size());
  std::vector<int> heads(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int j = 1; j <= n; ++j) {
      if (arc[i][j] > arc[i][best]) best = j;
    }
    heads[i] = best;
  }
  return heads;
}

std::vector<int> mst_decode(const ArcMatrix& arc, bool single_root) {
  check_matrix(arc);
  const int n = static_cast<int>(arc.size());
  if (n == 1) return {0};

  // Node-indexed score matrix: edge u -> v scores arc[v-1][u].
  auto build = [&](int root_child) {
    std::vector<std::vector<double>> score(n + 1, std::vector<double>(n + 1, kForbidden));
    for (int v = 1; v <= n; ++v) {
      for (int u = 0; u <= n; ++u) {
        if (u == v) continue;
        if (u == 0 && root_child != -1 && v != root_child) continue;
        score[u][v] = arc[v - 1][u];
      }
    }
    return score;
  };

  auto run = [&](int root_child) {
    auto parent = chu_liu_edmonds(build(root_child));
    std::vector<int> heads(n);
    for (int v = 1; v <= n; ++v) heads[v - 1] = parent[v];
    return heads;
  };

  std::vector<int> heads = run(-1);
  if (single_root) {
    int root_children = 0;
    for (int h : heads) root_children += h == 0 ? 1 : 0;
    if (root_children != 1) {
      double best_total = -std::numeric_limits<double>::infinity();
      std::vector<int> best;
      for (int c = 1; c <= n; ++c) {
        auto cand = run(c);
        const double total = tree_score(arc, cand);
        if (total > best_total) {
          best_total = total;
          best = cand;
        }
      }
      heads = best;
    }
  }
  return heads;
}

std::vector<int> brute_force_best_tree(const ArcMatrix& arc, bool single_root) {
  check_matrix(arc);
  const int n = static_cast<int>(arc.size());
  if (n > 7) throw ContractError("brute_force_best_tree: n=" + std::to_string(n) + " too large");

  std::vector<int> heads(n, 0), best;
  double best_score = -std::numeric_limits<double>::infinity();

  // Depth-first enumeration in lexicographic head order; strict improvement
  // keeps the first (lexicographically smallest) optimum.
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      if (!reaches_root(heads)) return;
      if (single_root) {
        int rc = 0;
        for (int h : heads) rc += h == 0 ? 1 : 0;
        if (rc != 1) return;
      }
      const double s = tree_score(arc, heads);
      if (s > best_score) {
        best_score = s;
        best = heads;
      }
      return;
    }
    for (int h = 0; h <= n; ++h) {
      if (h == i + 1) continue;
      heads[i] = h;
      rec(i + 1);
    }
  };
  rec(0);
  return best;
}

std::vector<int> assign_labels(const std::vector<std::vector<double>>& label_scores) {
  std::vector<int> out(label_scores.size());
  for (std::size_t i = 0; i < label_scores.size(); ++i) {
    const auto& row = label_scores[i];
    int best = 0;
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k] > row[best]) best = static_cast<int>(k);
    }
    out[i] = best;
  }
  return out;
}

}  // namespace biaffine
