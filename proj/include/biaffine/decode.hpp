#pragma once

#include <vector>

namespace biaffine {

/// Arc scores for decoding: row i (0-based) is dependent token i+1, column j
/// is head candidate j with 0 = root. Self-head entries are expected to be
/// masked to a very low value by the scorer.
using ArcMatrix = std::vector<std::vector<double>>;

struct ParseTree {
  std::vector<int> heads;   // heads[i] in [0, n], token i+1's head
  std::vector<int> labels;  // label ids, may be empty until assigned
  bool is_tree = false;
};

/// True iff every token reaches the root by following heads (no cycles).
bool reaches_root(const std::vector<int>& heads);

/// Per-dependent argmax, lowest index on ties. May produce cycles.
std::vector<int> greedy_heads(const ArcMatrix& arc);

/// Maximum spanning arborescence rooted at node 0 (Chu-Liu/Edmonds with
/// recursive cycle contraction). With single_root, exactly one token attaches
/// to the root: each candidate root child is tried and the best total kept.
std::vector<int> mst_decode(const ArcMatrix& arc, bool single_root = true);

/// Exhaustive oracle: enumerates all (n+1)^n head assignments, keeping the
/// best-scoring (single-rooted, if requested) tree; ties break toward the
/// lexicographically smallest head sequence. n must stay small.
std::vector<int> brute_force_best_tree(const ArcMatrix& arc, bool single_root);

double tree_score(const ArcMatrix& arc, const std::vector<int>& heads);

/// Row argmax over label scores, lowest index on ties.
std::vector<int> assign_labels(const std::vector<std::vector<double>>& label_scores);

}  // namespace biaffine
