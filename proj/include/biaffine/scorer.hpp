#pragma once

#include <random>
#include <vector>

#include "biaffine/errors.hpp"
#include "biaffine/tensor.hpp"

namespace biaffine {

/// Additive mask for impossible arcs (a token heading itself). Large and
/// finite so every downstream value stays finite.
template <typename T>
constexpr T self_mask_value() {
  return T(-1e9);
}

// ---------------------------------------------------------------------------
// dimension-reducing MLPs
// ---------------------------------------------------------------------------

/// Four single-hidden-layer ReLU maps that strip the recurrent states down to
/// what each decision needs: arc-dep / arc-head at one width, label-dep /
/// label-head at a (much) smaller one. Output dropout uses one mask per
/// matrix per sentence, shared across timesteps.
template <typename T>
struct MlpBank {
  int input = 0;
  int arc_dim = 0;
  int label_dim = 0;
  int depth = 1;
  T arc_dropout = T(0.33);
  T label_dropout = T(0.33);

  struct Map {
    std::vector<TensorPtr<T>> w;  // depth matrices
    std::vector<TensorPtr<T>> b;
  };
  Map arc_dep, arc_head, label_dep, label_head;
};

template <typename T>
inline typename MlpBank<T>::Map make_mlp_map(int input, int output, int depth, std::mt19937_64& rng) {
  typename MlpBank<T>::Map m;
  for (int l = 0; l < depth; ++l) {
    const int d_in = l == 0 ? input : output;
    auto w = zeros<T>({d_in, output}, true);
    fill_glorot(*w, rng);
    m.w.push_back(w);
    m.b.push_back(zeros<T>({output}, true));
  }
  return m;
}

template <typename T>
inline MlpBank<T> make_mlp_bank(int input, int arc_dim, int label_dim, int depth, T arc_dropout,
                                T label_dropout, std::mt19937_64& rng) {
  MlpBank<T> bank;
  bank.input = input;
  bank.arc_dim = arc_dim;
  bank.label_dim = label_dim;
  bank.depth = depth;
  bank.arc_dropout = arc_dropout;
  bank.label_dropout = label_dropout;
  bank.arc_dep = make_mlp_map<T>(input, arc_dim, depth, rng);
  bank.arc_head = make_mlp_map<T>(input, arc_dim, depth, rng);
  bank.label_dep = make_mlp_map<T>(input, label_dim, depth, rng);
  bank.label_head = make_mlp_map<T>(input, label_dim, depth, rng);
  return bank;
}

template <typename T>
struct MlpOut {
  TensorPtr<T> arc_dep, arc_head;      // (n+1) x arc_dim
  TensorPtr<T> label_dep, label_head;  // (n+1) x label_dim
};

template <typename T>
inline TensorPtr<T> run_mlp_map(const TensorPtr<T>& r, const typename MlpBank<T>::Map& m, T dropout,
                                bool training, std::mt19937_64& rng) {
  TensorPtr<T> h = r;
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    h = relu(add_row(matmul(h, m.w[l]), m.b[l]));
  }
  if (training && dropout > T(0)) {
    std::vector<T> mask(static_cast<std::size_t>(h->shape[1]), T(1) / (T(1) - dropout));
    std::bernoulli_distribution die(static_cast<double>(dropout));
    for (auto& v : mask) {
      if (die(rng)) v = T(0);
    }
    h = mul_row(h, make_tensor<T>({h->shape[1]}, std::move(mask)));
  }
  return h;
}

template <typename T>
inline MlpOut<T> mlp_forward(const TensorPtr<T>& r, const MlpBank<T>& bank, bool training,
                             std::mt19937_64& rng) {
  if (r->rank() != 2 || r->shape[1] != bank.input) {
    throw DimensionError("mlp_forward: input " + shape_str(*r) + " does not match MLP input " +
                         std::to_string(bank.input));
  }
  MlpOut<T> out;
  out.arc_dep = run_mlp_map(r, bank.arc_dep, bank.arc_dropout, training, rng);
  out.arc_head = run_mlp_map(r, bank.arc_head, bank.arc_dropout, training, rng);
  out.label_dep = run_mlp_map(r, bank.label_dep, bank.label_dropout, training, rng);
  out.label_head = run_mlp_map(r, bank.label_head, bank.label_dropout, training, rng);
  return out;
}

// ---------------------------------------------------------------------------
// arc scorers
// ---------------------------------------------------------------------------

/// Variable-class biaffine arc scorer. The weight is stored bias-augmented on
/// the dependent side, (dim+1) x dim, so score(i, j) decomposes into a
/// bilinear head-given-dependent term plus a head prior:
///   score(i, j) = h_head_j . U1 h_dep_i + h_head_j . u2
template <typename T>
struct ArcBiaffine {
  int dim = 0;
  TensorPtr<T> w;  // (dim+1) x dim; last row is u2

  TensorPtr<T> u1_view() const { return slice_rows(w, 0, dim); }
  TensorPtr<T> u2_view() const { return slice_rows(w, dim, dim + 1); }
};

template <typename T>
inline ArcBiaffine<T> make_arc_biaffine(int dim) {
  ArcBiaffine<T> p;
  p.dim = dim;
  p.w = zeros<T>({dim + 1, dim}, true);
  return p;
}

template <typename T>
inline TensorPtr<T> append_ones_col(const TensorPtr<T>& m) {
  return concat_cols(m, full<T>({m->shape[0], 1}, T(1)));
}

namespace detail {

template <typename T>
inline TensorPtr<T> self_mask_tensor(int n) {
  std::vector<T> mask(static_cast<std::size_t>(n) * (n + 1), T(0));
  for (int i = 0; i < n; ++i) mask[static_cast<std::size_t>(i) * (n + 1) + i + 1] = self_mask_value<T>();
  return make_tensor<T>({n, n + 1}, std::move(mask));
}

}  // namespace detail

/// Scores every candidate head for every dependent. Inputs carry the root at
/// row 0; the output drops the root as a dependent: row i (0-based) is token
/// i+1, column j is head candidate j. Self-head entries are masked.
template <typename T>
inline TensorPtr<T> arc_scores_biaffine(const TensorPtr<T>& h_dep, const TensorPtr<T>& h_head,
                                        const ArcBiaffine<T>& p) {
  if (h_dep->shape != h_head->shape || h_dep->rank() != 2 || h_dep->shape[1] != p.dim) {
    throw DimensionError("arc_scores: inputs " + shape_str(*h_dep) + " / " + shape_str(*h_head) +
                         " do not match scorer dim " + std::to_string(p.dim));
  }
  const int n = h_dep->shape[0] - 1;
  if (n < 1) throw ContractError("arc_scores: need at least one dependent");
  // (H_dep ⊕ 1) W H_head^T, dependents on rows, head candidates on columns.
  auto full_scores = matmul(matmul(append_ones_col(h_dep), p.w), transpose(h_head));
  return add(slice_rows(full_scores, 1, n + 1), detail::self_mask_tensor<T>(n));
}

/// MLP attention scorer: score(i, j) = v . relu(W [r_j ⊕ r_i] + b).
/// W is stored split by operand so the hidden layer assembles by broadcast.
template <typename T>
struct MlpAttentionArc {
  int input = 0;
  int hidden = 200;
  TensorPtr<T> w_head;  // input x hidden
  TensorPtr<T> w_dep;   // input x hidden
  TensorPtr<T> b;       // hidden
  TensorPtr<T> v;       // hidden x 1
};

template <typename T>
inline MlpAttentionArc<T> make_mlp_attention_arc(int input, int hidden, std::mt19937_64& rng) {
  MlpAttentionArc<T> p;
  p.input = input;
  p.hidden = hidden;
  p.w_head = zeros<T>({input, hidden}, true);
  fill_glorot(*p.w_head, rng);
  p.w_dep = zeros<T>({input, hidden}, true);
  fill_glorot(*p.w_dep, rng);
  p.b = zeros<T>({hidden}, true);
  p.v = zeros<T>({hidden, 1}, true);
  return p;
}

template <typename T>
inline TensorPtr<T> arc_scores_mlp(const TensorPtr<T>& r, const MlpAttentionArc<T>& p) {
  if (r->rank() != 2 || r->shape[1] != p.input) {
    throw DimensionError("arc_scores_mlp: input " + shape_str(*r) + " does not match scorer input " +
                         std::to_string(p.input));
  }
  const int n = r->shape[0] - 1;
  if (n < 1) throw ContractError("arc_scores_mlp: need at least one dependent");
  auto head_part = add_row(matmul(r, p.w_head), p.b);  // (n+1) x hidden
  auto dep_part = matmul(r, p.w_dep);                  // (n+1) x hidden
  std::vector<TensorPtr<T>> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    auto dep_row = reshape(slice_rows(dep_part, i, i + 1), {p.hidden});
    auto hidden = relu(add_row(head_part, dep_row));        // (n+1) x hidden
    rows.push_back(transpose(matmul(hidden, p.v)));         // 1 x (n+1)
  }
  return add(stack_rows(rows), detail::self_mask_tensor<T>(n));
}

// ---------------------------------------------------------------------------
// label scorers
// ---------------------------------------------------------------------------

/// Fixed-class biaffine label scorer:
///   s_i[k] = ĥ_head . U1[k] ĥ_dep + (h_head ⊕ h_dep) . U2[:,k] + b[k]
/// with ĥ = h ⊕ 1 on both sides of the bilinear tensor. u1 is stored
/// flattened as (dim+1) x classes*(dim+1); column k*(dim+1)+m is the
/// head-coordinate m of class k.
template <typename T>
struct LabelBiaffine {
  int dim = 0;
  int classes = 0;
  TensorPtr<T> u1;  // (dim+1) x classes*(dim+1)
  TensorPtr<T> u2;  // 2*dim x classes
  TensorPtr<T> b;   // classes
};

template <typename T>
inline LabelBiaffine<T> make_label_biaffine(int dim, int classes) {
  LabelBiaffine<T> p;
  p.dim = dim;
  p.classes = classes;
  p.u1 = zeros<T>({dim + 1, classes * (dim + 1)}, true);
  p.u2 = zeros<T>({2 * dim, classes}, true);
  p.b = zeros<T>({classes}, true);
  return p;
}

/// Label scores for each dependent given its chosen head (gold heads during
/// training, predicted heads at inference). Rows of the output follow the
/// dependent order 1..n; heads[i] indexes rows of the (n+1)-row inputs.
template <typename T>
inline TensorPtr<T> label_scores(const TensorPtr<T>& h_dep, const TensorPtr<T>& h_head,
                                 const std::vector<int>& heads, const LabelBiaffine<T>& p) {
  if (h_dep->shape != h_head->shape || h_dep->rank() != 2 || h_dep->shape[1] != p.dim) {
    throw DimensionError("label_scores: inputs " + shape_str(*h_dep) + " / " + shape_str(*h_head) +
                         " do not match scorer dim " + std::to_string(p.dim));
  }
  const int n = h_dep->shape[0] - 1;
  if (static_cast<int>(heads.size()) != n) {
    throw ContractError("label_scores: expected " + std::to_string(n) + " heads, got " +
                        std::to_string(heads.size()));
  }
  for (int h : heads) {
    if (h < 0 || h > n) {
      throw ContractError("label_scores: head index " + std::to_string(h) + " out of range [0, " +
                          std::to_string(n) + "]");
    }
  }
  auto dep = slice_rows(h_dep, 1, n + 1);       // n x dim
  auto head = gather_rows(h_head, heads);       // n x dim
  auto dep_aug = append_ones_col(dep);          // n x dim+1
  auto head_aug = append_ones_col(head);

  // Bilinear term for all classes in one contraction.
  auto t1 = matmul(dep_aug, p.u1);                                    // n x classes*(dim+1)
  auto prod = mul(t1, tile_cols(head_aug, p.classes));                // align head coords per class
  auto bilinear = reshape(row_sums(reshape(prod, {n * p.classes, p.dim + 1})), {n, p.classes});

  auto affine = matmul(concat_cols(head, dep), p.u2);  // n x classes
  return add_row(add(bilinear, affine), p.b);
}

/// MLP-based label classifier for the attention-ablation variant: a one
/// hidden layer network over [r_head ⊕ r_dep] with an affine output layer.
template <typename T>
struct MlpAttentionLabel {
  int input = 0;
  int hidden = 200;
  int classes = 0;
  TensorPtr<T> w;   // 2*input x hidden
  TensorPtr<T> b;   // hidden
  TensorPtr<T> w2;  // hidden x classes
  TensorPtr<T> b2;  // classes
};

template <typename T>
inline MlpAttentionLabel<T> make_mlp_attention_label(int input, int hidden, int classes,
                                                     std::mt19937_64& rng) {
  MlpAttentionLabel<T> p;
  p.input = input;
  p.hidden = hidden;
  p.classes = classes;
  p.w = zeros<T>({2 * input, hidden}, true);
  fill_glorot(*p.w, rng);
  p.b = zeros<T>({hidden}, true);
  p.w2 = zeros<T>({hidden, classes}, true);
  p.b2 = zeros<T>({classes}, true);
  return p;
}

template <typename T>
inline TensorPtr<T> label_scores_mlp(const TensorPtr<T>& r, const std::vector<int>& heads,
                                     const MlpAttentionLabel<T>& p) {
  const int n = r->shape[0] - 1;
  if (static_cast<int>(heads.size()) != n) {
    throw ContractError("label_scores_mlp: expected " + std::to_string(n) + " heads, got " +
                        std::to_string(heads.size()));
  }
  auto dep = slice_rows(r, 1, n + 1);
  auto head = gather_rows(r, heads);
  auto hidden = relu(add_row(matmul(concat_cols(head, dep), p.w), p.b));
  return add_row(matmul(hidden, p.w2), p.b2);
}

// ---------------------------------------------------------------------------
// loss
// ---------------------------------------------------------------------------

/// Mean over dependents of arc cross-entropy plus label cross-entropy, with
/// the label term conditioned on the gold head. `arc` must already carry the
/// self-head mask; a gold head equal to the dependent itself is rejected.
template <typename T>
inline TensorPtr<T> parser_loss(const TensorPtr<T>& arc, const TensorPtr<T>& label,
                                const std::vector<int>& gold_heads, const std::vector<int>& gold_labels,
                                Reduction reduction = Reduction::kMean) {
  const int n = arc->shape[0];
  if (arc->shape[1] != n + 1) {
    throw DimensionError("parser_loss: arc matrix must be n x (n+1), got " + shape_str(*arc));
  }
  if (static_cast<int>(gold_heads.size()) != n || label->shape[0] != n ||
      static_cast<int>(gold_labels.size()) != n) {
    throw ContractError("parser_loss: gold annotation length mismatch for n=" + std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    if (gold_heads[i] == i + 1) {
      throw ContractError("parser_loss: gold head of token " + std::to_string(i + 1) +
                          " is the token itself");
    }
  }
  return add(cross_entropy_rows(arc, gold_heads, reduction),
             cross_entropy_rows(label, gold_labels, reduction));
}

}  // namespace biaffine
