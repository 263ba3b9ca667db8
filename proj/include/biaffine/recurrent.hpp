#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "biaffine/errors.hpp"
#include "biaffine/tensor.hpp"

namespace biaffine {

enum class CellKind { kLstm, kGru, kCifLstm };

inline CellKind cell_kind_from_string(const std::string& s) {
  if (s == "lstm") return CellKind::kLstm;
  if (s == "gru") return CellKind::kGru;
  if (s == "cif_lstm" || s == "cif-lstm") return CellKind::kCifLstm;
  throw ConfigError("unknown recurrent cell '" + s + "' (expected lstm, gru or cif_lstm)");
}

inline std::string cell_kind_to_string(CellKind k) {
  switch (k) {
    case CellKind::kLstm: return "lstm";
    case CellKind::kGru: return "gru";
    case CellKind::kCifLstm: return "cif_lstm";
  }
  return "?";
}

/// Gate weights for one direction of one layer.
///
/// Gate blocks are laid out side by side in w_in / w_rec / bias:
///   lstm:     [input | forget | output | candidate]
///   gru:      [update | reset | candidate]
///   cif_lstm: [input | output | candidate]      (forget = 1 - input)
/// The coupled cell's candidate is affine, with tanh kept only on the cell
/// state read-out, so its transition parameter count matches the GRU's.
template <typename T>
struct CellParams {
  CellKind kind = CellKind::kLstm;
  int input_size = 0;
  int hidden = 0;
  TensorPtr<T> w_in;   // input_size x gates*hidden
  TensorPtr<T> w_rec;  // hidden x gates*hidden
  TensorPtr<T> bias;   // gates*hidden
  TensorPtr<T> h0;     // 1 x hidden, learned initial state
  TensorPtr<T> c0;     // 1 x hidden, lstm / cif_lstm only

  int gate_blocks() const { return kind == CellKind::kLstm ? 4 : 3; }
  bool has_cell_state() const { return kind != CellKind::kGru; }

  /// Transition parameters only (w_in + w_rec + bias):
  /// gates * (input_size + hidden + 1) * hidden.
  std::size_t gate_param_count() const {
    return static_cast<std::size_t>(gate_blocks()) *
           (static_cast<std::size_t>(input_size) + hidden + 1) * hidden;
  }
};

template <typename T>
struct CellState {
  TensorPtr<T> h;  // 1 x hidden
  TensorPtr<T> c;  // 1 x hidden, null for gru
};

/// One dropout mask per stream, sampled once per sentence and reused at every
/// timestep. Entries are 0 or 1/(1-rate). Empty vectors mean identity.
template <typename T>
struct DirectionMasks {
  std::vector<T> input;      // input_size
  std::vector<T> recurrent;  // hidden
};

template <typename T>
struct VariationalMasks {
  std::vector<std::array<DirectionMasks<T>, 2>> layers;  // [layer][direction]
};

template <typename T>
struct RecurrentStack {
  int depth = 3;
  int hidden = 400;
  int input_size = 200;
  T dropout_rate = T(0.33);
  std::vector<std::array<CellParams<T>, 2>> layers;  // [layer][forward, backward]

  int output_size() const { return 2 * hidden; }
};

template <typename T>
inline CellParams<T> make_cell(CellKind kind, int input_size, int hidden, std::mt19937_64& rng) {
  CellParams<T> p;
  p.kind = kind;
  p.input_size = input_size;
  p.hidden = hidden;
  const int g = p.gate_blocks();
  p.w_in = zeros<T>({input_size, g * hidden}, true);
  fill_glorot(*p.w_in, rng);
  // Orthogonal recurrent weights, one square block per gate.
  p.w_rec = zeros<T>({hidden, g * hidden}, true);
  {
    auto block = zeros<T>({hidden, hidden});
    for (int b = 0; b < g; ++b) {
      fill_orthogonal(*block, rng);
      for (int i = 0; i < hidden; ++i)
        for (int j = 0; j < hidden; ++j)
          p.w_rec->data[static_cast<std::size_t>(i) * g * hidden + b * hidden + j] = block->at(i, j);
    }
  }
  p.bias = zeros<T>({g * hidden}, true);
  if (kind == CellKind::kLstm) {
    // forget gate bias +1
    for (int j = 0; j < hidden; ++j) p.bias->data[static_cast<std::size_t>(hidden) + j] = T(1);
  }
  p.h0 = zeros<T>({1, hidden}, true);
  if (p.has_cell_state()) p.c0 = zeros<T>({1, hidden}, true);
  return p;
}

template <typename T>
inline RecurrentStack<T> make_stack(CellKind kind, int depth, int hidden, int input_size, T dropout_rate,
                                    std::mt19937_64& rng) {
  RecurrentStack<T> s;
  s.depth = depth;
  s.hidden = hidden;
  s.input_size = input_size;
  s.dropout_rate = dropout_rate;
  for (int l = 0; l < depth; ++l) {
    const int d_in = l == 0 ? input_size : 2 * hidden;
    s.layers.push_back({make_cell<T>(kind, d_in, hidden, rng), make_cell<T>(kind, d_in, hidden, rng)});
  }
  return s;
}

template <typename T>
inline std::vector<T> sample_mask(int size, T rate, std::mt19937_64& rng) {
  std::vector<T> m(static_cast<std::size_t>(size), T(1) / (T(1) - rate));
  std::bernoulli_distribution die(static_cast<double>(rate));
  for (auto& v : m) {
    if (die(rng)) v = T(0);
  }
  return m;
}

template <typename T>
inline VariationalMasks<T> sample_variational_masks(const RecurrentStack<T>& stack, T rate,
                                                    std::mt19937_64& rng) {
  if (rate >= T(1) || rate < T(0)) {
    throw ConfigError("recurrent dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  VariationalMasks<T> masks;
  masks.layers.resize(stack.layers.size());
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    for (int dir = 0; dir < 2; ++dir) {
      if (rate == T(0)) {
        masks.layers[l][dir].input.assign(static_cast<std::size_t>(stack.layers[l][dir].input_size), T(1));
        masks.layers[l][dir].recurrent.assign(static_cast<std::size_t>(stack.hidden), T(1));
      } else {
        masks.layers[l][dir].input = sample_mask(stack.layers[l][dir].input_size, rate, rng);
        masks.layers[l][dir].recurrent = sample_mask(stack.hidden, rate, rng);
      }
    }
  }
  return masks;
}

/// One recurrent step. `x` is a 1 x input_size row with the input mask
/// already applied; `rec_mask` (empty = identity) gates every use of the
/// previous hidden state inside the transition, while the carried cell state
/// and the convex GRU interpolation stay unmasked.
template <typename T>
inline CellState<T> cell_step(const CellParams<T>& p, const TensorPtr<T>& x, const CellState<T>& state,
                              const std::vector<T>& rec_mask) {
  if (x->rank() != 2 || x->shape[0] != 1 || x->shape[1] != p.input_size) {
    throw ContractError("cell_step: input shape " + shape_str(*x) + " does not match input size " +
                        std::to_string(p.input_size));
  }
  if (state.h->rank() != 2 || state.h->shape[1] != p.hidden) {
    throw ContractError("cell_step: state shape " + shape_str(*state.h) + " does not match hidden size " +
                        std::to_string(p.hidden));
  }
  const int h = p.hidden;
  auto h_gate = state.h;
  if (!rec_mask.empty()) {
    h_gate = mul_row(state.h, make_tensor<T>({h}, std::vector<T>(rec_mask)));
  }

  switch (p.kind) {
    case CellKind::kLstm: {
      auto pre = add_row(add(matmul(x, p.w_in), matmul(h_gate, p.w_rec)), p.bias);
      auto i = sigmoid(slice_cols(pre, 0, h));
      auto f = sigmoid(slice_cols(pre, h, 2 * h));
      auto o = sigmoid(slice_cols(pre, 2 * h, 3 * h));
      auto cand = tanh(slice_cols(pre, 3 * h, 4 * h));
      auto c = add(mul(f, state.c), mul(i, cand));
      return {mul(o, tanh(c)), c};
    }
    case CellKind::kGru: {
      auto pre_in = add_row(matmul(x, p.w_in), p.bias);
      auto zr_rec = matmul(h_gate, slice_cols(p.w_rec, 0, 2 * h));
      auto z = sigmoid(add(slice_cols(pre_in, 0, h), slice_cols(zr_rec, 0, h)));
      auto r = sigmoid(add(slice_cols(pre_in, h, 2 * h), slice_cols(zr_rec, h, 2 * h)));
      auto cand = tanh(add(slice_cols(pre_in, 2 * h, 3 * h),
                           matmul(mul(r, h_gate), slice_cols(p.w_rec, 2 * h, 3 * h))));
      auto one = full<T>({1, h}, T(1));
      auto h_new = add(mul(z, state.h), mul(sub(one, z), cand));
      return {h_new, nullptr};
    }
    case CellKind::kCifLstm: {
      auto pre = add_row(add(matmul(x, p.w_in), matmul(h_gate, p.w_rec)), p.bias);
      auto i = sigmoid(slice_cols(pre, 0, h));
      auto o = sigmoid(slice_cols(pre, h, 2 * h));
      auto cand = slice_cols(pre, 2 * h, 3 * h);  // no tanh on the candidate
      auto one = full<T>({1, h}, T(1));
      auto c = add(mul(sub(one, i), state.c), mul(i, cand));
      return {mul(o, tanh(c)), c};
    }
  }
  throw ContractError("cell_step: unreachable cell kind");
}

namespace detail {

template <typename T>
inline std::vector<TensorPtr<T>> run_direction(const CellParams<T>& p, const TensorPtr<T>& x_masked,
                                               const std::vector<T>& rec_mask, bool reverse) {
  const int steps = x_masked->shape[0];
  std::vector<TensorPtr<T>> outputs(static_cast<std::size_t>(steps));
  CellState<T> state{p.h0, p.c0};
  for (int s = 0; s < steps; ++s) {
    const int t = reverse ? steps - 1 - s : s;
    state = cell_step(p, slice_rows(x_masked, t, t + 1), state, rec_mask);
    outputs[static_cast<std::size_t>(t)] = state.h;
  }
  return outputs;
}

}  // namespace detail

/// Runs the full bidirectional stack over an (n+1) x input_size embedding
/// matrix, returning (n+1) x 2*hidden recurrent states. `masks` may be null
/// (inference); when given it must carry one mask set per layer/direction.
template <typename T>
inline TensorPtr<T> bilstm_forward(const TensorPtr<T>& x, const RecurrentStack<T>& stack,
                                   const VariationalMasks<T>* masks) {
  if (x->rank() != 2 || x->shape[1] != stack.input_size) {
    throw DimensionError("bilstm_forward: input " + shape_str(*x) + " does not match stack input size " +
                         std::to_string(stack.input_size));
  }
  if (masks && masks->layers.size() != stack.layers.size()) {
    throw ContractError("bilstm_forward: mask layer count mismatch");
  }
  static const std::vector<T> kNoMask;
  TensorPtr<T> layer_in = x;
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    std::array<std::vector<TensorPtr<T>>, 2> outs;
    for (int dir = 0; dir < 2; ++dir) {
      auto in = layer_in;
      const std::vector<T>& in_mask = masks ? masks->layers[l][dir].input : kNoMask;
      const std::vector<T>& rec_mask = masks ? masks->layers[l][dir].recurrent : kNoMask;
      if (!in_mask.empty()) {
        in = mul_row(in, make_tensor<T>({static_cast<int>(in_mask.size())}, std::vector<T>(in_mask)));
      }
      outs[dir] = detail::run_direction(stack.layers[l][dir], in, rec_mask, dir == 1);
    }
    std::vector<TensorPtr<T>> rows(outs[0].size());
    for (std::size_t t = 0; t < outs[0].size(); ++t) rows[t] = concat_cols(outs[0][t], outs[1][t]);
    layer_in = stack_rows(rows);
  }
  return layer_in;
}

/// Training entry point: samples fresh variational masks for this sentence.
template <typename T>
inline TensorPtr<T> bilstm_forward(const TensorPtr<T>& x, const RecurrentStack<T>& stack, bool training,
                                   std::mt19937_64& rng) {
  if (!training || stack.dropout_rate <= T(0)) return bilstm_forward<T>(x, stack, nullptr);
  auto masks = sample_variational_masks(stack, stack.dropout_rate, rng);
  return bilstm_forward(x, stack, &masks);
}

}  // namespace biaffine
