#pragma once

#include <random>
#include <string>
#include <vector>

#include "biaffine/conll.hpp"
#include "biaffine/tensor.hpp"

namespace testutil {

using biaffine::TensorPtr;

inline TensorPtr<double> random_tensor(std::vector<int> shape, std::mt19937_64& rng, bool requires_grad,
                                       double scale = 1.0) {
  auto t = biaffine::zeros<double>(std::move(shape), requires_grad);
  biaffine::fill_uniform(*t, -scale, scale, rng);
  return t;
}

/// A fixed random weight tensor; reducing through it exposes the full
/// Jacobian even for constant-sum outputs (softmax rows). Build it once and
/// reuse it so finite-difference re-evaluations stay deterministic.
inline TensorPtr<double> make_weight(const std::vector<int>& shape, std::mt19937_64& rng) {
  auto w = biaffine::zeros<double>(shape, false);
  biaffine::fill_uniform(*w, -1.0, 1.0, rng);
  return w;
}

inline TensorPtr<double> weighted_sum(const TensorPtr<double>& t, const TensorPtr<double>& w) {
  return biaffine::sum_all(biaffine::mul(t, w));
}

inline biaffine::Sentence make_sentence(std::vector<std::string> words, std::vector<std::string> tags,
                                        std::vector<int> heads, std::vector<std::string> labels) {
  biaffine::Sentence s;
  s.words = std::move(words);
  s.tags = std::move(tags);
  s.heads = std::move(heads);
  s.labels = std::move(labels);
  return s;
}

}  // namespace testutil
