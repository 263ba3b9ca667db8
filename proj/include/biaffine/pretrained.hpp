#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace biaffine {

/// Pretrained word vectors loaded from a text file, one token and `dim`
/// space-separated reals per line. Tokens are lowercased; the first
/// occurrence of a token wins. These rows stay frozen during training.
struct PretrainedVectors {
  int dim = 0;
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> index;
  std::vector<double> data;  // tokens.size() x dim, row-major

  int row(const std::string& lowercased) const {
    auto it = index.find(lowercased);
    return it == index.end() ? -1 : it->second;
  }
  int count() const { return static_cast<int>(tokens.size()); }
};

PretrainedVectors load_pretrained(const std::string& path, int expect_dim);

}  // namespace biaffine
