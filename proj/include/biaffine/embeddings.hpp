#pragma once

#include <random>
#include <utility>
#include <vector>

#include "biaffine/conll.hpp"
#include "biaffine/errors.hpp"
#include "biaffine/pretrained.hpp"
#include "biaffine/tensor.hpp"
#include "biaffine/vocab.hpp"

namespace biaffine {

/// Token-level input dropout: words and tags are dropped independently; when
/// exactly one stream survives it is scaled by two, and when both drop the
/// token embeds to zeros. Inference applies neither dropout nor scaling.
struct InputDropoutSpec {
  double word_rate = 0.33;
  double tag_rate = 0.33;
  bool drop_words = true;
  bool drop_tags = true;

  double effective_word_rate() const { return drop_words ? word_rate : 0.0; }
  double effective_tag_rate() const { return drop_tags ? tag_rate : 0.0; }
};

/// Per-token table rows for one sentence, root prepended at position 0.
/// word[i] is the trained row or -1 (no trained row; the pretrained row or
/// the OOV entry covers it), pretrained[i] is the frozen row or -1.
struct TokenIds {
  std::vector<int> word;
  std::vector<int> pretrained;
  std::vector<int> tag;

  int n() const { return static_cast<int>(word.size()) - 1; }
};

/// Resolves forms against the trained vocab and the pretrained index.
/// A form present in neither table maps to the OOV entry (trained row).
inline TokenIds resolve_tokens(const Sentence& s, const Vocab& vocab, const PretrainedVectors* pre) {
  TokenIds ids;
  const int n = s.size();
  ids.word.reserve(static_cast<std::size_t>(n) + 1);
  ids.pretrained.reserve(static_cast<std::size_t>(n) + 1);
  ids.tag.reserve(static_cast<std::size_t>(n) + 1);

  ids.word.push_back(Vocab::kRootId);
  ids.pretrained.push_back(pre ? pre->row("<root>") : -1);
  ids.tag.push_back(Vocab::kRootId);
  for (int i = 0; i < n; ++i) {
    const std::string lower = lowercase(s.words[i]);
    int trained = vocab.word_id(s.words[i]);
    const int pretrained = pre ? pre->row(lower) : -1;
    if (trained < 0 && pretrained < 0) trained = Vocab::kOovId;
    ids.word.push_back(trained);
    ids.pretrained.push_back(pretrained);
    ids.tag.push_back(vocab.tag_id(s.tags[i]));
  }
  return ids;
}

/// Embedding tables. The trained word table and the tag table learn; the
/// pretrained table is frozen and its rows are summed elementwise into the
/// trained ones at lookup time.
template <typename T>
struct EmbeddingTables {
  TensorPtr<T> trained;     // vocab words x e, requires_grad
  TensorPtr<T> pretrained;  // pretrained tokens x e, frozen (may have 0 rows)
  TensorPtr<T> tags;        // vocab tags x e, requires_grad

  int dim() const { return trained->shape[1]; }
};

template <typename T>
inline EmbeddingTables<T> build_embedding_tables(const Vocab& vocab, const PretrainedVectors* pre,
                                                 int dim, std::mt19937_64& rng) {
  if (pre && pre->dim != dim) {
    throw DimensionError("pretrained dimension " + std::to_string(pre->dim) +
                         " does not match embedding size " + std::to_string(dim));
  }
  EmbeddingTables<T> t;
  t.trained = zeros<T>({vocab.word_count(), dim}, true);
  fill_normal(*t.trained, T(0), T(0.01), rng);
  t.tags = zeros<T>({vocab.tag_count(), dim}, true);
  fill_normal(*t.tags, T(0), T(0.01), rng);
  const int vp = pre ? pre->count() : 0;
  t.pretrained = zeros<T>({vp, dim}, false);
  if (pre) {
    for (std::size_t i = 0; i < pre->data.size(); ++i) t.pretrained->data[i] = static_cast<T>(pre->data[i]);
  }
  return t;
}

/// The compensation rule for one token: drop one stream and the survivor is
/// scaled by two; drop both and the input is all zeros.
template <typename T>
inline std::pair<T, T> input_dropout_factors(bool drop_word, bool drop_tag) {
  if (drop_word && drop_tag) return {T(0), T(0)};
  if (drop_word) return {T(0), T(2)};
  if (drop_tag) return {T(2), T(0)};
  return {T(1), T(1)};
}

/// Embeds one sentence with explicit per-token drop decisions (exact path,
/// used directly by the forced-mask tests).
template <typename T>
inline TensorPtr<T> embed_sentence_with_drops(const TokenIds& ids, const EmbeddingTables<T>& tables,
                                              const std::vector<bool>& drop_word,
                                              const std::vector<bool>& drop_tag, bool use_tags = true) {
  const int rows = static_cast<int>(ids.word.size());
  if (rows < 2) throw ContractError("embed_sentence: sentence must contain at least one token");
  if (static_cast<int>(drop_word.size()) != rows || static_cast<int>(drop_tag.size()) != rows) {
    throw ContractError("embed_sentence: drop decision count does not match token count");
  }

  auto words = gather_rows(tables.trained, ids.word);
  if (tables.pretrained->shape[0] > 0) {
    words = add(words, gather_rows(tables.pretrained, ids.pretrained));
  }
  if (!use_tags) {
    std::vector<T> factors(static_cast<std::size_t>(rows), T(1));
    bool any = false;
    for (int i = 0; i < rows; ++i) {
      if (drop_word[i]) {
        factors[i] = T(0);
        any = true;
      }
    }
    return any ? scale_rows(words, factors) : words;
  }

  auto tags = gather_rows(tables.tags, ids.tag);
  std::vector<T> word_factors(static_cast<std::size_t>(rows), T(1));
  std::vector<T> tag_factors(static_cast<std::size_t>(rows), T(1));
  bool any = false;
  for (int i = 0; i < rows; ++i) {
    const auto [wf, tf] = input_dropout_factors<T>(drop_word[i], drop_tag[i]);
    word_factors[i] = wf;
    tag_factors[i] = tf;
    any = any || drop_word[i] || drop_tag[i];
  }
  if (!any) return concat_cols(words, tags);
  return concat_cols(scale_rows(words, word_factors), scale_rows(tags, tag_factors));
}

/// Embeds one sentence as an (n+1) x 2e matrix (or (n+1) x e without tags),
/// sampling the token-level input dropout above when training.
template <typename T>
inline TensorPtr<T> embed_sentence(const TokenIds& ids, const EmbeddingTables<T>& tables,
                                   const InputDropoutSpec& drop, bool training, std::mt19937_64& rng,
                                   bool use_tags = true) {
  const int rows = static_cast<int>(ids.word.size());
  std::vector<bool> drop_word(static_cast<std::size_t>(rows), false);
  std::vector<bool> drop_tag(static_cast<std::size_t>(rows), false);
  if (training) {
    const double wr = drop.effective_word_rate();
    const double tr = drop.effective_tag_rate();
    std::bernoulli_distribution word_die(wr > 0.0 ? wr : 0.0);
    std::bernoulli_distribution tag_die(tr > 0.0 ? tr : 0.0);
    for (int i = 0; i < rows; ++i) {
      drop_word[i] = wr > 0.0 && word_die(rng);
      drop_tag[i] = use_tags && tr > 0.0 && tag_die(rng);
    }
  }
  return embed_sentence_with_drops(ids, tables, drop_word, drop_tag, use_tags);
}

}  // namespace biaffine
