#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "biaffine/conll.hpp"

namespace biaffine {

std::string lowercase(const std::string& s);

/// Vocabulary over a training treebank. Word ids index the trained embedding
/// table; words are lowercased. Only forms seen at least `min_count` times
/// get their own row; everything else falls back to pretrained rows or the
/// OOV entry at embedding time.
struct Vocab {
  static constexpr int kRootId = 0;    // same slot in the word and tag tables
  static constexpr int kOovId = 1;     // word table
  static constexpr int kUnkTagId = 1;  // tag table

  std::vector<std::string> words;  // index = trained word id
  std::vector<std::string> tags;
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> word_to_id;
  std::unordered_map<std::string, int> tag_to_id;
  std::unordered_map<std::string, int> label_to_id;

  /// Trained row for a (not yet lowercased) form, or -1 when the form has no
  /// trained row. OOV substitution happens later, once pretrained membership
  /// is known.
  int word_id(const std::string& form) const;
  /// Tag id; unseen tags map to the reserved unknown-tag entry.
  int tag_id(const std::string& tag) const;
  /// Label id; unseen labels are a contract violation (training data only).
  int label_id(const std::string& label) const;

  int word_count() const { return static_cast<int>(words.size()); }
  int tag_count() const { return static_cast<int>(tags.size()); }
  int label_count() const { return static_cast<int>(labels.size()); }
};

Vocab build_vocab(const std::vector<Sentence>& train, int min_count = 2);

}  // namespace biaffine
