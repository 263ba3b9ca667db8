#include "biaffine/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "biaffine/errors.hpp"

namespace biaffine {

std::string lowercase(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

// Deterministic id assignment: by descending count, ties broken lexically.
std::vector<std::string> rank_by_count(const std::map<std::string, long>& counts, long min_count) {
  std::vector<std::pair<std::string, long>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (const auto& [form, c] : items) {
    if (c >= min_count) out.push_back(form);
  }
  return out;
}

}  // namespace

int Vocab::word_id(const std::string& form) const {
  auto it = word_to_id.find(lowercase(form));
  return it == word_to_id.end() ? -1 : it->second;
}

int Vocab::tag_id(const std::string& tag) const {
  auto it = tag_to_id.find(tag);
  return it == tag_to_id.end() ? kUnkTagId : it->second;
}

int Vocab::label_id(const std::string& label) const {
  auto it = label_to_id.find(label);
  if (it == label_to_id.end()) throw ContractError("unknown relation label '" + label + "'");
  return it->second;
}

Vocab build_vocab(const std::vector<Sentence>& train, int min_count) {
  if (train.empty()) throw ContractError("build_vocab: empty training set");

  std::map<std::string, long> word_counts, tag_counts, label_counts;
  for (const Sentence& s : train) {
    for (int i = 0; i < s.size(); ++i) {
      ++word_counts[lowercase(s.words[i])];
      ++tag_counts[s.tags[i]];
      ++label_counts[s.labels[i]];
    }
  }

  Vocab v;
  v.words = {"<root>", "<oov>"};
  for (const auto& w : rank_by_count(word_counts, min_count)) v.words.push_back(w);
  v.tags = {"<root>", "<unk>"};
  for (const auto& t : rank_by_count(tag_counts, 1)) v.tags.push_back(t);
  v.labels = rank_by_count(label_counts, 1);

  for (std::size_t i = 0; i < v.words.size(); ++i) v.word_to_id[v.words[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < v.tags.size(); ++i) v.tag_to_id[v.tags[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < v.labels.size(); ++i) v.label_to_id[v.labels[i]] = static_cast<int>(i);
  return v;
}

}  // namespace biaffine
