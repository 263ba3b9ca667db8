#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace biaffine {

/// One sentence of a dependency treebank. Tokens are 1-indexed; head 0 is the
/// artificial root. All four vectors share length n.
struct Sentence {
  std::vector<std::string> words;
  std::vector<std::string> tags;
  std::vector<int> heads;
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(words.size()); }
};

/// Reads CoNLL-X / CoNLL-09 style files. Columns used (1-indexed): ID=1,
/// FORM=2, POS=5 with fallback to 4 when 5 is '_', HEAD=7, DEPREL=8.
/// Comment lines and rows with non-integer IDs (multiword / empty nodes)
/// are skipped. Malformed HEAD fields raise DataError naming the line.
std::vector<Sentence> read_conll(const std::string& path);
std::vector<Sentence> read_conll(std::istream& in, const std::string& name);

/// Writes sentences back as 10-column blocks. Reading the result reproduces
/// words, tags, heads and labels exactly.
void write_conll(const std::vector<Sentence>& sentences, const std::string& path);
void write_conll(const std::vector<Sentence>& sentences, std::ostream& out);

}  // namespace biaffine
