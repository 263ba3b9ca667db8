#pragma once

#include <set>
#include <string>
#include <vector>

#include "biaffine/conll.hpp"

namespace biaffine {

struct EvalReport {
  double uas = 0.0;  // percent
  double las = 0.0;  // percent
  long tokens_scored = 0;
  long tokens_excluded = 0;
};

/// Gold POS tags treated as punctuation when exclusion is on.
const std::set<std::string>& punct_tags();

/// Attachment scores of `pred` against `gold`. Files must align sentence by
/// sentence and token by token; punctuation exclusion goes by the gold tag.
EvalReport evaluate(const std::vector<Sentence>& gold, const std::vector<Sentence>& pred,
                    bool exclude_punct);

}  // namespace biaffine
