#include "biaffine/eval.hpp"

#include "biaffine/errors.hpp"

namespace biaffine {

const std::set<std::string>& punct_tags() {
  static const std::set<std::string> kPunct = {"``", "''", ":", ",", "."};
  return kPunct;
}

EvalReport evaluate(const std::vector<Sentence>& gold, const std::vector<Sentence>& pred,
                    bool exclude_punct) {
  if (gold.size() != pred.size()) {
    throw DataError("evaluate: sentence counts differ (" + std::to_string(gold.size()) + " gold vs " +
                    std::to_string(pred.size()) + " predicted)");
  }
  EvalReport r;
  long correct_heads = 0, correct_both = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const Sentence& g = gold[s];
    const Sentence& p = pred[s];
    if (g.size() != p.size()) {
      throw DataError("evaluate: sentence " + std::to_string(s) + " has " + std::to_string(g.size()) +
                      " gold tokens vs " + std::to_string(p.size()) + " predicted");
    }
    for (int i = 0; i < g.size(); ++i) {
      if (exclude_punct && punct_tags().count(g.tags[i])) {
        ++r.tokens_excluded;
        continue;
      }
      ++r.tokens_scored;
      if (g.heads[i] == p.heads[i]) {
        ++correct_heads;
        if (g.labels[i] == p.labels[i]) ++correct_both;
      }
    }
  }
  if (r.tokens_scored > 0) {
    r.uas = 100.0 * static_cast<double>(correct_heads) / static_cast<double>(r.tokens_scored);
    r.las = 100.0 * static_cast<double>(correct_both) / static_cast<double>(r.tokens_scored);
  }
  return r;
}

}  // namespace biaffine
