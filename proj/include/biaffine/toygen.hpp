#pragma once

#include <vector>

#include "biaffine/conll.hpp"

namespace biaffine {

/// Options for the synthetic English-like treebank generator used by the
/// smoke and desk-scale experiments. Sentences come from a small dependency
/// grammar (Stanford-style labels) whose prepositional attachments are
/// decided lexically, so word identity genuinely matters. A fraction of the
/// POS column is corrupted to imitate predicted tags; heads and labels stay
/// gold.
struct ToyGenOptions {
  int sentences = 1500;
  unsigned long seed = 7;
  double tag_noise = 0.08;
  double attach_noise = 0.15;  // fraction of PPs attached against their lexical class
  bool punct = true;           // append a final '.' attached to the root verb
};

std::vector<Sentence> generate_treebank(const ToyGenOptions& opts);

}  // namespace biaffine
