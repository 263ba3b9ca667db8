#include "biaffine/toygen.hpp"

#include <cmath>
#include <random>
#include <string>

namespace biaffine {

namespace {

const std::vector<std::string> kDeterminers = {"the", "a", "every", "some", "this", "that", "each", "one"};
const std::vector<std::string> kAdjectives = {
    "big",   "small",  "red",    "happy",  "old",     "young",  "quick",  "lazy",
    "bright", "dark",  "tall",   "short",  "loud",    "quiet",  "strange", "gentle",
    "brave", "calm",   "clever", "distant", "eager",  "faint",  "grim",   "hollow",
    "iron",  "jolly",  "keen",   "lively", "mellow",  "narrow", "pale",   "rough"};
const std::vector<std::string> kNouns = {
    "dog",     "cat",     "bird",    "fish",    "child",   "teacher", "doctor",  "farmer",
    "river",   "mountain", "book",   "letter",  "song",    "story",   "garden",  "house",
    "street",  "city",    "horse",   "rabbit",  "tiger",   "lion",    "table",   "chair",
    "window",  "door",    "flower",  "tree",    "cloud",   "star",    "friend",  "neighbor",
    "artist",  "baker",   "captain", "dancer",  "engineer", "guard",  "hunter",  "judge",
    "king",    "lantern", "market",  "nurse",   "orchard", "pilot",   "queen",   "ranger",
    "sailor",  "tailor",  "uncle",   "valley",  "wagon",   "meadow",  "bridge",  "castle",
    "forest",  "harbor",  "island",  "tower",   "village", "winter",  "summer",  "shadow"};
const std::vector<std::string> kNames = {"Casey", "Kim",    "Alex",  "Jordan", "Robin", "Morgan",
                                         "Taylor", "Riley", "Quinn", "Avery",  "Blake", "Drew",
                                         "Emery", "Finley", "Harper", "Rowan"};
const std::vector<std::string> kTransVerbs = {
    "hugged",  "saw",     "found",   "chased",  "praised", "helped",  "admired", "followed",
    "greeted", "trusted", "carried", "watched", "feared",  "ignored", "joined",  "kissed",
    "lifted",  "missed",  "noticed", "painted"};
const std::vector<std::string> kIntransVerbs = {"slept",   "smiled",   "waited",   "arrived",
                                                "laughed", "wandered", "vanished", "stumbled",
                                                "danced",  "listened", "paused",   "rested"};
// Forms that occur both as nouns and as (transitive) verbs; the root can
// only be found from context for these.
const std::vector<std::string> kAmbiguous = {"watch", "guard", "hunt",  "judge", "dance", "march",
                                             "paint", "star",  "guide", "trade", "visit", "escort"};
// Attachment is lexical: the first group modifies the verb, the second the
// nearest preceding noun. Tags alone cannot decide it.
const std::vector<std::string> kVerbPreps = {"in", "on", "under", "behind", "through", "toward"};
const std::vector<std::string> kNounPreps = {"near", "beside", "above", "across", "from", "of"};
const std::vector<std::string> kAdverbs = {"quietly", "quickly", "slowly",  "gladly", "barely",
                                           "often",   "rarely",  "soon",    "almost", "gently",
                                           "proudly", "sadly"};

struct Tok {
  std::string form, tag, label;
  int head = -1;  // filled once positions are final
};

class Sampler {
 public:
  explicit Sampler(unsigned long seed) : rng_(seed) {}

  // Zipf-flavored pick so a long tail of forms stays rare.
  const std::string& pick(const std::vector<std::string>& pool) {
    std::vector<double> w(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k) w[k] = 1.0 / std::pow(static_cast<double>(k) + 1.5, 1.1);
    std::discrete_distribution<int> d(w.begin(), w.end());
    return pool[static_cast<std::size_t>(d(rng_))];
  }

  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

 private:
  std::mt19937_64 rng_;
};

// Appends a noun phrase; returns the index of its head token.
int gen_np(Sampler& s, std::vector<Tok>& toks) {
  if (s.chance(0.2)) {
    toks.push_back({s.pick(kNames), "NNP", "", -1});
    return static_cast<int>(toks.size()) - 1;
  }
  std::vector<int> modifiers;
  if (s.chance(0.65)) {
    toks.push_back({s.pick(kDeterminers), "DT", "det", -1});
    modifiers.push_back(static_cast<int>(toks.size()) - 1);
  }
  int adjectives = 0;
  while (adjectives < 2 && s.chance(0.3)) {
    toks.push_back({s.pick(kAdjectives), "JJ", "amod", -1});
    modifiers.push_back(static_cast<int>(toks.size()) - 1);
    ++adjectives;
  }
  toks.push_back({s.chance(0.18) ? s.pick(kAmbiguous) : s.pick(kNouns), "NN", "", -1});
  const int head = static_cast<int>(toks.size()) - 1;
  for (int m : modifiers) toks[static_cast<std::size_t>(m)].head = head;
  return head;
}

// Appends "IN NP"; the preposition attaches to `verb` or `noun` depending on
// its lexical class, except for an `attach_noise` fraction that goes against
// the class (irreducible exceptions, present in train and dev alike).
// Returns the index of the NP head inside the PP so a following PP can
// attach to it. `noun` = -1 forces the verb class; `verb` = -1 (pre-verbal
// position) forces the noun class.
int gen_pp(Sampler& s, std::vector<Tok>& toks, int verb, int noun, double attach_noise) {
  bool to_noun = noun >= 0 && (verb < 0 || s.chance(0.5));
  const std::string prep_form = s.pick(to_noun ? kNounPreps : kVerbPreps);
  if (verb >= 0 && noun >= 0 && s.chance(attach_noise)) to_noun = !to_noun;
  toks.push_back({prep_form, "IN", "prep", to_noun ? noun : verb});
  const int prep = static_cast<int>(toks.size()) - 1;
  const int obj = gen_np(s, toks);
  toks[static_cast<std::size_t>(obj)].head = prep;
  toks[static_cast<std::size_t>(obj)].label = "pobj";
  return obj;
}

Sentence gen_sentence(Sampler& s, bool punct, double attach_noise) {
  std::vector<Tok> toks;
  const int subj = gen_np(s, toks);
  // Subject-attached PP: long nsubj dependency over the PP span.
  if (s.chance(0.3)) gen_pp(s, toks, -1, subj, attach_noise);

  const bool transitive = s.chance(0.55);
  const bool pre_adverb = s.chance(0.15);
  if (pre_adverb) toks.push_back({s.pick(kAdverbs), "RB", "advmod", -1});
  const std::string verb_form = transitive && s.chance(0.25)
                                    ? s.pick(kAmbiguous)
                                    : s.pick(transitive ? kTransVerbs : kIntransVerbs);
  toks.push_back({verb_form, "VBD", "root", -1});
  const int verb = static_cast<int>(toks.size()) - 1;
  if (pre_adverb) toks[static_cast<std::size_t>(verb) - 1].head = verb;
  toks[static_cast<std::size_t>(subj)].head = verb;
  toks[static_cast<std::size_t>(subj)].label = "nsubj";

  int obj = -1;
  if (transitive) {
    obj = gen_np(s, toks);
    toks[static_cast<std::size_t>(obj)].head = verb;
    toks[static_cast<std::size_t>(obj)].label = "dobj";
  }
  // Up to three chained PPs; each attaches to the verb or the nearest
  // preceding noun according to the preposition.
  int last_noun = obj;
  if (s.chance(transitive ? 0.6 : 0.5)) {
    last_noun = gen_pp(s, toks, verb, last_noun, attach_noise);
    if (s.chance(0.4)) {
      last_noun = gen_pp(s, toks, verb, last_noun, attach_noise);
      if (s.chance(0.3)) gen_pp(s, toks, verb, last_noun, attach_noise);
    }
  }
  if (s.chance(transitive ? 0.2 : 0.35)) {
    toks.push_back({s.pick(kAdverbs), "RB", "advmod", verb});
  }
  if (punct) {
    toks.push_back({".", ".", "punct", verb});
  }

  Sentence out;
  for (const Tok& t : toks) {
    out.words.push_back(t.form);
    out.tags.push_back(t.tag);
    out.heads.push_back(t.head + 1);  // root verb carries -1 -> 0
    out.labels.push_back(t.label);
  }
  return out;
}

void corrupt_tags(Sampler& s, Sentence& sent, double rate) {
  for (int i = 0; i < sent.size(); ++i) {
    if (sent.tags[i] == "." || !s.chance(rate)) continue;
    const std::string& t = sent.tags[i];
    if (t == "NN") sent.tags[i] = s.chance(0.5) ? "JJ" : "VBD";
    else if (t == "NNP") sent.tags[i] = "NN";
    else if (t == "JJ") sent.tags[i] = s.chance(0.5) ? "NN" : "RB";
    else if (t == "VBD") sent.tags[i] = "NN";
    else if (t == "IN") sent.tags[i] = "RB";
    else if (t == "RB") sent.tags[i] = s.chance(0.5) ? "JJ" : "IN";
    else if (t == "DT") sent.tags[i] = "IN";
  }
}

}  // namespace

std::vector<Sentence> generate_treebank(const ToyGenOptions& opts) {
  Sampler s(opts.seed);
  std::vector<Sentence> out;
  out.reserve(static_cast<std::size_t>(opts.sentences));
  for (int i = 0; i < opts.sentences; ++i) {
    Sentence sent = gen_sentence(s, opts.punct, opts.attach_noise);
    if (opts.tag_noise > 0) corrupt_tags(s, sent, opts.tag_noise);
    out.push_back(std::move(sent));
  }
  return out;
}

}  // namespace biaffine
