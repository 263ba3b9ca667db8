#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "biaffine/config.hpp"
#include "biaffine/eval.hpp"
#include "biaffine/model.hpp"
#include "biaffine/pretrained.hpp"

namespace biaffine {

struct EpochStats {
  int epoch = 0;
  long step = 0;
  double train_loss = 0.0;
  double lr = 0.0;
  EvalReport dev;
  bool has_dev = false;
};

struct TrainResult {
  ParserModel<float> model;  // best dev-LAS parameters
  std::vector<EpochStats> history;
  long steps = 0;
  int best_epoch = 0;
};

/// Trains until the first epoch boundary at or past t_max, logging dev
/// UAS/LAS per epoch and keeping the best dev-LAS parameters. Deterministic
/// for a fixed config seed.
TrainResult train_model(const Config& cfg, const std::vector<Sentence>& train,
                        const std::vector<Sentence>& dev, const PretrainedVectors* pretrained,
                        std::ostream* log);

/// Parses a corpus with a frozen model; input order is preserved and gold
/// heads/labels in the input are ignored.
std::vector<Sentence> parse_corpus(const ParserModel<float>& model, const std::vector<Sentence>& input,
                                   bool use_mst);

}  // namespace biaffine
