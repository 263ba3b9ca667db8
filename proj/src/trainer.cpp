#include "biaffine/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>

#include "biaffine/errors.hpp"
#include "biaffine/optim.hpp"

namespace biaffine {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix64(seed ^ mix64(a ^ mix64(b)));
}

// Sentences bucketed by length into token-bounded batches; one optimizer
// step per batch.
std::vector<std::vector<int>> make_batches(const std::vector<Sentence>& train, long batch_tokens) {
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return train[a].size() < train[b].size(); });
  std::vector<std::vector<int>> batches;
  std::vector<int> cur;
  long cur_tokens = 0;
  for (int idx : order) {
    const long n = train[idx].size();
    if (!cur.empty() && cur_tokens + n > batch_tokens) {
      batches.push_back(std::move(cur));
      cur.clear();
      cur_tokens = 0;
    }
    cur.push_back(idx);
    cur_tokens += n;
  }
  if (!cur.empty()) batches.push_back(std::move(cur));
  return batches;
}

struct GoldIds {
  TokenIds tokens;
  std::vector<int> heads;
  std::vector<int> labels;
};

}  // namespace

TrainResult train_model(const Config& cfg, const std::vector<Sentence>& train,
                        const std::vector<Sentence>& dev, const PretrainedVectors* pretrained,
                        std::ostream* log) {
  if (train.empty()) throw ContractError("train_model: empty training set");

  Vocab vocab = build_vocab(train, cfg.min_count);
  std::mt19937_64 init_rng(cfg.seed);
  auto model = ParserModel<float>::build(cfg, vocab, pretrained ? *pretrained : PretrainedVectors{},
                                         init_rng);
  auto params = model.parameters();
  Adam<float> opt(params, cfg.adam());

  std::vector<GoldIds> gold(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    gold[i].tokens = model.resolve(train[i]);
    gold[i].heads = train[i].heads;
    gold[i].labels.reserve(train[i].labels.size());
    for (const auto& l : train[i].labels) gold[i].labels.push_back(vocab.label_id(l));
  }

  auto batches = make_batches(train, cfg.batch_tokens);

  TrainResult result;
  double best_las = -1.0;
  std::vector<std::vector<float>> best_params;
  auto snapshot = [&]() {
    best_params.clear();
    for (const auto& p : params) best_params.push_back(p->data);
  };

  long step = 0;
  for (int epoch = 1; step < cfg.t_max; ++epoch) {
    std::vector<int> batch_order(batches.size());
    std::iota(batch_order.begin(), batch_order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 0xE90C4, static_cast<std::uint64_t>(epoch)));
    std::shuffle(batch_order.begin(), batch_order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    long epoch_deps = 0;
    for (int bi : batch_order) {
      const auto& batch = batches[static_cast<std::size_t>(bi)];
      long total_deps = 0;
      for (int si : batch) total_deps += train[static_cast<std::size_t>(si)].size();
      zero_grads(params);
      double batch_loss = 0.0;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        const GoldIds& g = gold[static_cast<std::size_t>(batch[k])];
        std::mt19937_64 drop_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(step) + 1, k));
        TensorPtr<float> loss;
        try {
          loss = model.loss(g.tokens, g.heads, g.labels, true, drop_rng, Reduction::kSum);
          loss = scale(loss, 1.0f / static_cast<float>(total_deps));
          backward(loss);
        } catch (const NumericError& e) {
          throw NumericError("training diverged at step " + std::to_string(step + 1) + ": " + e.what());
        }
        batch_loss += static_cast<double>(loss->item());
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("training diverged at step " + std::to_string(step + 1));
      }
      opt.step();
      ++step;
      epoch_loss += batch_loss * static_cast<double>(total_deps);
      epoch_deps += total_deps;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.step = step;
    stats.train_loss = epoch_deps > 0 ? epoch_loss / static_cast<double>(epoch_deps) : 0.0;
    stats.lr = lr_at(cfg.adam(), static_cast<double>(step));
    if (!dev.empty()) {
      auto pred = parse_corpus(model, dev, true);
      stats.dev = evaluate(dev, pred, cfg.eval_exclude_punct);
      stats.has_dev = true;
      if (stats.dev.las > best_las) {
        best_las = stats.dev.las;
        result.best_epoch = epoch;
        snapshot();
      }
    }
    result.history.push_back(stats);
    if (log) {
      (*log) << "epoch " << epoch << " step " << step << " loss " << stats.train_loss << " lr "
             << stats.lr;
      if (stats.has_dev) (*log) << " dev_uas " << stats.dev.uas << " dev_las " << stats.dev.las;
      (*log) << "\n" << std::flush;
    }
  }

  if (!best_params.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->data = best_params[i];
  } else {
    result.best_epoch = result.history.empty() ? 0 : result.history.back().epoch;
  }
  result.steps = step;
  result.model = std::move(model);
  return result;
}

std::vector<Sentence> parse_corpus(const ParserModel<float>& model, const std::vector<Sentence>& input,
                                   bool use_mst) {
  std::vector<Sentence> out;
  out.reserve(input.size());
  for (const Sentence& s : input) {
    ParseTree tree = model.parse(model.resolve(s), use_mst);
    Sentence p;
    p.words = s.words;
    p.tags = s.tags;
    p.heads = tree.heads;
    p.labels.reserve(tree.labels.size());
    for (int id : tree.labels) p.labels.push_back(model.vocab.labels[static_cast<std::size_t>(id)]);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace biaffine
