// Command-line front end: train / parse / eval / gradcheck.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "biaffine/config.hpp"
#include "biaffine/errors.hpp"
#include "biaffine/eval.hpp"
#include "biaffine/gradcheck.hpp"
#include "biaffine/model.hpp"
#include "biaffine/serialize.hpp"
#include "biaffine/toygen.hpp"
#include "biaffine/trainer.hpp"

namespace {

using namespace biaffine;

// mirrors stdout into the model directory's metrics.log
struct Tee : std::streambuf {
  std::streambuf* a = nullptr;
  std::streambuf* b = nullptr;
  int overflow(int c) override {
    if (c != EOF) {
      a->sputc(static_cast<char>(c));
      b->sputc(static_cast<char>(c));
    }
    return c;
  }
};

int run_train(const std::string& config_path, const std::string& train_path,
              const std::string& dev_path, const std::string& out_dir,
              const std::string& embeddings_path, const std::vector<std::string>& overrides) {
  Config cfg = config_path.empty() ? Config{} : load_config(config_path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }

  auto train = read_conll(train_path);
  std::vector<Sentence> dev;
  if (!dev_path.empty()) dev = read_conll(dev_path);

  PretrainedVectors pre;
  if (!embeddings_path.empty()) pre = load_pretrained(embeddings_path, cfg.embedding_size);

  std::filesystem::create_directories(out_dir);
  std::ofstream metrics(std::filesystem::path(out_dir) / "metrics.log");
  Tee tee;
  tee.a = std::cout.rdbuf();
  tee.b = metrics.rdbuf();
  std::ostream log(&tee);

  auto result = train_model(cfg, train, dev, pre.count() ? &pre : nullptr, &log);
  save_model(result.model, out_dir);
  save_config(cfg, (std::filesystem::path(out_dir) / "config.txt").string());
  log << "saved model from epoch " << result.best_epoch << " after " << result.steps << " steps to "
      << out_dir << "\n";
  return 0;
}

int run_parse(const std::string& model_dir, const std::string& input_path,
              const std::string& output_path, bool use_mst) {
  auto model = load_model(model_dir);
  auto input = read_conll(input_path);
  auto parsed = parse_corpus(model, input, use_mst);
  write_conll(parsed, output_path);
  return 0;
}

int run_eval(const std::string& gold_path, const std::string& pred_path, bool exclude_punct) {
  auto gold = read_conll(gold_path);
  auto pred = read_conll(pred_path);
  auto r = evaluate(gold, pred, exclude_punct);
  std::cout << "UAS " << r.uas << "  LAS " << r.las << "  (scored " << r.tokens_scored << ", excluded "
            << r.tokens_excluded << ")\n";
  return 0;
}

// 64-bit end-to-end gradient suite on a tiny model; the same check the test
// suite runs, callable from the shell.
int run_gradcheck(int seeds) {
  ToyGenOptions opts;
  opts.sentences = 3;
  opts.seed = 17;
  opts.tag_noise = 0.0;
  opts.punct = false;
  auto corpus = generate_treebank(opts);
  Vocab vocab = build_vocab(corpus, 1);

  Config cfg;
  cfg.embedding_size = 4;
  cfg.lstm_size = 5;
  cfg.lstm_depth = 1;
  cfg.arc_mlp_size = 4;
  cfg.label_mlp_size = 3;

  bool ok = true;
  for (int seed = 1; seed <= seeds; ++seed) {
    cfg.seed = static_cast<unsigned long>(seed);
    std::mt19937_64 rng(cfg.seed);
    auto model = ParserModel<double>::build(cfg, vocab, PretrainedVectors{}, rng);
    const Sentence& s = corpus[static_cast<std::size_t>(seed) % corpus.size()];
    auto ids = model.resolve(s);
    std::vector<int> gold_labels;
    for (const auto& l : s.labels) gold_labels.push_back(vocab.label_id(l));
    std::mt19937_64 dummy(0);
    auto f = [&]() { return model.loss(ids, s.heads, gold_labels, false, dummy); };
    auto res = grad_check(f, model.named_parameters());
    std::cout << "seed " << seed << ": max relative error " << res.max_rel_err << " (worst "
              << res.worst_param << ")\n";
    ok = ok && res.max_rel_err < 1e-4;
  }
  if (!ok) throw NumericError("gradient check failed");
  std::cout << "gradient check passed on " << seeds << " seeds\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-based dependency parser with deep biaffine attention"};
  app.require_subcommand(1);

  std::string config_path, train_path, dev_path, out_dir, embeddings_path;
  std::vector<std::string> overrides;
  auto* train = app.add_subcommand("train", "train a parser");
  train->add_option("--config", config_path, "key=value config file");
  train->add_option("--train", train_path, "training treebank (CoNLL)")->required();
  train->add_option("--dev", dev_path, "development treebank (CoNLL)");
  train->add_option("--out", out_dir, "output model directory")->required();
  train->add_option("--embeddings", embeddings_path, "pretrained embedding text file");
  train->add_option("--set", overrides, "override a config key, e.g. --set lstm_size=200");

  std::string model_dir, input_path, output_path;
  bool no_mst = false;
  auto* parse = app.add_subcommand("parse", "parse a treebank with a trained model");
  parse->add_option("--model", model_dir, "model directory")->required();
  parse->add_option("--input", input_path, "input CoNLL file")->required();
  parse->add_option("--output", output_path, "output CoNLL file")->required();
  parse->add_flag("--no-mst", no_mst, "greedy per-token heads instead of the spanning-tree decoder");

  std::string gold_path, pred_path;
  bool include_punct = false;
  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  eval->add_option("--gold", gold_path, "gold CoNLL file")->required();
  eval->add_option("--pred", pred_path, "predicted CoNLL file")->required();
  eval->add_flag("--include-punct", include_punct, "score punctuation tokens too");

  int seeds = 5;
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "run the 64-bit gradient suite");
  gradcheck_cmd->add_option("--seeds", seeds, "number of random initializations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train) return run_train(config_path, train_path, dev_path, out_dir, embeddings_path, overrides);
    if (*parse) return run_parse(model_dir, input_path, output_path, !no_mst);
    if (*eval) return run_eval(gold_path, pred_path, !include_punct);
    if (*gradcheck_cmd) return run_gradcheck(seeds);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
