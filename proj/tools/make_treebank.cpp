// Generates the synthetic treebank fixtures used by the smoke and
// desk-scale experiments: a train file and a held-out dev split.

#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "biaffine/conll.hpp"
#include "biaffine/toygen.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic dependency treebank generator"};

  std::string train_path, dev_path;
  int sentences = 1500;
  double holdout = 0.1;
  unsigned long seed = 7;
  double tag_noise = 0.08;
  double attach_noise = 0.15;
  bool no_punct = false;

  app.add_option("--train", train_path, "output training file")->required();
  app.add_option("--dev", dev_path, "output held-out file");
  app.add_option("--sentences", sentences, "total sentences to generate");
  app.add_option("--holdout", holdout, "fraction held out for --dev");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--tag-noise", tag_noise, "fraction of POS tags corrupted");
  app.add_option("--attach-noise", attach_noise, "fraction of PPs attached against their lexical class");
  app.add_flag("--no-punct", no_punct, "omit the sentence-final period");

  CLI11_PARSE(app, argc, argv);

  biaffine::ToyGenOptions opts;
  opts.sentences = sentences;
  opts.seed = seed;
  opts.tag_noise = tag_noise;
  opts.attach_noise = attach_noise;
  opts.punct = !no_punct;
  auto corpus = biaffine::generate_treebank(opts);

  const auto split = dev_path.empty()
                         ? corpus.size()
                         : corpus.size() - static_cast<std::size_t>(corpus.size() * holdout);
  std::vector<biaffine::Sentence> train(corpus.begin(), corpus.begin() + split);
  biaffine::write_conll(train, train_path);
  std::cout << "wrote " << train.size() << " sentences to " << train_path << "\n";
  if (!dev_path.empty()) {
    std::vector<biaffine::Sentence> dev(corpus.begin() + split, corpus.end());
    biaffine::write_conll(dev, dev_path);
    std::cout << "wrote " << dev.size() << " sentences to " << dev_path << "\n";
  }
  return 0;
}
