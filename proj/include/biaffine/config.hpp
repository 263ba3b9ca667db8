#pragma once

#include <map>
#include <string>

#include "biaffine/optim.hpp"
#include "biaffine/recurrent.hpp"

namespace biaffine {

enum class Classifier { kDeepBiaffine, kShallowBiaffine, kShallow300, kMlp };

Classifier classifier_from_string(const std::string& s);
std::string classifier_to_string(Classifier c);

enum class InputDropoutMode { kDefault, kNoWordDropout, kNoTagDropout };

InputDropoutMode input_dropout_from_string(const std::string& s);
std::string input_dropout_to_string(InputDropoutMode m);

/// Flat key=value configuration; the defaults are the model's standard
/// hyperparameters, every ablation axis is a key.
struct Config {
  int embedding_size = 100;
  double embedding_dropout = 0.33;
  int lstm_size = 400;
  double lstm_dropout = 0.33;
  int arc_mlp_size = 500;
  double arc_mlp_dropout = 0.33;
  int label_mlp_size = 100;
  double label_mlp_dropout = 0.33;
  int lstm_depth = 3;
  int mlp_depth = 1;
  double alpha = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.9;
  double adam_eps = 1e-12;
  double anneal_base = 0.75;
  double anneal_interval = 5000.0;
  long t_max = 50000;

  std::string classifier = "deep-biaffine";  // deep-biaffine|shallow-biaffine|shallow-300|mlp
  std::string cell = "lstm";                 // lstm|gru|cif_lstm
  std::string input_dropout = "default";     // default|no-word-dropout|no-tag-dropout
  bool use_tags = true;
  int mlp_attention_hidden = 200;

  long batch_tokens = 2000;
  int min_count = 2;
  unsigned long seed = 1;
  bool eval_exclude_punct = true;

  Classifier classifier_kind() const { return classifier_from_string(classifier); }
  CellKind cell_kind() const { return cell_kind_from_string(cell); }
  /// Recurrent size after variant resolution (shallow-300 pins 300).
  int effective_lstm_size() const;
  /// Width of the token embedding fed to the encoder.
  int encoder_input_size() const { return use_tags ? 2 * embedding_size : embedding_size; }

  AdamConfig adam() const;

  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> to_map() const;
  static Config from_map(const std::map<std::string, std::string>& kv);
};

Config load_config(const std::string& path);
void save_config(const Config& cfg, const std::string& path);

}  // namespace biaffine
