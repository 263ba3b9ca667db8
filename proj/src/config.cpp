#include "biaffine/config.hpp"

#include <fstream>
#include <sstream>

#include "biaffine/errors.hpp"

namespace biaffine {

Classifier classifier_from_string(const std::string& s) {
  if (s == "deep-biaffine") return Classifier::kDeepBiaffine;
  if (s == "shallow-biaffine") return Classifier::kShallowBiaffine;
  if (s == "shallow-300") return Classifier::kShallow300;
  if (s == "mlp") return Classifier::kMlp;
  throw ConfigError("unknown classifier '" + s +
                    "' (expected deep-biaffine, shallow-biaffine, shallow-300 or mlp)");
}

std::string classifier_to_string(Classifier c) {
  switch (c) {
    case Classifier::kDeepBiaffine: return "deep-biaffine";
    case Classifier::kShallowBiaffine: return "shallow-biaffine";
    case Classifier::kShallow300: return "shallow-300";
    case Classifier::kMlp: return "mlp";
  }
  return "?";
}

InputDropoutMode input_dropout_from_string(const std::string& s) {
  if (s == "default") return InputDropoutMode::kDefault;
  if (s == "no-word-dropout") return InputDropoutMode::kNoWordDropout;
  if (s == "no-tag-dropout") return InputDropoutMode::kNoTagDropout;
  throw ConfigError("unknown input_dropout '" + s +
                    "' (expected default, no-word-dropout or no-tag-dropout)");
}

std::string input_dropout_to_string(InputDropoutMode m) {
  switch (m) {
    case InputDropoutMode::kDefault: return "default";
    case InputDropoutMode::kNoWordDropout: return "no-word-dropout";
    case InputDropoutMode::kNoTagDropout: return "no-tag-dropout";
  }
  return "?";
}

int Config::effective_lstm_size() const {
  return classifier_kind() == Classifier::kShallow300 ? 300 : lstm_size;
}

AdamConfig Config::adam() const {
  AdamConfig a;
  a.alpha = alpha;
  a.beta1 = beta1;
  a.beta2 = beta2;
  a.eps = adam_eps;
  a.anneal_base = anneal_base;
  a.anneal_interval = anneal_interval;
  a.t_max = t_max;
  return a;
}

namespace {

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "' expects true/false, got '" + v + "'");
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  if (key == "embedding_size") embedding_size = to_int(key, value);
  else if (key == "embedding_dropout") embedding_dropout = to_double(key, value);
  else if (key == "lstm_size") lstm_size = to_int(key, value);
  else if (key == "lstm_dropout") lstm_dropout = to_double(key, value);
  else if (key == "arc_mlp_size") arc_mlp_size = to_int(key, value);
  else if (key == "arc_mlp_dropout") arc_mlp_dropout = to_double(key, value);
  else if (key == "label_mlp_size") label_mlp_size = to_int(key, value);
  else if (key == "label_mlp_dropout") label_mlp_dropout = to_double(key, value);
  else if (key == "lstm_depth") lstm_depth = to_int(key, value);
  else if (key == "mlp_depth") mlp_depth = to_int(key, value);
  else if (key == "alpha") alpha = to_double(key, value);
  else if (key == "beta1") beta1 = to_double(key, value);
  else if (key == "beta2") beta2 = to_double(key, value);
  else if (key == "adam_eps") adam_eps = to_double(key, value);
  else if (key == "anneal_base") anneal_base = to_double(key, value);
  else if (key == "anneal_interval") anneal_interval = to_double(key, value);
  else if (key == "t_max") t_max = to_long(key, value);
  else if (key == "classifier") classifier = value, (void)classifier_from_string(value);
  else if (key == "cell") cell = value, (void)cell_kind_from_string(value);
  else if (key == "input_dropout") input_dropout = value, (void)input_dropout_from_string(value);
  else if (key == "use_tags") use_tags = to_bool(key, value);
  else if (key == "mlp_attention_hidden") mlp_attention_hidden = to_int(key, value);
  else if (key == "batch_tokens") batch_tokens = to_long(key, value);
  else if (key == "min_count") min_count = to_int(key, value);
  else if (key == "seed") seed = static_cast<unsigned long>(to_long(key, value));
  else if (key == "eval_exclude_punct") eval_exclude_punct = to_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");

  if (embedding_dropout < 0 || embedding_dropout >= 1 || lstm_dropout < 0 || lstm_dropout >= 1 ||
      arc_mlp_dropout < 0 || arc_mlp_dropout >= 1 || label_mlp_dropout < 0 || label_mlp_dropout >= 1) {
    throw ConfigError("dropout rates must lie in [0, 1)");
  }
}

std::map<std::string, std::string> Config::to_map() const {
  std::map<std::string, std::string> kv;
  kv["embedding_size"] = std::to_string(embedding_size);
  kv["embedding_dropout"] = fmt(embedding_dropout);
  kv["lstm_size"] = std::to_string(lstm_size);
  kv["lstm_dropout"] = fmt(lstm_dropout);
  kv["arc_mlp_size"] = std::to_string(arc_mlp_size);
  kv["arc_mlp_dropout"] = fmt(arc_mlp_dropout);
  kv["label_mlp_size"] = std::to_string(label_mlp_size);
  kv["label_mlp_dropout"] = fmt(label_mlp_dropout);
  kv["lstm_depth"] = std::to_string(lstm_depth);
  kv["mlp_depth"] = std::to_string(mlp_depth);
  kv["alpha"] = fmt(alpha);
  kv["beta1"] = fmt(beta1);
  kv["beta2"] = fmt(beta2);
  kv["adam_eps"] = fmt(adam_eps);
  kv["anneal_base"] = fmt(anneal_base);
  kv["anneal_interval"] = fmt(anneal_interval);
  kv["t_max"] = std::to_string(t_max);
  kv["classifier"] = classifier;
  kv["cell"] = cell;
  kv["input_dropout"] = input_dropout;
  kv["use_tags"] = use_tags ? "true" : "false";
  kv["mlp_attention_hidden"] = std::to_string(mlp_attention_hidden);
  kv["batch_tokens"] = std::to_string(batch_tokens);
  kv["min_count"] = std::to_string(min_count);
  kv["seed"] = std::to_string(seed);
  kv["eval_exclude_punct"] = eval_exclude_punct ? "true" : "false";
  return kv;
}

Config Config::from_map(const std::map<std::string, std::string>& kv) {
  Config cfg;
  for (const auto& [k, v] : kv) cfg.set(k, v);
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  Config cfg;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value, got '" + t + "'");
    }
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

void save_config(const Config& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& [k, v] : cfg.to_map()) out << k << "=" << v << "\n";
}

}  // namespace biaffine
