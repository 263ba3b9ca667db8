#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "biaffine/config.hpp"
#include "biaffine/decode.hpp"
#include "biaffine/embeddings.hpp"
#include "biaffine/recurrent.hpp"
#include "biaffine/scorer.hpp"
#include "biaffine/vocab.hpp"

namespace biaffine {

/// The full parser: embeddings, bidirectional recurrent encoder, and the
/// configured arc/label classifier variant.
template <typename T>
struct ParserModel {
  Config cfg;
  Vocab vocab;
  PretrainedVectors pretrained;  // kept for token resolution; rows frozen

  EmbeddingTables<T> embeddings;
  RecurrentStack<T> stack;

  // deep-biaffine only
  MlpBank<T> mlps;
  // deep / shallow variants
  ArcBiaffine<T> arc;
  LabelBiaffine<T> label;
  // mlp variant
  MlpAttentionArc<T> mlp_arc;
  MlpAttentionLabel<T> mlp_label;

  Classifier variant() const { return cfg.classifier_kind(); }
  bool is_biaffine() const { return variant() != Classifier::kMlp; }
  bool is_deep() const { return variant() == Classifier::kDeepBiaffine; }

  InputDropoutSpec input_dropout() const {
    InputDropoutSpec d;
    d.word_rate = cfg.embedding_dropout;
    d.tag_rate = cfg.embedding_dropout;
    const auto mode = input_dropout_from_string(cfg.input_dropout);
    d.drop_words = mode != InputDropoutMode::kNoWordDropout;
    d.drop_tags = mode != InputDropoutMode::kNoTagDropout;
    return d;
  }

  static ParserModel<T> build(const Config& cfg, const Vocab& vocab, PretrainedVectors pretrained,
                              std::mt19937_64& rng) {
    ParserModel<T> m;
    m.cfg = cfg;
    m.vocab = vocab;
    m.pretrained = std::move(pretrained);
    const int h = cfg.effective_lstm_size();
    m.embeddings = build_embedding_tables<T>(vocab, m.pretrained.count() ? &m.pretrained : nullptr,
                                             cfg.embedding_size, rng);
    m.stack = make_stack<T>(cfg.cell_kind(), cfg.lstm_depth, h, cfg.encoder_input_size(),
                            static_cast<T>(cfg.lstm_dropout), rng);
    const int c = vocab.label_count();
    switch (cfg.classifier_kind()) {
      case Classifier::kDeepBiaffine:
        m.mlps = make_mlp_bank<T>(2 * h, cfg.arc_mlp_size, cfg.label_mlp_size, cfg.mlp_depth,
                                  static_cast<T>(cfg.arc_mlp_dropout),
                                  static_cast<T>(cfg.label_mlp_dropout), rng);
        m.arc = make_arc_biaffine<T>(cfg.arc_mlp_size);
        m.label = make_label_biaffine<T>(cfg.label_mlp_size, c);
        break;
      case Classifier::kShallowBiaffine:
      case Classifier::kShallow300:
        m.arc = make_arc_biaffine<T>(2 * h);
        m.label = make_label_biaffine<T>(2 * h, c);
        break;
      case Classifier::kMlp:
        m.mlp_arc = make_mlp_attention_arc<T>(2 * h, cfg.mlp_attention_hidden, rng);
        m.mlp_label = make_mlp_attention_label<T>(2 * h, cfg.mlp_attention_hidden, c, rng);
        break;
    }
    return m;
  }

  std::vector<std::pair<std::string, TensorPtr<T>>> named_parameters() const {
    std::vector<std::pair<std::string, TensorPtr<T>>> out;
    out.emplace_back("embeddings.words", embeddings.trained);
    if (cfg.use_tags) out.emplace_back("embeddings.tags", embeddings.tags);
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
      for (int dir = 0; dir < 2; ++dir) {
        const std::string base = "encoder.layer" + std::to_string(l) + (dir == 0 ? ".fwd." : ".bwd.");
        const CellParams<T>& c = stack.layers[l][dir];
        out.emplace_back(base + "w_in", c.w_in);
        out.emplace_back(base + "w_rec", c.w_rec);
        out.emplace_back(base + "bias", c.bias);
        out.emplace_back(base + "h0", c.h0);
        if (c.c0) out.emplace_back(base + "c0", c.c0);
      }
    }
    auto add_map = [&out](const std::string& base, const typename MlpBank<T>::Map& m) {
      for (std::size_t l = 0; l < m.w.size(); ++l) {
        out.emplace_back(base + ".w" + std::to_string(l), m.w[l]);
        out.emplace_back(base + ".b" + std::to_string(l), m.b[l]);
      }
    };
    switch (cfg.classifier_kind()) {
      case Classifier::kDeepBiaffine:
        add_map("mlp.arc_dep", mlps.arc_dep);
        add_map("mlp.arc_head", mlps.arc_head);
        add_map("mlp.label_dep", mlps.label_dep);
        add_map("mlp.label_head", mlps.label_head);
        [[fallthrough]];
      case Classifier::kShallowBiaffine:
      case Classifier::kShallow300:
        out.emplace_back("arc.w", arc.w);
        out.emplace_back("label.u1", label.u1);
        out.emplace_back("label.u2", label.u2);
        out.emplace_back("label.b", label.b);
        break;
      case Classifier::kMlp:
        out.emplace_back("mlp_arc.w_head", mlp_arc.w_head);
        out.emplace_back("mlp_arc.w_dep", mlp_arc.w_dep);
        out.emplace_back("mlp_arc.b", mlp_arc.b);
        out.emplace_back("mlp_arc.v", mlp_arc.v);
        out.emplace_back("mlp_label.w", mlp_label.w);
        out.emplace_back("mlp_label.b", mlp_label.b);
        out.emplace_back("mlp_label.w2", mlp_label.w2);
        out.emplace_back("mlp_label.b2", mlp_label.b2);
        break;
    }
    return out;
  }

  std::vector<TensorPtr<T>> parameters() const {
    std::vector<TensorPtr<T>> out;
    for (auto& [name, p] : named_parameters()) out.push_back(p);
    return out;
  }

  TokenIds resolve(const Sentence& s) const {
    return resolve_tokens(s, vocab, pretrained.count() ? &pretrained : nullptr);
  }

  /// Per-sentence forward state: the masked arc score matrix plus whatever
  /// the label classifier needs once heads are chosen.
  struct Scores {
    int n = 0;
    TensorPtr<T> arc;                  // n x (n+1), self-heads masked
    TensorPtr<T> label_dep, label_head;  // biaffine variants: (n+1) x d_label
    TensorPtr<T> encoder;              // mlp variant keeps R for labels
  };

  Scores score(const TokenIds& ids, bool training, std::mt19937_64& rng) const {
    Scores s;
    s.n = ids.n();
    auto x = embed_sentence(ids, embeddings, input_dropout(), training, rng, cfg.use_tags);
    auto r = bilstm_forward(x, stack, training, rng);
    switch (cfg.classifier_kind()) {
      case Classifier::kDeepBiaffine: {
        auto h = mlp_forward(r, mlps, training, rng);
        s.arc = arc_scores_biaffine(h.arc_dep, h.arc_head, arc);
        s.label_dep = h.label_dep;
        s.label_head = h.label_head;
        break;
      }
      case Classifier::kShallowBiaffine:
      case Classifier::kShallow300:
        s.arc = arc_scores_biaffine(r, r, arc);
        s.label_dep = r;
        s.label_head = r;
        break;
      case Classifier::kMlp:
        s.arc = arc_scores_mlp(r, mlp_arc);
        s.encoder = r;
        break;
    }
    return s;
  }

  TensorPtr<T> label_scores_for(const Scores& s, const std::vector<int>& heads) const {
    if (is_biaffine()) return label_scores(s.label_dep, s.label_head, heads, label);
    return label_scores_mlp(s.encoder, heads, mlp_label);
  }

  /// Training loss on one sentence; labels are conditioned on gold heads.
  TensorPtr<T> loss(const TokenIds& ids, const std::vector<int>& gold_heads,
                    const std::vector<int>& gold_labels, bool training, std::mt19937_64& rng,
                    Reduction reduction = Reduction::kMean) const {
    auto s = score(ids, training, rng);
    auto lab = label_scores_for(s, gold_heads);
    return parser_loss(s.arc, lab, gold_heads, gold_labels, reduction);
  }

  /// Decodes one sentence (already resolved to ids). Deterministic.
  ParseTree parse(const TokenIds& ids, bool use_mst) const {
    std::mt19937_64 rng(0);  // unused at inference
    auto s = score(ids, false, rng);
    ArcMatrix m(static_cast<std::size_t>(s.n), std::vector<double>(static_cast<std::size_t>(s.n) + 1));
    for (int i = 0; i < s.n; ++i)
      for (int j = 0; j <= s.n; ++j) m[i][j] = static_cast<double>(s.arc->at(i, j));
    ParseTree tree;
    tree.heads = use_mst ? mst_decode(m, true) : greedy_heads(m);
    tree.is_tree = reaches_root(tree.heads);
    auto lab = label_scores_for(s, tree.heads);
    std::vector<std::vector<double>> ls(static_cast<std::size_t>(s.n),
                                        std::vector<double>(static_cast<std::size_t>(lab->shape[1])));
    for (int i = 0; i < s.n; ++i)
      for (int k = 0; k < lab->shape[1]; ++k) ls[i][k] = static_cast<double>(lab->at(i, k));
    tree.labels = assign_labels(ls);
    return tree;
  }
};

}  // namespace biaffine
