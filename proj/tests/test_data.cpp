#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "biaffine/conll.hpp"
#include "biaffine/embeddings.hpp"
#include "biaffine/errors.hpp"
#include "biaffine/pretrained.hpp"
#include "biaffine/vocab.hpp"
#include "testutil.hpp"

using namespace biaffine;
using testutil::make_sentence;

TEST_SUITE_BEGIN("data");

namespace {

std::vector<Sentence> parse_text(const std::string& text) {
  std::istringstream in(text);
  return read_conll(in, "<test>");
}

const char* kTwoToken =
    "1\tCasey\t_\tNNP\tNNP\t_\t2\tnsubj\t_\t_\n"
    "2\thugged\t_\tVBD\tVBD\t_\t0\troot\t_\t_\n\n";

}  // namespace

TEST_CASE("read_conll parses a two-token block") {
  auto sents = parse_text(kTwoToken);
  REQUIRE(sents.size() == 1);
  CHECK(sents[0].size() == 2);
  CHECK(sents[0].words == std::vector<std::string>{"Casey", "hugged"});
  CHECK(sents[0].tags == std::vector<std::string>{"NNP", "VBD"});
  CHECK(sents[0].heads == std::vector<int>{2, 0});
  CHECK(sents[0].labels == std::vector<std::string>{"nsubj", "root"});
}

TEST_CASE("read_conll on an empty file yields no sentences") {
  CHECK(parse_text("").empty());
}

TEST_CASE("read_conll rejects a malformed HEAD naming the line") {
  const char* text = "1\ta\t_\tNN\tNN\t_\tx\tdep\t_\t_\n\n";
  try {
    parse_text(text);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":1") != std::string::npos);
    CHECK(std::string(e.what()).find("HEAD") != std::string::npos);
  }
}

TEST_CASE("read_conll validates the HEAD range and self-heads") {
  CHECK_THROWS_AS(parse_text("1\ta\t_\tNN\tNN\t_\t3\tdep\t_\t_\n\n"), DataError);
  CHECK_THROWS_AS(parse_text("1\ta\t_\tNN\tNN\t_\t1\tdep\t_\t_\n\n"), DataError);
}

TEST_CASE("read_conll skips comments and non-integer id rows") {
  const char* text =
      "# a comment\n"
      "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdel\t_\tNN\tNN\t_\t2\tnsubj\t_\t_\n"
      "2\truns\t_\tVBZ\tVBZ\t_\t0\troot\t_\t_\n\n";
  auto sents = parse_text(text);
  REQUIRE(sents.size() == 1);
  CHECK(sents[0].size() == 2);
}

TEST_CASE("read_conll falls back to column 4 when POS is underscore") {
  auto sents = parse_text("1\ta\t_\tNN\t_\t_\t0\troot\t_\t_\n\n");
  CHECK(sents[0].tags[0] == "NN");
}

TEST_CASE("write/read roundtrip preserves heads and labels") {
  std::mt19937_64 rng(3);
  std::vector<Sentence> sents;
  for (int k = 0; k < 3; ++k) {
    const int n = 1 + static_cast<int>(rng() % 6);
    Sentence s;
    for (int i = 0; i < n; ++i) {
      s.words.push_back("w" + std::to_string(i));
      s.tags.push_back("T" + std::to_string(static_cast<int>(rng() % 3)));
      int h;
      do {
        h = static_cast<int>(rng() % (n + 1));
      } while (h == i + 1);
      s.heads.push_back(h);
      s.labels.push_back("rel" + std::to_string(static_cast<int>(rng() % 4)));
    }
    sents.push_back(s);
  }
  std::ostringstream out;
  write_conll(sents, out);
  std::istringstream in(out.str());
  auto back = read_conll(in, "<roundtrip>");
  REQUIRE(back.size() == sents.size());
  for (std::size_t i = 0; i < sents.size(); ++i) {
    CHECK(back[i].words == sents[i].words);
    CHECK(back[i].tags == sents[i].tags);
    CHECK(back[i].heads == sents[i].heads);
    CHECK(back[i].labels == sents[i].labels);
  }
}

TEST_CASE("write_conll handles a single-token sentence") {
  auto s = make_sentence({"hi"}, {"UH"}, {0}, {"root"});
  std::ostringstream out;
  write_conll({s}, out);
  std::istringstream in(out.str());
  auto back = read_conll(in, "<single>");
  REQUIRE(back.size() == 1);
  CHECK(back[0].heads == std::vector<int>{0});
}

TEST_CASE("labels containing ':' survive verbatim") {
  auto s = make_sentence({"a", "b"}, {"NN", "VBD"}, {2, 0}, {"nsubj:pass", "root"});
  std::ostringstream out;
  write_conll({s}, out);
  std::istringstream in(out.str());
  CHECK(read_conll(in, "<colon>")[0].labels[0] == "nsubj:pass");
}

TEST_CASE("write_conll rejects incomplete predictions") {
  Sentence s = make_sentence({"a", "b"}, {"NN", "VBD"}, {2, 0}, {"nsubj", "root"});
  s.heads.pop_back();
  std::ostringstream out;
  CHECK_THROWS_AS(write_conll({s}, out), ContractError);
}

TEST_CASE("build_vocab applies min_count and lowercasing") {
  std::vector<Sentence> train;
  // "the" x5, "kim"/"Kim" x2 (same lowercased form), "rare" x1
  train.push_back(make_sentence({"The", "the", "Kim"}, {"DT", "DT", "NNP"}, {2, 0, 2}, {"det", "root", "dep"}));
  train.push_back(make_sentence({"the", "the", "the", "kim", "rare"}, {"DT", "DT", "DT", "NNP", "NN"},
                                {2, 0, 2, 2, 2}, {"det", "root", "det", "dep", "dep"}));
  Vocab v = build_vocab(train, 2);
  CHECK(v.word_id("the") >= 2);
  CHECK(v.word_id("The") == v.word_id("the"));
  CHECK(v.word_id("Kim") == v.word_id("kim"));
  CHECK(v.word_id("kim") >= 2);
  CHECK(v.word_id("rare") == -1);  // count 1: no trained row
  CHECK(v.words[Vocab::kRootId] == "<root>");
  CHECK(v.words[Vocab::kOovId] == "<oov>");
  CHECK(v.tag_id("DT") >= 2);
  CHECK(v.tag_id("ZZZ") == Vocab::kUnkTagId);
  CHECK(v.label_count() == 3);
}

TEST_CASE("vocab id assignment is deterministic: frequency then lexicographic") {
  std::vector<Sentence> train;
  train.push_back(make_sentence({"b", "a", "a", "c", "c"}, {"X", "X", "X", "X", "X"}, {2, 0, 2, 2, 2},
                                {"d", "root", "d", "d", "d"}));
  train.push_back(make_sentence({"b", "a"}, {"X", "X"}, {2, 0}, {"d", "root"}));
  Vocab v1 = build_vocab(train, 2);
  Vocab v2 = build_vocab(train, 2);
  CHECK(v1.words == v2.words);
  // a: 3, b: 2, c: 2 -> a, then b before c
  CHECK(v1.words[2] == "a");
  CHECK(v1.words[3] == "b");
  CHECK(v1.words[4] == "c");
}

TEST_CASE("a word seen once with no pretrained row resolves to the OOV id") {
  std::vector<Sentence> train;
  train.push_back(make_sentence({"kim", "runs"}, {"NNP", "VBZ"}, {2, 0}, {"nsubj", "root"}));
  train.push_back(make_sentence({"sam", "runs"}, {"NNP", "VBZ"}, {2, 0}, {"nsubj", "root"}));
  Vocab v = build_vocab(train, 2);
  auto ids = resolve_tokens(train[0], v, nullptr);
  CHECK(ids.word[0] == Vocab::kRootId);
  CHECK(ids.word[1] == Vocab::kOovId);  // "kim" count 1, no pretrained
  CHECK(ids.word[2] >= 2);              // "runs" count 2
}

TEST_CASE("load_pretrained parses rows and rejects wrong dimension counts") {
  const std::string dir = "/tmp/biaffine_test_pre";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir + "/good.txt");
    f << "Cat 0.5 -1.5 2.0\n";
    f << "dog 1 2 3\n";
    f << "cat 9 9 9\n";  // duplicate after lowercasing: first wins
  }
  auto pre = load_pretrained(dir + "/good.txt", 3);
  CHECK(pre.count() == 2);
  CHECK(pre.row("cat") == 0);
  CHECK(pre.data[0] == doctest::Approx(0.5));
  CHECK(pre.row("missing") == -1);

  {
    std::ofstream f(dir + "/bad.txt");
    f << "cat 1 2 3\n";
    f << "dog 1 2\n";
  }
  try {
    load_pretrained(dir + "/bad.txt", 3);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("a token present only in the pretrained file gets a usable embedding") {
  std::vector<Sentence> train;
  train.push_back(make_sentence({"glove", "runs"}, {"NN", "VBZ"}, {2, 0}, {"nsubj", "root"}));
  train.push_back(make_sentence({"it", "runs"}, {"PRP", "VBZ"}, {2, 0}, {"nsubj", "root"}));
  Vocab v = build_vocab(train, 2);
  REQUIRE(v.word_id("glove") == -1);

  PretrainedVectors pre;
  pre.dim = 4;
  pre.tokens = {"glove"};
  pre.index["glove"] = 0;
  pre.data = {1.0, 2.0, 3.0, 4.0};

  auto ids = resolve_tokens(train[0], v, &pre);
  CHECK(ids.word[1] == -1);        // zero trained row
  CHECK(ids.pretrained[1] == 0);   // pretrained row present

  std::mt19937_64 rng(1);
  auto tables = build_embedding_tables<double>(v, &pre, 4, rng);
  InputDropoutSpec drop;
  auto x = embed_sentence(ids, tables, drop, false, rng);
  // word part of token 1 equals the pretrained row exactly (trained part zero)
  for (int j = 0; j < 4; ++j) CHECK(x->at(1, j) == doctest::Approx(pre.data[j]));
}

TEST_CASE("embed_sentence shape and inference exactness") {
  std::vector<Sentence> train;
  train.push_back(make_sentence({"a", "b", "a", "b"}, {"X", "Y", "X", "Y"}, {2, 0, 2, 2},
                                {"d", "root", "d", "d"}));
  Vocab v = build_vocab(train, 1);
  std::mt19937_64 rng(2);
  auto tables = build_embedding_tables<double>(v, nullptr, 5, rng);
  auto ids = resolve_tokens(train[0], v, nullptr);
  InputDropoutSpec drop;
  auto x = embed_sentence(ids, tables, drop, false, rng);
  CHECK(x->shape == std::vector<int>{5, 10});
  // inference: exact concat of word and tag rows
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      CHECK(x->at(i, j) == tables.trained->at(ids.word[i], j));
      CHECK(x->at(i, 5 + j) == tables.tags->at(ids.tag[i], j));
    }
  }
}

TEST_CASE("input dropout: the three cases of the compensation rule") {
  std::vector<Sentence> train;
  train.push_back(make_sentence({"a", "b"}, {"X", "Y"}, {2, 0}, {"d", "root"}));
  Vocab v = build_vocab(train, 1);
  std::mt19937_64 rng(4);
  auto tables = build_embedding_tables<double>(v, nullptr, 3, rng);
  auto ids = resolve_tokens(train[0], v, nullptr);

  const std::vector<bool> all(3, true), none(3, false);

  // word dropped, tag kept: word part zero, tag part doubled
  auto x = embed_sentence_with_drops(ids, tables, all, none);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(x->at(i, j) == 0.0);
      CHECK(x->at(i, 3 + j) == 2.0 * tables.tags->at(ids.tag[i], j));
    }
  }
  // tag dropped, word kept: symmetric
  x = embed_sentence_with_drops(ids, tables, none, all);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(x->at(i, j) == 2.0 * tables.trained->at(ids.word[i], j));
      CHECK(x->at(i, 3 + j) == 0.0);
    }
  }
  // both dropped: the model gets an input of zeros
  x = embed_sentence_with_drops(ids, tables, all, all);
  for (double val : x->data) CHECK(val == 0.0);
}

TEST_CASE("mixed per-token drops apply the rule token by token") {
  std::vector<Sentence> train;
  train.push_back(make_sentence({"a", "b", "c"}, {"X", "Y", "X"}, {2, 0, 2}, {"d", "root", "d"}));
  Vocab v = build_vocab(train, 1);
  std::mt19937_64 rng(4);
  auto tables = build_embedding_tables<double>(v, nullptr, 2, rng);
  auto ids = resolve_tokens(train[0], v, nullptr);

  const std::vector<bool> drop_word = {false, true, false, true};
  const std::vector<bool> drop_tag = {false, false, true, true};
  auto x = embed_sentence_with_drops(ids, tables, drop_word, drop_tag);
  for (int i = 0; i < 4; ++i) {
    const auto [wf, tf] = input_dropout_factors<double>(drop_word[i], drop_tag[i]);
    for (int j = 0; j < 2; ++j) {
      CHECK(x->at(i, j) == wf * tables.trained->at(ids.word[i], j));
      CHECK(x->at(i, 2 + j) == tf * tables.tags->at(ids.tag[i], j));
    }
  }
}

TEST_SUITE_END();
