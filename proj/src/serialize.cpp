#include "biaffine/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "biaffine/errors.hpp"

namespace biaffine {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "artifact blobs are little-endian");

std::uint64_t fnv1a(const char* data, std::size_t len) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

std::vector<std::pair<std::string, TensorPtr<float>>> all_tensors(const ParserModel<float>& m) {
  auto named = m.named_parameters();
  named.emplace_back("embeddings.pretrained", m.embeddings.pretrained);
  if (!m.cfg.use_tags) named.emplace_back("embeddings.tags", m.embeddings.tags);
  return named;
}

}  // namespace

void save_model(const ParserModel<float>& model, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create artifact directory " + dir + ": " + ec.message());

  const auto tensors = all_tensors(model);
  std::string blob;
  json index = json::array();
  for (const auto& [name, t] : tensors) {
    json entry;
    entry["name"] = name;
    entry["shape"] = t->shape;
    entry["offset"] = blob.size();
    entry["count"] = t->numel();
    index.push_back(entry);
    blob.append(reinterpret_cast<const char*>(t->data.data()), t->numel() * sizeof(float));
  }

  json manifest;
  manifest["format_version"] = kArtifactVersion;
  manifest["precision"] = "f32";
  manifest["config"] = model.cfg.to_map();
  manifest["vocab"] = {{"words", model.vocab.words},
                       {"tags", model.vocab.tags},
                       {"labels", model.vocab.labels}};
  manifest["pretrained_tokens"] = model.pretrained.tokens;
  manifest["tensors"] = index;
  manifest["weights_bytes"] = blob.size();
  manifest["checksum"] = hex64(fnv1a(blob.data(), blob.size()));

  {
    std::ofstream out(fs::path(dir) / "weights.bin", std::ios::binary);
    if (!out) throw DataError("cannot write " + dir + "/weights.bin");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  }
  {
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw DataError("cannot write " + dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
  }
}

ParserModel<float> load_model(const std::string& dir) {
  namespace fs = std::filesystem;
  json manifest;
  {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw IntegrityError("missing manifest.json in " + dir);
    try {
      in >> manifest;
    } catch (const std::exception& e) {
      throw IntegrityError("corrupt manifest in " + dir + ": " + e.what());
    }
  }
  if (!manifest.contains("format_version") || manifest["format_version"].get<int>() != kArtifactVersion) {
    throw IntegrityError("artifact version mismatch in " + dir + " (expected " +
                         std::to_string(kArtifactVersion) + ")");
  }
  if (manifest.value("precision", "") != "f32") {
    throw IntegrityError("unsupported artifact precision '" + manifest.value("precision", "") + "'");
  }

  Config cfg = Config::from_map(manifest["config"].get<std::map<std::string, std::string>>());
  Vocab vocab;
  vocab.words = manifest["vocab"]["words"].get<std::vector<std::string>>();
  vocab.tags = manifest["vocab"]["tags"].get<std::vector<std::string>>();
  vocab.labels = manifest["vocab"]["labels"].get<std::vector<std::string>>();
  for (std::size_t i = 0; i < vocab.words.size(); ++i) vocab.word_to_id[vocab.words[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < vocab.tags.size(); ++i) vocab.tag_to_id[vocab.tags[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < vocab.labels.size(); ++i) vocab.label_to_id[vocab.labels[i]] = static_cast<int>(i);

  PretrainedVectors pre;
  pre.dim = cfg.embedding_size;
  pre.tokens = manifest["pretrained_tokens"].get<std::vector<std::string>>();
  for (std::size_t i = 0; i < pre.tokens.size(); ++i) pre.index[pre.tokens[i]] = static_cast<int>(i);
  pre.data.assign(pre.tokens.size() * static_cast<std::size_t>(pre.dim), 0.0);

  std::mt19937_64 rng(0);  // shapes only; every value is overwritten below
  ParserModel<float> model = ParserModel<float>::build(cfg, vocab, std::move(pre), rng);

  std::string blob;
  {
    std::ifstream in(fs::path(dir) / "weights.bin", std::ios::binary);
    if (!in) throw IntegrityError("missing weights.bin in " + dir);
    std::ostringstream ss;
    ss << in.rdbuf();
    blob = ss.str();
  }
  const std::size_t expect_bytes = manifest.value("weights_bytes", std::size_t{0});
  if (blob.size() != expect_bytes) {
    throw IntegrityError("weights.bin truncated or padded: " + std::to_string(blob.size()) +
                         " bytes, manifest says " + std::to_string(expect_bytes));
  }
  if (hex64(fnv1a(blob.data(), blob.size())) != manifest.value("checksum", "")) {
    throw IntegrityError("weights.bin checksum mismatch in " + dir);
  }

  auto tensors = all_tensors(model);
  std::size_t ti = 0;
  for (const auto& entry : manifest["tensors"]) {
    if (ti >= tensors.size()) throw IntegrityError("manifest lists more tensors than the model has");
    auto& [name, t] = tensors[ti++];
    if (entry["name"].get<std::string>() != name ||
        entry["shape"].get<std::vector<int>>() != t->shape) {
      throw IntegrityError("tensor mismatch at '" + name + "' while loading " + dir);
    }
    const std::size_t offset = entry["offset"].get<std::size_t>();
    const std::size_t count = entry["count"].get<std::size_t>();
    if (count != t->numel() || offset + count * sizeof(float) > blob.size()) {
      throw IntegrityError("tensor '" + name + "' extends past end of weights.bin");
    }
    std::memcpy(t->data.data(), blob.data() + offset, count * sizeof(float));
  }
  if (ti != tensors.size()) throw IntegrityError("manifest lists fewer tensors than the model has");

  for (std::size_t i = 0; i < model.pretrained.data.size(); ++i) {
    model.pretrained.data[i] = static_cast<double>(model.embeddings.pretrained->data[i]);
  }
  return model;
}

}  // namespace biaffine
