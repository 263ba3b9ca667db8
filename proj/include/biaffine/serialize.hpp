#pragma once

#include <string>

#include "biaffine/model.hpp"

namespace biaffine {

inline constexpr int kArtifactVersion = 1;

/// Writes the model as a directory: manifest.json (version, config, vocab,
/// tensor index, checksum) plus weights.bin with raw little-endian float32
/// blobs. Loading reproduces parse outputs bit for bit.
void save_model(const ParserModel<float>& model, const std::string& dir);
ParserModel<float> load_model(const std::string& dir);

}  // namespace biaffine
