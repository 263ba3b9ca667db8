#include "biaffine/pretrained.hpp"

#include <fstream>
#include <sstream>

#include "biaffine/errors.hpp"
#include "biaffine/vocab.hpp"

namespace biaffine {

PretrainedVectors load_pretrained(const std::string& path, int expect_dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  PretrainedVectors out;
  out.dim = expect_dim;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(expect_dim));
    double v;
    while (ss >> v) row.push_back(v);
    if (static_cast<int>(row.size()) != expect_dim) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(expect_dim) +
                      " values, got " + std::to_string(row.size()));
    }
    const std::string key = lowercase(token);
    if (out.index.count(key)) continue;
    out.index[key] = out.count();
    out.tokens.push_back(key);
    out.data.insert(out.data.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace biaffine
