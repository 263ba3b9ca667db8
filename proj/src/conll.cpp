#include "biaffine/conll.hpp"

#include <fstream>
#include <sstream>

#include "biaffine/errors.hpp"

namespace biaffine {

namespace {

std::vector<std::string> split_columns(const std::string& line) {
  std::vector<std::string> cols;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      cols.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cols.push_back(cur);
  if (cols.size() == 1) {
    // Fall back to whitespace splitting for hand-written fixtures.
    cols.clear();
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) cols.push_back(tok);
  }
  return cols;
}

bool parse_int(const std::string& s, int* out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  long v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
    if (v > 1'000'000) return false;
  }
  *out = static_cast<int>(v);
  return true;
}

struct PendingToken {
  std::string form, tag, label;
  int head;
  long line_no;
};

void flush_block(std::vector<PendingToken>& block, std::vector<Sentence>& out, const std::string& name) {
  if (block.empty()) return;
  const int n = static_cast<int>(block.size());
  Sentence s;
  for (int i = 0; i < n; ++i) {
    const PendingToken& t = block[static_cast<std::size_t>(i)];
    if (t.head < 0 || t.head > n) {
      throw DataError(name + ":" + std::to_string(t.line_no) + ": HEAD " + std::to_string(t.head) +
                      " out of range [0, " + std::to_string(n) + "]");
    }
    if (t.head == i + 1) {
      throw DataError(name + ":" + std::to_string(t.line_no) + ": token " + std::to_string(i + 1) +
                      " is its own head");
    }
    s.words.push_back(t.form);
    s.tags.push_back(t.tag);
    s.heads.push_back(t.head);
    s.labels.push_back(t.label);
  }
  out.push_back(std::move(s));
  block.clear();
}

}  // namespace

std::vector<Sentence> read_conll(std::istream& in, const std::string& name) {
  std::vector<Sentence> out;
  std::vector<PendingToken> block;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush_block(block, out, name);
      continue;
    }
    if (line[0] == '#') continue;
    auto cols = split_columns(line);
    if (cols.size() < 8) {
      throw DataError(name + ":" + std::to_string(line_no) + ": expected at least 8 columns, got " +
                      std::to_string(cols.size()));
    }
    int id = 0;
    if (!parse_int(cols[0], &id)) continue;  // multiword range or empty node row
    int head = 0;
    if (!parse_int(cols[6], &head)) {
      throw DataError(name + ":" + std::to_string(line_no) + ": non-integer HEAD field '" + cols[6] + "'");
    }
    std::string tag = cols[4];
    if (tag == "_" && cols[3] != "_") tag = cols[3];
    block.push_back({cols[1], tag, cols[7], head, line_no});
  }
  flush_block(block, out, name);
  return out;
}

std::vector<Sentence> read_conll(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_conll(in, path);
}

void write_conll(const std::vector<Sentence>& sentences, std::ostream& out) {
  for (const Sentence& s : sentences) {
    const int n = s.size();
    if (static_cast<int>(s.heads.size()) != n || static_cast<int>(s.labels.size()) != n ||
        static_cast<int>(s.tags.size()) != n) {
      throw ContractError("write_conll: sentence with incomplete predictions (n=" + std::to_string(n) +
                          ", heads=" + std::to_string(s.heads.size()) +
                          ", labels=" + std::to_string(s.labels.size()) + ")");
    }
    for (int i = 0; i < n; ++i) {
      out << (i + 1) << '\t' << s.words[i] << '\t' << '_' << '\t' << s.tags[i] << '\t' << s.tags[i]
          << '\t' << '_' << '\t' << s.heads[i] << '\t' << s.labels[i] << '\t' << '_' << '\t' << '_' << '\n';
    }
    out << '\n';
  }
}

void write_conll(const std::vector<Sentence>& sentences, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  write_conll(sentences, out);
}

}  // namespace biaffine
