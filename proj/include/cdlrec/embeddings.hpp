#pragma once

#include <map>
#include <string>
#include <vector>

namespace cdlrec {

struct EmbeddingTable {
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>> entries;
  bool operator==(const EmbeddingTable&) const = default;
};

struct EmbeddingLoadStats {
  std::size_t rows = 0;
  std::size_t duplicates = 0;
};

// Text format: one tag per line, "tag v1 v2 ... vd", fields separated by
// single spaces. A first line of exactly two unsigned integers is treated as
// a "<count> <dim>" header (auto-detected). Duplicate tags: last wins, with a
// logged warning.
EmbeddingTable load_embeddings(const std::string& path,
                               EmbeddingLoadStats* stats = nullptr);

void save_embeddings(const EmbeddingTable& table, const std::string& path,
                     bool with_header = true);

}  // namespace cdlrec
