#include "cdlrec/embeddings.hpp"

#include <charconv>
#include <sstream>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"

namespace cdlrec {

namespace {

bool is_uint(std::string_view token) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path,
                               EmbeddingLoadStats* stats) {
  const std::string content = read_file(path);
  EmbeddingTable table;
  EmbeddingLoadStats local;

  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ' ');
    if (first_content_line && fields.size() == 2 && is_uint(fields[0]) &&
        is_uint(fields[1])) {
      // "<count> <dim>" header
      first_content_line = false;
      continue;
    }
    first_content_line = false;
    if (fields.size() < 2) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": embedding row needs a tag and at least one value");
    }
    std::vector<double> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      try {
        vec.push_back(parse_double(fields[i]));
      } catch (const DataError&) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": bad value '" + fields[i] + "'");
      }
    }
    if (table.dim == 0) {
      table.dim = vec.size();
    } else if (vec.size() != table.dim) {
      throw DataError(path + ":" + std::to_string(line_no) + ": row has " +
                      std::to_string(vec.size()) + " values, expected " +
                      std::to_string(table.dim));
    }
    auto [it, inserted] = table.entries.insert_or_assign(fields[0], std::move(vec));
    (void)it;
    if (!inserted) {
      ++local.duplicates;
      log_warn("duplicate embedding for tag '" + fields[0] + "' at " + path +
               ":" + std::to_string(line_no) + "; last wins");
    } else {
      ++local.rows;
    }
  }
  if (table.entries.empty()) {
    throw DataError(path + ": no embedding rows");
  }
  if (stats != nullptr) *stats = local;
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::string& path,
                     bool with_header) {
  std::string out;
  if (with_header) {
    out += std::to_string(table.entries.size());
    out += ' ';
    out += std::to_string(table.dim);
    out += '\n';
  }
  for (const auto& [tag, vec] : table.entries) {
    out += tag;
    for (double v : vec) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace cdlrec
