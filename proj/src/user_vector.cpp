#include "cdlrec/user_vector.hpp"

#include <sstream>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"

namespace cdlrec {

UserVector vectorize_user(const std::vector<std::string>& tags,
                          const ClusterModel& model,
                          std::size_t* unknown_tags) {
  UserVector v(model.k, 0.0);
  std::size_t known = 0;
  std::size_t unknown = 0;
  for (const auto& tag : tags) {
    auto it = model.assignment.find(tag);
    if (it == model.assignment.end()) {
      ++unknown;
      continue;
    }
    v[it->second] += 1.0;
    ++known;
  }
  if (known > 0) {
    for (double& x : v) x /= static_cast<double>(known);
  } else if (!tags.empty()) {
    log_warn("user tag list has no known tags; producing zero vector");
  }
  if (unknown_tags != nullptr) *unknown_tags = unknown;
  return v;
}

std::size_t positive_cluster_count(const UserVector& v) {
  std::size_t n = 0;
  for (double x : v) {
    if (x > 0.0) ++n;
  }
  return n;
}

std::vector<std::size_t> cluster_histogram(const std::vector<UserVector>& users,
                                           std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (const auto& u : users) {
    if (u.size() != k) {
      throw DimensionError("cluster_histogram: user vector length " +
                           std::to_string(u.size()) + " != k " +
                           std::to_string(k));
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (u[c] > 0.0) ++counts[c];
    }
  }
  return counts;
}

void save_user_vectors(const UserVectorTable& table, std::size_t k,
                       const std::string& path) {
  std::string out = "cdlrec-uservecs v1\nk " + std::to_string(k) + "\n";
  for (const auto& [user, vec] : table) {
    out += "u " + user;
    for (std::size_t c = 0; c < vec.size(); ++c) {
      if (vec[c] != 0.0) {
        out += " " + std::to_string(c) + ":" + format_double(vec[c]);
      }
    }
    out += "\n";
  }
  write_file(path, out);
}

UserVectorTable load_user_vectors(const std::string& path, std::size_t* k_out) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "cdlrec-uservecs v1") {
    throw VersionError(path + ": not a cdlrec-uservecs v1 file");
  }
  std::size_t k = 0;
  UserVectorTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ' ');
    if (fields[0] == "k") {
      if (fields.size() != 2) {
        throw DataError(path + ":" + std::to_string(line_no) + ": bad k line");
      }
      k = parse_size(fields[1]);
    } else if (fields[0] == "u") {
      if (fields.size() < 2 || k == 0) {
        throw DataError(path + ":" + std::to_string(line_no) + ": bad u line");
      }
      UserVector v(k, 0.0);
      for (std::size_t i = 2; i < fields.size(); ++i) {
        auto pair = split(fields[i], ':');
        if (pair.size() != 2) {
          throw DataError(path + ":" + std::to_string(line_no) +
                          ": bad sparse entry '" + fields[i] + "'");
        }
        const std::size_t c = parse_size(pair[0]);
        if (c >= k) {
          throw DataError(path + ":" + std::to_string(line_no) +
                          ": cluster index out of range");
        }
        v[c] = parse_double(pair[1]);
      }
      table[fields[1]] = std::move(v);
    } else {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown record '" + fields[0] + "'");
    }
  }
  if (k_out != nullptr) *k_out = k;
  return table;
}

}  // namespace cdlrec
