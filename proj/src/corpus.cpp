#include "cdlrec/corpus.hpp"

#include <algorithm>
#include <sstream>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"

namespace cdlrec {

const ItemRecord& Corpus::item(const std::string& id) const {
  auto it = items.find(id);
  if (it == items.end()) throw DataError("unknown item id: " + id);
  return it->second;
}

const UserRecord& Corpus::user(const std::string& id) const {
  auto it = users.find(id);
  if (it == users.end()) throw DataError("unknown user id: " + id);
  return it->second;
}

const GroupRecord& Corpus::group(const std::string& id) const {
  auto it = groups.find(id);
  if (it == groups.end()) throw DataError("unknown group id: " + id);
  return it->second;
}

namespace {

std::vector<std::string> parse_id_list(const std::string& value) {
  return split(value, ',');
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// "key=value" with the expected key
std::string field_value(const std::string& field, const std::string& key,
                        const std::string& where) {
  const std::string prefix = key + "=";
  if (field.rfind(prefix, 0) != 0) {
    throw DataError(where + ": expected field '" + key + "=', got '" + field +
                    "'");
  }
  return field.substr(prefix.size());
}

}  // namespace

Corpus load_corpus(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "cdlrec-corpus v1") {
    throw VersionError(path + ": not a cdlrec-corpus v1 file");
  }
  Corpus corpus;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(line_no);
    auto fields = split(line, ' ');
    if (fields[0] == "item") {
      if (fields.size() != 4) throw DataError(where + ": item needs 4 fields");
      ItemRecord item;
      item.tags = sorted_unique(parse_id_list(field_value(fields[2], "tags", where)));
      for (const auto& f : parse_id_list(field_value(fields[3], "features", where))) {
        try {
          item.features.push_back(parse_double(f));
        } catch (const DataError&) {
          throw DataError(where + ": bad feature value '" + f + "'");
        }
      }
      if (!corpus.items.emplace(fields[1], std::move(item)).second) {
        throw DataError(where + ": duplicate item id '" + fields[1] + "'");
      }
    } else if (fields[0] == "user") {
      if (fields.size() != 6) throw DataError(where + ": user needs 6 fields");
      UserRecord user;
      user.tags = parse_id_list(field_value(fields[2], "tags", where));
      user.favorites =
          sorted_unique(parse_id_list(field_value(fields[3], "favorites", where)));
      user.friends =
          sorted_unique(parse_id_list(field_value(fields[4], "friends", where)));
      user.groups =
          sorted_unique(parse_id_list(field_value(fields[5], "groups", where)));
      if (!corpus.users.emplace(fields[1], std::move(user)).second) {
        throw DataError(where + ": duplicate user id '" + fields[1] + "'");
      }
    } else if (fields[0] == "group") {
      if (fields.size() != 3) throw DataError(where + ": group needs 3 fields");
      GroupRecord group;
      group.members =
          sorted_unique(parse_id_list(field_value(fields[2], "members", where)));
      if (!corpus.groups.emplace(fields[1], std::move(group)).second) {
        throw DataError(where + ": duplicate group id '" + fields[1] + "'");
      }
    } else {
      throw DataError(where + ": unknown record '" + fields[0] + "'");
    }
  }
  validate_corpus(corpus, path);
  return corpus;
}

void validate_corpus(const Corpus& corpus, const std::string& source) {
  std::vector<std::string> offenders;
  auto flag = [&offenders](const std::string& what) {
    if (offenders.size() < 20) offenders.push_back(what);
  };
  for (const auto& [uid, user] : corpus.users) {
    for (const auto& fav : user.favorites) {
      if (!corpus.items.count(fav)) flag("user " + uid + " favorite " + fav);
    }
    for (const auto& fr : user.friends) {
      if (!corpus.users.count(fr)) flag("user " + uid + " friend " + fr);
    }
    for (const auto& g : user.groups) {
      if (!corpus.groups.count(g)) flag("user " + uid + " group " + g);
    }
  }
  for (const auto& [gid, group] : corpus.groups) {
    for (const auto& m : group.members) {
      if (!corpus.users.count(m)) flag("group " + gid + " member " + m);
    }
  }
  if (!offenders.empty()) {
    std::string msg = source + ": dangling references:";
    for (const auto& o : offenders) msg += " [" + o + "]";
    throw DataError(msg);
  }
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::string out = "cdlrec-corpus v1\n";
  for (const auto& [id, item] : corpus.items) {
    std::vector<std::string> feats;
    feats.reserve(item.features.size());
    for (double f : item.features) feats.push_back(format_double(f));
    out += "item " + id + " tags=" + join(item.tags, ',') +
           " features=" + join(feats, ',') + "\n";
  }
  for (const auto& [id, user] : corpus.users) {
    out += "user " + id + " tags=" + join(user.tags, ',') +
           " favorites=" + join(user.favorites, ',') +
           " friends=" + join(user.friends, ',') +
           " groups=" + join(user.groups, ',') + "\n";
  }
  for (const auto& [id, group] : corpus.groups) {
    out += "group " + id + " members=" + join(group.members, ',') + "\n";
  }
  write_file(path, out);
}

}  // namespace cdlrec
