#pragma once

#include <map>
#include <string>
#include <vector>

namespace cdlrec {

struct ItemRecord {
  std::vector<double> features;
  std::vector<std::string> tags;  // sorted, unique
};

struct UserRecord {
  std::vector<std::string> tags;       // multiset, order preserved
  std::vector<std::string> favorites;  // sorted, unique
  std::vector<std::string> friends;    // sorted, unique; need not be symmetric
  std::vector<std::string> groups;     // sorted, unique
};

struct GroupRecord {
  std::vector<std::string> members;  // sorted, unique
};

struct Corpus {
  std::map<std::string, ItemRecord> items;
  std::map<std::string, UserRecord> users;
  std::map<std::string, GroupRecord> groups;

  const ItemRecord& item(const std::string& id) const;
  const UserRecord& user(const std::string& id) const;
  const GroupRecord& group(const std::string& id) const;
};

// Line-delimited text, one entity per line:
//   item <id> tags=<t1,t2> features=<f1,f2,...>
//   user <id> tags=<...> favorites=<...> friends=<...> groups=<...>
//   group <id> members=<...>
// Loading validates referential integrity (favorites -> items, friends and
// group members -> users, user groups -> groups) and reports all offenders.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

void validate_corpus(const Corpus& corpus, const std::string& source);

}  // namespace cdlrec
