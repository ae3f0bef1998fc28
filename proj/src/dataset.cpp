#include "cdlrec/dataset.hpp"

#include <algorithm>
#include <sstream>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"
#include "cdlrec/rng.hpp"

namespace cdlrec {

namespace {

// Fisher-Yates with the shared deterministic stream.
template <typename T>
void shuffle_vec(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

std::set<std::size_t> tag_clusters(const std::vector<std::string>& tags,
                                   const ClusterModel& model) {
  std::set<std::size_t> out;
  for (const auto& tag : tags) {
    auto it = model.assignment.find(tag);
    if (it != model.assignment.end()) out.insert(it->second);
  }
  return out;
}

bool disjoint(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return false;
    }
  }
  return true;
}

bool disjoint_tags(const std::vector<std::string>& item_tags,
                   const std::set<std::string>& user_tags) {
  for (const auto& t : item_tags) {
    if (user_tags.count(t)) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> interest_tags(const Corpus& corpus,
                                       const std::string& user_id) {
  const UserRecord& user = corpus.user(user_id);
  std::vector<std::string> tags = user.tags;
  for (const auto& fav : user.favorites) {
    const auto& item_tags = corpus.item(fav).tags;
    tags.insert(tags.end(), item_tags.begin(), item_tags.end());
  }
  return tags;
}

UserVectorTable vectorize_all_users(const Corpus& corpus,
                                    const ClusterModel& model) {
  UserVectorTable table;
  for (const auto& [uid, user] : corpus.users) {
    (void)user;
    table[uid] = vectorize_user(interest_tags(corpus, uid), model);
  }
  return table;
}

FilterResult filter_users(const Corpus& corpus, const UserFilter& filter,
                          const ClusterModel& model) {
  FilterResult result;
  for (const auto& [uid, user] : corpus.users) {
    const std::size_t favs = user.favorites.size();
    if (favs < filter.min_favorites || favs > filter.max_favorites) continue;
    result.test_users.push_back(uid);
    const std::size_t clusters = positive_cluster_count(
        vectorize_user(interest_tags(corpus, uid), model));
    if (clusters < filter.min_clusters || clusters > filter.max_clusters)
      continue;
    result.train_users.push_back(uid);
  }
  return result;  // map iteration keeps both sorted
}

std::set<std::string> potentially_liked(const Corpus& corpus,
                                        const std::string& user_id) {
  const UserRecord& user = corpus.user(user_id);
  std::set<std::string> liked;
  for (const auto& friend_id : user.friends) {
    const UserRecord& fr = corpus.user(friend_id);
    liked.insert(fr.favorites.begin(), fr.favorites.end());
  }
  for (const auto& group_id : user.groups) {
    for (const auto& member_id : corpus.group(group_id).members) {
      const UserRecord& member = corpus.user(member_id);
      liked.insert(member.favorites.begin(), member.favorites.end());
    }
  }
  return liked;
}

std::set<std::string> assign_negatives(const Corpus& corpus,
                                       const std::string& user_id,
                                       const ClusterModel& model,
                                       NegativeTagRule rule) {
  const UserRecord& user = corpus.user(user_id);
  const auto liked = potentially_liked(corpus, user_id);
  const std::set<std::string> favorites(user.favorites.begin(),
                                        user.favorites.end());
  const auto interests = interest_tags(corpus, user_id);
  const auto user_clusters = tag_clusters(interests, model);
  const std::set<std::string> user_tags(interests.begin(), interests.end());

  std::set<std::string> negatives;
  for (const auto& [iid, item] : corpus.items) {
    if (favorites.count(iid) || liked.count(iid)) continue;
    if (rule == NegativeTagRule::clusters) {
      if (!disjoint(tag_clusters(item.tags, model), user_clusters)) continue;
    } else {
      if (!disjoint_tags(item.tags, user_tags)) continue;
    }
    negatives.insert(iid);
  }
  return negatives;
}

ConcealSplit conceal_split(const Corpus& corpus, const std::string& user_id,
                           const SplitSpec& spec) {
  const UserRecord& user = corpus.user(user_id);
  ConcealSplit holdout;
  if (user.favorites.size() < spec.concealed_per_user) {
    holdout.retained = user.favorites;
    return holdout;
  }
  std::vector<std::string> favs = user.favorites;  // sorted
  Rng rng(derive_seed(spec.seed, "conceal", user_id));
  shuffle_vec(favs, rng);
  holdout.concealed.assign(favs.begin(),
                           favs.begin() + static_cast<std::ptrdiff_t>(
                                              spec.concealed_per_user));
  holdout.retained.assign(
      favs.begin() + static_cast<std::ptrdiff_t>(spec.concealed_per_user),
      favs.end());
  std::sort(holdout.concealed.begin(), holdout.concealed.end());
  std::sort(holdout.retained.begin(), holdout.retained.end());
  return holdout;
}

NegativePools build_negative_pools(const Corpus& corpus,
                                   const std::vector<std::string>& users,
                                   const ClusterModel& model,
                                   NegativeTagRule rule) {
  // Item tag clusters are reused across users.
  std::map<std::string, std::set<std::size_t>> item_clusters;
  if (rule == NegativeTagRule::clusters) {
    for (const auto& [iid, item] : corpus.items) {
      item_clusters[iid] = tag_clusters(item.tags, model);
    }
  }

  NegativePools pools;
  for (const auto& uid : users) {
    const UserRecord& user = corpus.user(uid);
    const auto liked = potentially_liked(corpus, uid);
    const std::set<std::string> favorites(user.favorites.begin(),
                                          user.favorites.end());
    const auto interests = interest_tags(corpus, uid);
    const auto user_clusters = tag_clusters(interests, model);
    const std::set<std::string> user_tags(interests.begin(), interests.end());

    std::vector<std::string> pool;
    for (const auto& [iid, item] : corpus.items) {
      if (favorites.count(iid) || liked.count(iid)) continue;
      if (rule == NegativeTagRule::clusters) {
        if (!disjoint(item_clusters[iid], user_clusters)) continue;
      } else {
        if (!disjoint_tags(item.tags, user_tags)) continue;
      }
      pool.push_back(iid);
    }
    pools[uid] = std::move(pool);  // map order keeps pools sorted by item id
  }
  return pools;
}

std::vector<Triplet> sample_triplets_from_pools(
    const Corpus& corpus, const std::vector<std::string>& train_users,
    const NegativePools& pools, const SplitSpec& spec, SampleStats* stats) {
  SampleStats local;
  std::vector<Triplet> triplets;
  for (const auto& uid : train_users) {
    const auto holdout = conceal_split(corpus, uid, spec);
    auto pit = pools.find(uid);
    if (holdout.retained.empty() || pit == pools.end() || pit->second.empty()) {
      log_warn("sample_triplets: skipping user " + uid +
               " (no usable positive or empty negative pool)");
      ++local.users_skipped;
      continue;
    }
    const auto& pool = pit->second;
    Rng rng(derive_seed(spec.seed, "triplets", uid));
    for (std::size_t t = 0; t < spec.triplets_per_user; ++t) {
      const auto& pos = holdout.retained[rng.below(holdout.retained.size())];
      const auto& neg = pool[rng.below(pool.size())];
      triplets.push_back({uid, pos, neg});
    }
    ++local.users_sampled;
  }
  if (stats != nullptr) *stats = local;
  return triplets;
}

std::vector<Triplet> sample_triplets(const Corpus& corpus,
                                     const std::vector<std::string>& train_users,
                                     const SplitSpec& spec,
                                     const ClusterModel& model,
                                     SampleStats* stats) {
  const auto pools = build_negative_pools(corpus, train_users, model);
  return sample_triplets_from_pools(corpus, train_users, pools, spec, stats);
}

std::vector<Doublet> make_doublets_from_pools(
    const Corpus& corpus, const std::vector<std::string>& train_users,
    const NegativePools& pools, const SplitSpec& spec, SampleStats* stats) {
  SampleStats local;
  std::vector<Doublet> doublets;
  for (const auto& uid : train_users) {
    const auto holdout = conceal_split(corpus, uid, spec);
    auto pit = pools.find(uid);
    if (holdout.retained.empty() || pit == pools.end() || pit->second.empty()) {
      log_warn("make_doublets: skipping user " + uid +
               " (no usable positive or empty negative pool)");
      ++local.users_skipped;
      continue;
    }
    const auto& pool = pit->second;
    Rng rng(derive_seed(spec.seed, "doublets", uid));
    for (std::size_t t = 0; t < spec.triplets_per_user; ++t) {
      doublets.push_back({uid, holdout.retained[rng.below(holdout.retained.size())], true});
      doublets.push_back({uid, pool[rng.below(pool.size())], false});
    }
    ++local.users_sampled;
  }
  if (stats != nullptr) *stats = local;
  return doublets;
}

std::vector<Doublet> make_doublets(const Corpus& corpus,
                                   const std::vector<std::string>& train_users,
                                   const SplitSpec& spec,
                                   const ClusterModel& model,
                                   SampleStats* stats) {
  const auto pools = build_negative_pools(corpus, train_users, model);
  return make_doublets_from_pools(corpus, train_users, pools, spec, stats);
}

std::vector<EvalSet> build_eval_sets_from_pools(
    const Corpus& corpus, const std::vector<std::string>& test_users,
    const NegativePools& pools, const SplitSpec& spec, SampleStats* stats) {
  SampleStats local;
  std::vector<EvalSet> sets;
  for (const auto& uid : test_users) {
    const auto holdout = conceal_split(corpus, uid, spec);
    if (holdout.concealed.size() != spec.concealed_per_user) {
      log_warn("build_eval_sets: skipping user " + uid +
               " (fewer than " + std::to_string(spec.concealed_per_user) +
               " favorites)");
      ++local.users_skipped;
      continue;
    }
    auto pit = pools.find(uid);
    if (pit == pools.end() || pit->second.size() < spec.distractors_per_user) {
      log_warn("build_eval_sets: skipping user " + uid +
               " (negative pool smaller than " +
               std::to_string(spec.distractors_per_user) + ")");
      ++local.users_skipped;
      continue;
    }

    // Distinct distractors via a partial shuffle of the pool.
    std::vector<std::string> pool = pit->second;
    Rng rng(derive_seed(spec.seed, "evalset", uid));
    for (std::size_t i = 0; i < spec.distractors_per_user; ++i) {
      const std::size_t j = i + rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(spec.distractors_per_user);

    EvalSet set;
    set.user_id = uid;
    set.concealed = holdout.concealed;
    set.candidates = holdout.concealed;
    set.candidates.insert(set.candidates.end(), pool.begin(), pool.end());
    shuffle_vec(set.candidates, rng);
    sets.push_back(std::move(set));
    ++local.users_sampled;
  }
  if (stats != nullptr) *stats = local;
  return sets;
}

std::vector<EvalSet> build_eval_sets(const Corpus& corpus,
                                     const std::vector<std::string>& test_users,
                                     const SplitSpec& spec,
                                     const ClusterModel& model,
                                     SampleStats* stats) {
  const auto pools = build_negative_pools(corpus, test_users, model);
  return build_eval_sets_from_pools(corpus, test_users, pools, spec, stats);
}

void save_triplets(const std::vector<Triplet>& triplets,
                   const std::string& path) {
  std::string out = "cdlrec-triplets v1\n";
  for (const auto& t : triplets) {
    out += "t " + t.user_id + " " + t.positive_item_id + " " +
           t.negative_item_id + "\n";
  }
  write_file(path, out);
}

std::vector<Triplet> load_triplets(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "cdlrec-triplets v1") {
    throw VersionError(path + ": not a cdlrec-triplets v1 file");
  }
  std::vector<Triplet> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ' ');
    if (fields.size() != 4 || fields[0] != "t") {
      throw DataError(path + ":" + std::to_string(line_no) + ": bad triplet line");
    }
    out.push_back({fields[1], fields[2], fields[3]});
  }
  return out;
}

void save_eval_sets(const std::vector<EvalSet>& sets, const std::string& path) {
  std::string out = "cdlrec-evalsets v1\n";
  for (const auto& s : sets) {
    out += "e " + s.user_id + " concealed=" + join(s.concealed, ',') +
           " candidates=" + join(s.candidates, ',') + "\n";
  }
  write_file(path, out);
}

std::vector<EvalSet> load_eval_sets(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "cdlrec-evalsets v1") {
    throw VersionError(path + ": not a cdlrec-evalsets v1 file");
  }
  std::vector<EvalSet> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ' ');
    if (fields.size() != 4 || fields[0] != "e" ||
        fields[2].rfind("concealed=", 0) != 0 ||
        fields[3].rfind("candidates=", 0) != 0) {
      throw DataError(path + ":" + std::to_string(line_no) + ": bad evalset line");
    }
    EvalSet set;
    set.user_id = fields[1];
    set.concealed = split(fields[2].substr(10), ',');
    set.candidates = split(fields[3].substr(11), ',');
    out.push_back(std::move(set));
  }
  return out;
}

void save_split(const FilterResult& split, const std::string& path) {
  std::string out = "cdlrec-split v1\n";
  for (const auto& uid : split.train_users) out += "train " + uid + "\n";
  for (const auto& uid : split.test_users) out += "test " + uid + "\n";
  write_file(path, out);
}

FilterResult load_split(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "cdlrec-split v1") {
    throw VersionError(path + ": not a cdlrec-split v1 file");
  }
  FilterResult out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ' ');
    if (fields.size() != 2) {
      throw DataError(path + ":" + std::to_string(line_no) + ": bad split line");
    }
    if (fields[0] == "train") {
      out.train_users.push_back(fields[1]);
    } else if (fields[0] == "test") {
      out.test_users.push_back(fields[1]);
    } else {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown record '" + fields[0] + "'");
    }
  }
  return out;
}

}  // namespace cdlrec
