#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cdlrec/corpus.hpp"
#include "cdlrec/user_vector.hpp"

namespace cdlrec {

struct UserFilter {
  std::size_t min_favorites = 40;
  std::size_t max_favorites = 200;
  std::size_t min_clusters = 80;
  std::size_t max_clusters = 280;
  bool operator==(const UserFilter&) const = default;
};

struct SplitSpec {
  std::size_t concealed_per_user = 20;
  std::size_t distractors_per_user = 80;
  std::size_t triplets_per_user = 20;
  std::uint64_t seed = 0;
  bool operator==(const SplitSpec&) const = default;
};

struct Triplet {
  std::string user_id;
  std::string positive_item_id;
  std::string negative_item_id;
  bool operator==(const Triplet&) const = default;
};

struct Doublet {
  std::string user_id;
  std::string item_id;
  bool positive = true;
  bool operator==(const Doublet&) const = default;
};

struct EvalSet {
  std::string user_id;
  std::vector<std::string> concealed;   // held-out favorites
  std::vector<std::string> candidates;  // concealed + distractors, shuffled
  bool operator==(const EvalSet&) const = default;
};

// Whether negative assignment compares interests at the cluster level
// (default) or on raw tags.
enum class NegativeTagRule { clusters, raw_tags };

// The tag multiset behind a user's interest vector: her own tagging history
// plus the tags of her favorite items, weighted equally. Every consumer of
// "the user's interest clusters" (vectorization, filtering, negative
// assignment, candidate selection) derives them from this multiset.
std::vector<std::string> interest_tags(const Corpus& corpus,
                                       const std::string& user_id);

UserVectorTable vectorize_all_users(const Corpus& corpus,
                                    const ClusterModel& model);

struct FilterResult {
  std::vector<std::string> train_users;  // sorted
  std::vector<std::string> test_users;   // sorted; train is a subset
};

// Test set: users whose favorite count lies inside [min_favorites,
// max_favorites]. Train set: test-eligible users whose positive-cluster count
// additionally lies inside [min_clusters, max_clusters].
FilterResult filter_users(const Corpus& corpus, const UserFilter& filter,
                          const ClusterModel& model);

// Union of the user's friends' favorites and the favorites of all members of
// the user's joined groups. Items in this set may never be assigned negative.
std::set<std::string> potentially_liked(const Corpus& corpus,
                                        const std::string& user_id);

// Items that (a) share no interest cluster (or raw tag) with the user,
// (b) are not potentially liked, and (c) are not the user's own favorites.
std::set<std::string> assign_negatives(
    const Corpus& corpus, const std::string& user_id, const ClusterModel& model,
    NegativeTagRule rule = NegativeTagRule::clusters);

struct ConcealSplit {
  std::vector<std::string> concealed;  // empty when favorites < concealed_per_user
  std::vector<std::string> retained;
};

// Deterministic per-user holdout; both triplet sampling and eval-set
// construction derive it from the same seed, so they always agree.
ConcealSplit conceal_split(const Corpus& corpus, const std::string& user_id,
                           const SplitSpec& spec);

struct SampleStats {
  std::size_t users_sampled = 0;
  std::size_t users_skipped = 0;
};

using NegativePools = std::map<std::string, std::vector<std::string>>;

NegativePools build_negative_pools(const Corpus& corpus,
                                   const std::vector<std::string>& users,
                                   const ClusterModel& model,
                                   NegativeTagRule rule = NegativeTagRule::clusters);

// Per user, triplets_per_user triplets sampled with replacement: positives
// from non-concealed favorites, negatives from the pool. Users with no
// retained favorite or an empty pool are skipped with a warning.
std::vector<Triplet> sample_triplets_from_pools(
    const Corpus& corpus, const std::vector<std::string>& train_users,
    const NegativePools& pools, const SplitSpec& spec,
    SampleStats* stats = nullptr);

std::vector<Triplet> sample_triplets(const Corpus& corpus,
                                     const std::vector<std::string>& train_users,
                                     const SplitSpec& spec,
                                     const ClusterModel& model,
                                     SampleStats* stats = nullptr);

// Balanced doublet stream for the TwoNets baseline: per user,
// triplets_per_user positives and as many negatives.
std::vector<Doublet> make_doublets_from_pools(
    const Corpus& corpus, const std::vector<std::string>& train_users,
    const NegativePools& pools, const SplitSpec& spec,
    SampleStats* stats = nullptr);

std::vector<Doublet> make_doublets(const Corpus& corpus,
                                   const std::vector<std::string>& train_users,
                                   const SplitSpec& spec,
                                   const ClusterModel& model,
                                   SampleStats* stats = nullptr);

// Per test user: the concealed favorites mixed with distractors_per_user
// distinct items drawn from the user's negative pool. Users with too few
// favorites or too small a pool are skipped with a warning.
std::vector<EvalSet> build_eval_sets_from_pools(
    const Corpus& corpus, const std::vector<std::string>& test_users,
    const NegativePools& pools, const SplitSpec& spec,
    SampleStats* stats = nullptr);

std::vector<EvalSet> build_eval_sets(const Corpus& corpus,
                                     const std::vector<std::string>& test_users,
                                     const SplitSpec& spec,
                                     const ClusterModel& model,
                                     SampleStats* stats = nullptr);

void save_triplets(const std::vector<Triplet>& triplets, const std::string& path);
std::vector<Triplet> load_triplets(const std::string& path);
void save_eval_sets(const std::vector<EvalSet>& sets, const std::string& path);
std::vector<EvalSet> load_eval_sets(const std::string& path);
void save_split(const FilterResult& split, const std::string& path);
FilterResult load_split(const std::string& path);

}  // namespace cdlrec
