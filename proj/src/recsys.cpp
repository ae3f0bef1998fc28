#include "cdlrec/recsys.hpp"

#include <algorithm>
#include <set>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"
#include "cdlrec/rng.hpp"

namespace cdlrec {

const std::vector<double>& RepresentationCache::user_latent(
    const std::string& id) const {
  auto it = users.find(id);
  if (it == users.end()) throw CacheMissError("cache miss for user '" + id + "'");
  return it->second;
}

const std::vector<double>& RepresentationCache::item_latent(
    const std::string& id) const {
  auto it = items.find(id);
  if (it == items.end()) throw CacheMissError("cache miss for item '" + id + "'");
  return it->second;
}

RepresentationCache build_cache(const CdlModel& model, const Corpus& corpus,
                                const UserVectorTable& user_vectors,
                                std::span<const std::string> user_ids,
                                std::span<const std::string> item_ids) {
  RepresentationCache cache;
  cache.model_checksum = model_checksum(model);
  for (const auto& uid : user_ids) {
    auto it = user_vectors.find(uid);
    if (it == user_vectors.end()) {
      throw DataError("build_cache: no user vector for '" + uid + "'");
    }
    cache.users[uid] = encode_user(model, it->second);
  }
  for (const auto& iid : item_ids) {
    cache.items[iid] = encode_item(model, corpus.item(iid).features);
  }
  return cache;
}

void verify_cache(const RepresentationCache& cache, const CdlModel& model) {
  if (cache.model_checksum != model_checksum(model)) {
    throw DataError("representation cache is stale for this model");
  }
}

std::vector<std::string> select_candidates(const Corpus& corpus,
                                           const std::string& user_id,
                                           const ClusterModel& model) {
  std::set<std::size_t> interests;
  for (const auto& tag : interest_tags(corpus, user_id)) {
    auto it = model.assignment.find(tag);
    if (it != model.assignment.end()) interests.insert(it->second);
  }
  std::vector<std::string> out;
  for (const auto& [iid, item] : corpus.items) {
    bool hit = false;
    for (const auto& tag : item.tags) {
      auto it = model.assignment.find(tag);
      if (it != model.assignment.end() && interests.count(it->second)) {
        hit = true;
        break;
      }
    }
    if (hit) out.push_back(iid);
  }
  return out;
}

std::vector<Scored> recommend(const RepresentationCache& cache,
                              const DistanceHead& head,
                              const std::string& user_id,
                              std::span<const std::string> candidates,
                              std::size_t k) {
  if (k > candidates.size()) {
    throw DataError("recommend: k=" + std::to_string(k) + " exceeds " +
                    std::to_string(candidates.size()) + " candidates");
  }
  const auto& user = cache.user_latent(user_id);
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (const auto& iid : candidates) {
    scored.push_back({iid, distance(head, user, cache.item_latent(iid))});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  });
  scored.resize(k);
  return scored;
}

namespace {

// Shared accumulation over per-user rankings.
struct MetricAccumulator {
  std::size_t max_k;
  std::vector<double> precision_sum;
  std::vector<double> recall_sum;
  std::size_t users = 0;

  explicit MetricAccumulator(std::size_t k)
      : max_k(k), precision_sum(k, 0.0), recall_sum(k, 0.0) {}

  void add(const std::vector<std::string>& ranked,
           const std::vector<std::string>& concealed) {
    const std::set<std::string> positives(concealed.begin(), concealed.end());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < max_k && i < ranked.size(); ++i) {
      if (positives.count(ranked[i])) ++hits;
      precision_sum[i] += static_cast<double>(hits) / static_cast<double>(i + 1);
      recall_sum[i] +=
          static_cast<double>(hits) / static_cast<double>(positives.size());
    }
    ++users;
  }

  void finish(EvalReport& report) const {
    report.precision.assign(max_k, 0.0);
    report.recall.assign(max_k, 0.0);
    if (users == 0) return;
    for (std::size_t i = 0; i < max_k; ++i) {
      report.precision[i] = precision_sum[i] / static_cast<double>(users);
      report.recall[i] = recall_sum[i] / static_cast<double>(users);
    }
  }
};

}  // namespace

EvalReport evaluate(const CdlModel& model, const Corpus& corpus,
                    const UserVectorTable& user_vectors,
                    const std::vector<EvalSet>& sets, std::size_t max_k) {
  EvalReport report;
  report.max_k = max_k;
  report.model_checksum = model_checksum(model);
  MetricAccumulator acc(max_k);

  // One cache for every id touched by the eval sets.
  std::vector<std::string> user_ids;
  std::set<std::string> item_ids;
  std::vector<const EvalSet*> usable;
  for (const auto& set : sets) {
    if (!user_vectors.count(set.user_id)) {
      log_warn("evaluate: skipping user " + set.user_id + " (no user vector)");
      ++report.users_skipped;
      continue;
    }
    usable.push_back(&set);
    user_ids.push_back(set.user_id);
    item_ids.insert(set.candidates.begin(), set.candidates.end());
  }
  const std::vector<std::string> item_vec(item_ids.begin(), item_ids.end());
  const auto cache =
      build_cache(model, corpus, user_vectors, user_ids, item_vec);
  verify_cache(cache, model);

  for (const EvalSet* set : usable) {
    const std::size_t k = std::min(max_k, set->candidates.size());
    auto ranked = recommend(cache, model.head, set->user_id, set->candidates, k);
    std::vector<std::string> ids;
    ids.reserve(ranked.size());
    for (const auto& s : ranked) ids.push_back(s.id);
    acc.add(ids, set->concealed);
    report.concealed_per_user = set->concealed.size();
    report.ranked.emplace_back(set->user_id, std::move(ids));
  }
  report.users_evaluated = acc.users;
  acc.finish(report);
  return report;
}

EvalReport evaluate_random(const std::vector<EvalSet>& sets, std::size_t max_k,
                           std::uint64_t seed) {
  EvalReport report;
  report.max_k = max_k;
  report.label = "random";
  MetricAccumulator acc(max_k);
  for (const auto& set : sets) {
    Rng rng(derive_seed(seed, "randscore", set.user_id));
    std::vector<Scored> scored;
    scored.reserve(set.candidates.size());
    for (const auto& iid : set.candidates) {
      scored.push_back({iid, rng.uniform()});
    }
    std::sort(scored.begin(), scored.end(),
              [](const Scored& a, const Scored& b) {
                if (a.distance != b.distance) return a.distance < b.distance;
                return a.id < b.id;
              });
    std::vector<std::string> ids;
    const std::size_t k = std::min(max_k, scored.size());
    for (std::size_t i = 0; i < k; ++i) ids.push_back(scored[i].id);
    acc.add(ids, set.concealed);
    report.concealed_per_user = set.concealed.size();
    report.ranked.emplace_back(set.user_id, std::move(ids));
  }
  report.users_evaluated = acc.users;
  acc.finish(report);
  return report;
}

std::string report_text(const EvalReport& report) {
  std::string out = "cdlrec evaluation report\n";
  if (!report.label.empty()) out += "label " + report.label + "\n";
  out += "model_checksum " + to_hex(report.model_checksum) + "\n";
  out += "users_evaluated " + std::to_string(report.users_evaluated) + "\n";
  out += "users_skipped " + std::to_string(report.users_skipped) + "\n";
  out += "concealed_per_user " + std::to_string(report.concealed_per_user) + "\n";
  out += "max_k " + std::to_string(report.max_k) + "\n";
  out += "K precision recall\n";
  for (std::size_t i = 0; i < report.max_k; ++i) {
    out += std::to_string(i + 1) + " " + format_double(report.precision[i]) +
           " " + format_double(report.recall[i]) + "\n";
  }
  for (const auto& [uid, ids] : report.ranked) {
    out += "ranked " + uid + " " + join(ids, ',') + "\n";
  }
  return out;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "K,precision,recall\n";
  for (std::size_t i = 0; i < report.max_k; ++i) {
    out += std::to_string(i + 1) + "," + format_double(report.precision[i]) +
           "," + format_double(report.recall[i]) + "\n";
  }
  return out;
}

}  // namespace cdlrec
