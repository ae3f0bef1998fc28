#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdlrec/dataset.hpp"
#include "cdlrec/model.hpp"

namespace cdlrec {

// Inference-mode latent vectors precomputed for a fixed model; entries are
// only valid for the model whose parameter checksum is stored.
struct RepresentationCache {
  std::map<std::string, std::vector<double>> users;
  std::map<std::string, std::vector<double>> items;
  std::uint64_t model_checksum = 0;

  const std::vector<double>& user_latent(const std::string& id) const;
  const std::vector<double>& item_latent(const std::string& id) const;
};

RepresentationCache build_cache(const CdlModel& model, const Corpus& corpus,
                                const UserVectorTable& user_vectors,
                                std::span<const std::string> user_ids,
                                std::span<const std::string> item_ids);

// Rejects a cache built from different parameters.
void verify_cache(const RepresentationCache& cache, const CdlModel& model);

// Open-corpus candidate selection: items whose tag clusters intersect the
// user's interest clusters. The fixed-pool evaluation path bypasses this.
std::vector<std::string> select_candidates(const Corpus& corpus,
                                           const std::string& user_id,
                                           const ClusterModel& model);

struct Scored {
  std::string id;
  double distance = 0.0;
  bool operator==(const Scored&) const = default;
};

// Candidates sorted by ascending inference-mode distance to the user latent,
// ties broken by ascending item id; the first k returned.
std::vector<Scored> recommend(const RepresentationCache& cache,
                              const DistanceHead& head,
                              const std::string& user_id,
                              std::span<const std::string> candidates,
                              std::size_t k);

struct EvalReport {
  std::size_t max_k = 0;
  std::size_t concealed_per_user = 0;
  std::vector<double> precision;  // index K-1
  std::vector<double> recall;
  std::size_t users_evaluated = 0;
  std::size_t users_skipped = 0;
  std::uint64_t model_checksum = 0;
  std::string label;  // model variant name for reports
  std::vector<std::pair<std::string, std::vector<std::string>>> ranked;
};

EvalReport evaluate(const CdlModel& model, const Corpus& corpus,
                    const UserVectorTable& user_vectors,
                    const std::vector<EvalSet>& sets, std::size_t max_k);

// Baseline: candidates scored by seeded random values instead of distances.
EvalReport evaluate_random(const std::vector<EvalSet>& sets, std::size_t max_k,
                           std::uint64_t seed);

std::string report_text(const EvalReport& report);
std::string report_csv(const EvalReport& report);

}  // namespace cdlrec
