#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "cdlrec/corpus.hpp"
#include "cdlrec/embeddings.hpp"

namespace cdlrec {

// Planted-structure corpus: users and items carry hidden prototype labels;
// users favor items of their own prototype (with noise), tags come from
// per-prototype pools whose embeddings form separated blobs, friendships and
// groups connect users of the same prototype.
struct SynthConfig {
  std::size_t prototypes = 4;
  std::size_t users = 400;
  std::size_t items = 2000;
  std::size_t groups_per_prototype = 2;
  std::size_t tags_per_prototype = 24;
  std::size_t embedding_dim = 16;
  std::size_t feature_dim = 16;
  std::size_t tags_per_item_min = 2;
  std::size_t tags_per_item_max = 4;
  std::size_t tags_per_user_min = 8;
  std::size_t tags_per_user_max = 16;
  std::size_t favorites_min = 30;
  std::size_t favorites_max = 60;
  std::size_t friends_per_user = 4;
  double favorite_noise = 0.1;  // fraction of favorites drawn off-prototype
  double tag_noise = 0.05;      // fraction of tags drawn off-prototype
  double feature_noise = 0.25;  // gaussian sigma around the prototype center
  double embedding_noise = 0.3;
  double prototype_scale = 2.0;  // magnitude of prototype centers
  std::uint64_t seed = 0;
  bool operator==(const SynthConfig&) const = default;
};

struct SynthPlan {
  std::map<std::string, std::size_t> user_prototype;
  std::map<std::string, std::size_t> item_prototype;
};

struct SynthResult {
  Corpus corpus;
  EmbeddingTable embeddings;
  SynthPlan plan;
};

SynthResult generate_corpus(const SynthConfig& cfg);

void save_plan(const SynthPlan& plan, const std::string& path);
SynthPlan load_plan(const std::string& path);

}  // namespace cdlrec
