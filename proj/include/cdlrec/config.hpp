#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cdlrec/dataset.hpp"
#include "cdlrec/synth.hpp"
#include "cdlrec/trainer.hpp"

namespace cdlrec {

struct ModelConfig {
  std::size_t latent_dim = 1024;  // paper value; desk-scale runs override
  std::vector<std::size_t> user_hidden;
  std::vector<std::size_t> item_hidden;
  double encoder_dropout = 0.0;
  double head_dropout = 0.5;
  bool clamp_head_nonnegative = false;
  bool operator==(const ModelConfig&) const = default;
};

struct UservecConfig {
  std::size_t clusters = 1024;
  std::size_t kmeans_max_iters = 50;
  bool operator==(const UservecConfig&) const = default;
};

struct EvalConfig {
  std::size_t max_k = 20;
  bool operator==(const EvalConfig&) const = default;
};

// Full run configuration. Per-stage seeds (split.seed, train.sgd.seed, ...)
// are derived from the single global seed at run time, not configured
// directly.
struct RunConfig {
  std::string corpus_path;
  std::string embeddings_path;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  UservecConfig uservec;
  UserFilter filter;
  SplitSpec split;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  SynthConfig synth;
  NegativeTagRule negative_rule = NegativeTagRule::clusters;
  bool operator==(const RunConfig&) const = default;
};

RunConfig default_config();

// Strict parse: unknown keys are rejected at every level.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json config_to_json(const RunConfig& cfg);

// config_to_json plus a "paper" annotation object mapping dotted keys to the
// defaults that come straight from the reference setup; the parser accepts
// and ignores the annotation, so the output round-trips.
nlohmann::json annotated_config_json(const RunConfig& cfg);

// Applies one "dotted.path=value" assignment to a config JSON tree.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace cdlrec
