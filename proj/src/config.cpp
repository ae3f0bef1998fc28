#include "cdlrec/config.hpp"

#include <set>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"

namespace cdlrec {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError("config: '" + where + "' must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) {
      throw ConfigError("config: unknown key '" + where +
                        (where.empty() ? "" : ".") + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for '" + std::string(key) +
                      "': " + e.what());
  }
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig config_from_json(const json& j) {
  reject_unknown(j, {"paths", "seed", "uservec", "filter", "split", "model",
                     "train", "eval", "synth", "negatives", "paper"},
                 "");
  RunConfig cfg;

  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    reject_unknown(p, {"corpus", "embeddings", "output_dir"}, "paths");
    read(p, "corpus", cfg.corpus_path);
    read(p, "embeddings", cfg.embeddings_path);
    read(p, "output_dir", cfg.output_dir);
  }
  read(j, "seed", cfg.seed);

  if (j.contains("uservec")) {
    const auto& u = j.at("uservec");
    reject_unknown(u, {"clusters", "kmeans_max_iters"}, "uservec");
    read(u, "clusters", cfg.uservec.clusters);
    read(u, "kmeans_max_iters", cfg.uservec.kmeans_max_iters);
  }
  if (j.contains("filter")) {
    const auto& f = j.at("filter");
    reject_unknown(
        f, {"min_favorites", "max_favorites", "min_clusters", "max_clusters"},
        "filter");
    read(f, "min_favorites", cfg.filter.min_favorites);
    read(f, "max_favorites", cfg.filter.max_favorites);
    read(f, "min_clusters", cfg.filter.min_clusters);
    read(f, "max_clusters", cfg.filter.max_clusters);
    if (cfg.filter.min_favorites >= cfg.filter.max_favorites ||
        cfg.filter.min_clusters >= cfg.filter.max_clusters) {
      throw ConfigError("config: filter minimum must stay below maximum");
    }
  }
  if (j.contains("split")) {
    const auto& s = j.at("split");
    reject_unknown(
        s, {"concealed_per_user", "distractors_per_user", "triplets_per_user"},
        "split");
    read(s, "concealed_per_user", cfg.split.concealed_per_user);
    read(s, "distractors_per_user", cfg.split.distractors_per_user);
    read(s, "triplets_per_user", cfg.split.triplets_per_user);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m,
                   {"latent_dim", "user_hidden", "item_hidden",
                    "encoder_dropout", "head_dropout", "clamp_head_nonnegative"},
                   "model");
    read(m, "latent_dim", cfg.model.latent_dim);
    read(m, "user_hidden", cfg.model.user_hidden);
    read(m, "item_hidden", cfg.model.item_hidden);
    read(m, "encoder_dropout", cfg.model.encoder_dropout);
    read(m, "head_dropout", cfg.model.head_dropout);
    read(m, "clamp_head_nonnegative", cfg.model.clamp_head_nonnegative);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t,
                   {"learning_rate", "momentum", "weight_decay", "batch_size",
                    "loss", "hinge_margin", "epochs", "dropout_enabled",
                    "checkpoint_every", "eval_every", "lr_decay_factor",
                    "lr_decay_every"},
                   "train");
    read(t, "learning_rate", cfg.train.sgd.learning_rate);
    read(t, "momentum", cfg.train.sgd.momentum);
    read(t, "weight_decay", cfg.train.sgd.weight_decay);
    read(t, "batch_size", cfg.train.sgd.batch_size);
    if (t.contains("loss")) {
      const std::string name = t.at("loss").get<std::string>();
      if (name == "cross_entropy") {
        cfg.train.loss.kind = LossKind::Kind::cross_entropy;
      } else if (name == "hinge") {
        cfg.train.loss.kind = LossKind::Kind::hinge;
      } else {
        throw ConfigError("config: train.loss must be cross_entropy or hinge");
      }
    }
    read(t, "hinge_margin", cfg.train.loss.margin);
    read(t, "epochs", cfg.train.epochs);
    read(t, "dropout_enabled", cfg.train.dropout_enabled);
    read(t, "checkpoint_every", cfg.train.checkpoint_every);
    read(t, "eval_every", cfg.train.eval_every);
    read(t, "lr_decay_factor", cfg.train.lr_decay_factor);
    read(t, "lr_decay_every", cfg.train.lr_decay_every);
    if (cfg.train.loss.margin <= 0.0) {
      throw ConfigError("config: hinge_margin must be positive");
    }
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    reject_unknown(e, {"max_k"}, "eval");
    read(e, "max_k", cfg.eval.max_k);
  }
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    reject_unknown(s,
                   {"prototypes", "users", "items", "groups_per_prototype",
                    "tags_per_prototype", "embedding_dim", "feature_dim",
                    "tags_per_item_min", "tags_per_item_max",
                    "tags_per_user_min", "tags_per_user_max", "favorites_min",
                    "favorites_max", "friends_per_user", "favorite_noise",
                    "tag_noise", "feature_noise", "embedding_noise",
                    "prototype_scale"},
                   "synth");
    read(s, "prototypes", cfg.synth.prototypes);
    read(s, "users", cfg.synth.users);
    read(s, "items", cfg.synth.items);
    read(s, "groups_per_prototype", cfg.synth.groups_per_prototype);
    read(s, "tags_per_prototype", cfg.synth.tags_per_prototype);
    read(s, "embedding_dim", cfg.synth.embedding_dim);
    read(s, "feature_dim", cfg.synth.feature_dim);
    read(s, "tags_per_item_min", cfg.synth.tags_per_item_min);
    read(s, "tags_per_item_max", cfg.synth.tags_per_item_max);
    read(s, "tags_per_user_min", cfg.synth.tags_per_user_min);
    read(s, "tags_per_user_max", cfg.synth.tags_per_user_max);
    read(s, "favorites_min", cfg.synth.favorites_min);
    read(s, "favorites_max", cfg.synth.favorites_max);
    read(s, "friends_per_user", cfg.synth.friends_per_user);
    read(s, "favorite_noise", cfg.synth.favorite_noise);
    read(s, "tag_noise", cfg.synth.tag_noise);
    read(s, "feature_noise", cfg.synth.feature_noise);
    read(s, "embedding_noise", cfg.synth.embedding_noise);
    read(s, "prototype_scale", cfg.synth.prototype_scale);
  }
  if (j.contains("negatives")) {
    const auto& n = j.at("negatives");
    reject_unknown(n, {"rule"}, "negatives");
    if (n.contains("rule")) {
      const std::string rule = n.at("rule").get<std::string>();
      if (rule == "clusters") {
        cfg.negative_rule = NegativeTagRule::clusters;
      } else if (rule == "raw_tags") {
        cfg.negative_rule = NegativeTagRule::raw_tags;
      } else {
        throw ConfigError("config: negatives.rule must be clusters or raw_tags");
      }
    }
  }
  if (j.contains("paper") && !j.at("paper").is_object()) {
    throw ConfigError("config: 'paper' must be an object");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["paths"] = {{"corpus", cfg.corpus_path},
                {"embeddings", cfg.embeddings_path},
                {"output_dir", cfg.output_dir}};
  j["seed"] = cfg.seed;
  j["uservec"] = {{"clusters", cfg.uservec.clusters},
                  {"kmeans_max_iters", cfg.uservec.kmeans_max_iters}};
  j["filter"] = {{"min_favorites", cfg.filter.min_favorites},
                 {"max_favorites", cfg.filter.max_favorites},
                 {"min_clusters", cfg.filter.min_clusters},
                 {"max_clusters", cfg.filter.max_clusters}};
  j["split"] = {{"concealed_per_user", cfg.split.concealed_per_user},
                {"distractors_per_user", cfg.split.distractors_per_user},
                {"triplets_per_user", cfg.split.triplets_per_user}};
  j["model"] = {{"latent_dim", cfg.model.latent_dim},
                {"user_hidden", cfg.model.user_hidden},
                {"item_hidden", cfg.model.item_hidden},
                {"encoder_dropout", cfg.model.encoder_dropout},
                {"head_dropout", cfg.model.head_dropout},
                {"clamp_head_nonnegative", cfg.model.clamp_head_nonnegative}};
  j["train"] = {
      {"learning_rate", cfg.train.sgd.learning_rate},
      {"momentum", cfg.train.sgd.momentum},
      {"weight_decay", cfg.train.sgd.weight_decay},
      {"batch_size", cfg.train.sgd.batch_size},
      {"loss", cfg.train.loss.kind == LossKind::Kind::hinge ? "hinge"
                                                            : "cross_entropy"},
      {"hinge_margin", cfg.train.loss.margin},
      {"epochs", cfg.train.epochs},
      {"dropout_enabled", cfg.train.dropout_enabled},
      {"checkpoint_every", cfg.train.checkpoint_every},
      {"eval_every", cfg.train.eval_every},
      {"lr_decay_factor", cfg.train.lr_decay_factor},
      {"lr_decay_every", cfg.train.lr_decay_every}};
  j["eval"] = {{"max_k", cfg.eval.max_k}};
  j["synth"] = {{"prototypes", cfg.synth.prototypes},
                {"users", cfg.synth.users},
                {"items", cfg.synth.items},
                {"groups_per_prototype", cfg.synth.groups_per_prototype},
                {"tags_per_prototype", cfg.synth.tags_per_prototype},
                {"embedding_dim", cfg.synth.embedding_dim},
                {"feature_dim", cfg.synth.feature_dim},
                {"tags_per_item_min", cfg.synth.tags_per_item_min},
                {"tags_per_item_max", cfg.synth.tags_per_item_max},
                {"tags_per_user_min", cfg.synth.tags_per_user_min},
                {"tags_per_user_max", cfg.synth.tags_per_user_max},
                {"favorites_min", cfg.synth.favorites_min},
                {"favorites_max", cfg.synth.favorites_max},
                {"friends_per_user", cfg.synth.friends_per_user},
                {"favorite_noise", cfg.synth.favorite_noise},
                {"tag_noise", cfg.synth.tag_noise},
                {"feature_noise", cfg.synth.feature_noise},
                {"embedding_noise", cfg.synth.embedding_noise},
                {"prototype_scale", cfg.synth.prototype_scale}};
  j["negatives"] = {
      {"rule", cfg.negative_rule == NegativeTagRule::raw_tags ? "raw_tags"
                                                              : "clusters"}};
  return j;
}

json annotated_config_json(const RunConfig& cfg) {
  json j = config_to_json(cfg);
  j["paper"] = {{"uservec.clusters", 1024},
                {"filter.min_favorites", 40},
                {"filter.max_favorites", 200},
                {"filter.min_clusters", 80},
                {"filter.max_clusters", 280},
                {"split.concealed_per_user", 20},
                {"split.distractors_per_user", 80},
                {"split.triplets_per_user", 20},
                {"model.latent_dim", 1024},
                {"model.head_dropout", 0.5},
                {"train.learning_rate", 0.001},
                {"train.momentum", 0.9},
                {"train.weight_decay", 0.0005},
                {"train.batch_size", 128},
                {"eval.max_k", 20}};
  return j;
}

void apply_override(json& j, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must be key.path=value, got '" + assignment +
                      "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json* node = &j;
  for (const auto& key : split(path, '.')) {
    if (key.empty()) {
      throw ConfigError("override has an empty path segment: '" + assignment +
                        "'");
    }
    node = &(*node)[key];
  }
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) {
    *node = value;  // plain string
  } else {
    *node = parsed;
  }
}

}  // namespace cdlrec
