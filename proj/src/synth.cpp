#include "cdlrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"
#include "cdlrec/rng.hpp"

#include "json.hpp"

namespace cdlrec {

namespace {

std::string padded_id(char prefix, std::size_t idx) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%05zu", prefix, idx);
  return buf;
}

std::vector<double> random_center(std::size_t dim, double scale, Rng& rng) {
  std::vector<double> v(dim);
  double norm = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) norm = 1.0;
  for (double& x : v) x = x / norm * scale;
  return v;
}

std::vector<double> jitter(const std::vector<double>& center, double sigma,
                           Rng& rng) {
  std::vector<double> v(center.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = center[i] + sigma * rng.normal();
  }
  return v;
}

std::size_t other_prototype(std::size_t own, std::size_t count, Rng& rng) {
  const std::size_t shift = 1 + rng.below(count - 1);
  return (own + shift) % count;
}

}  // namespace

SynthResult generate_corpus(const SynthConfig& cfg) {
  if (cfg.prototypes < 2) {
    throw ConfigError("synth: need at least 2 prototypes");
  }
  if (cfg.tags_per_item_min > cfg.tags_per_item_max ||
      cfg.tags_per_user_min > cfg.tags_per_user_max ||
      cfg.favorites_min > cfg.favorites_max) {
    throw ConfigError("synth: min above max in a range");
  }
  if (cfg.favorites_max > cfg.items) {
    throw ConfigError("synth: favorites_max exceeds item count");
  }

  SynthResult result;
  const std::size_t g = cfg.prototypes;

  // Tag vocabulary and embeddings: one separated blob per prototype.
  std::vector<std::vector<std::string>> proto_tags(g);
  {
    Rng rng(derive_seed(cfg.seed, "synth-embeddings"));
    std::vector<std::vector<double>> centers;
    for (std::size_t p = 0; p < g; ++p) {
      centers.push_back(
          random_center(cfg.embedding_dim, cfg.prototype_scale * 2.0, rng));
    }
    result.embeddings.dim = cfg.embedding_dim;
    for (std::size_t p = 0; p < g; ++p) {
      for (std::size_t t = 0; t < cfg.tags_per_prototype; ++t) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "p%zut%03zu", p, t);
        proto_tags[p].push_back(buf);
        result.embeddings.entries[buf] =
            jitter(centers[p], cfg.embedding_noise, rng);
      }
    }
  }

  // Items: features around per-prototype centers, tags from the pool.
  std::vector<std::vector<std::string>> proto_items(g);
  {
    Rng rng(derive_seed(cfg.seed, "synth-items"));
    std::vector<std::vector<double>> centers;
    for (std::size_t p = 0; p < g; ++p) {
      centers.push_back(
          random_center(cfg.feature_dim, cfg.prototype_scale, rng));
    }
    for (std::size_t i = 0; i < cfg.items; ++i) {
      const std::string id = padded_id('i', i);
      const std::size_t p = rng.below(g);
      ItemRecord item;
      item.features = jitter(centers[p], cfg.feature_noise, rng);
      const std::size_t n_tags =
          cfg.tags_per_item_min +
          rng.below(cfg.tags_per_item_max - cfg.tags_per_item_min + 1);
      std::set<std::string> tags;
      while (tags.size() < n_tags) {
        const std::size_t source = rng.uniform() < cfg.tag_noise
                                       ? other_prototype(p, g, rng)
                                       : p;
        tags.insert(proto_tags[source][rng.below(proto_tags[source].size())]);
      }
      item.tags.assign(tags.begin(), tags.end());
      result.corpus.items[id] = std::move(item);
      result.plan.item_prototype[id] = p;
      proto_items[p].push_back(id);
    }
  }
  for (std::size_t p = 0; p < g; ++p) {
    if (proto_items[p].empty()) {
      throw DataError("synth: prototype " + std::to_string(p) +
                      " received no items; increase items or change seed");
    }
  }

  // Users: tags and favorites mostly from the own prototype.
  std::vector<std::vector<std::string>> proto_users(g);
  {
    Rng rng(derive_seed(cfg.seed, "synth-users"));
    for (std::size_t u = 0; u < cfg.users; ++u) {
      const std::string id = padded_id('u', u);
      const std::size_t p = rng.below(g);
      UserRecord user;
      const std::size_t n_tags =
          cfg.tags_per_user_min +
          rng.below(cfg.tags_per_user_max - cfg.tags_per_user_min + 1);
      for (std::size_t t = 0; t < n_tags; ++t) {
        const std::size_t source = rng.uniform() < cfg.tag_noise
                                       ? other_prototype(p, g, rng)
                                       : p;
        user.tags.push_back(
            proto_tags[source][rng.below(proto_tags[source].size())]);
      }
      const std::size_t n_favs =
          cfg.favorites_min +
          rng.below(cfg.favorites_max - cfg.favorites_min + 1);
      std::set<std::string> favorites;
      std::size_t attempts = 0;
      while (favorites.size() < n_favs && attempts < n_favs * 50) {
        ++attempts;
        const std::size_t source = rng.uniform() < cfg.favorite_noise
                                       ? other_prototype(p, g, rng)
                                       : p;
        favorites.insert(
            proto_items[source][rng.below(proto_items[source].size())]);
      }
      user.favorites.assign(favorites.begin(), favorites.end());
      result.corpus.users[id] = std::move(user);
      result.plan.user_prototype[id] = p;
      proto_users[p].push_back(id);
    }
  }

  // Friendships within the prototype.
  {
    Rng rng(derive_seed(cfg.seed, "synth-friends"));
    for (auto& [id, user] : result.corpus.users) {
      const std::size_t p = result.plan.user_prototype[id];
      const auto& peers = proto_users[p];
      if (peers.size() < 2) continue;
      std::set<std::string> friends;
      const std::size_t want = std::min(cfg.friends_per_user, peers.size() - 1);
      std::size_t attempts = 0;
      while (friends.size() < want && attempts < want * 50) {
        ++attempts;
        const auto& peer = peers[rng.below(peers.size())];
        if (peer != id) friends.insert(peer);
      }
      user.friends.assign(friends.begin(), friends.end());
    }
  }

  // Groups: per prototype, members drawn from that prototype.
  {
    Rng rng(derive_seed(cfg.seed, "synth-groups"));
    std::size_t group_idx = 0;
    for (std::size_t p = 0; p < g; ++p) {
      std::vector<std::string> group_ids;
      for (std::size_t j = 0; j < cfg.groups_per_prototype; ++j) {
        group_ids.push_back(padded_id('g', group_idx++));
        result.corpus.groups[group_ids.back()] = {};
      }
      if (group_ids.empty()) continue;
      for (const auto& uid : proto_users[p]) {
        const auto& gid = group_ids[rng.below(group_ids.size())];
        result.corpus.groups[gid].members.push_back(uid);
        result.corpus.users[uid].groups.push_back(gid);
      }
    }
    for (auto& [gid, group] : result.corpus.groups) {
      std::sort(group.members.begin(), group.members.end());
    }
  }

  validate_corpus(result.corpus, "synth");
  return result;
}

void save_plan(const SynthPlan& plan, const std::string& path) {
  nlohmann::json j;
  j["user_prototype"] = plan.user_prototype;
  j["item_prototype"] = plan.item_prototype;
  write_file(path, j.dump(2) + "\n");
}

SynthPlan load_plan(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  SynthPlan plan;
  plan.user_prototype =
      j.at("user_prototype").get<std::map<std::string, std::size_t>>();
  plan.item_prototype =
      j.at("item_prototype").get<std::map<std::string, std::size_t>>();
  return plan;
}

}  // namespace cdlrec
