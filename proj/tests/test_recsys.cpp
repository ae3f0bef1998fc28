#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

#include "cdlrec/dataset.hpp"
#include "cdlrec/errors.hpp"
#include "cdlrec/recsys.hpp"
#include "cdlrec/synth.hpp"

using namespace cdlrec;

namespace {

struct Fixture {
  Corpus corpus;
  UserVectorTable user_vectors;
  CdlModel model;
  std::vector<std::string> item_ids;
};

Fixture make_fixture(std::size_t items = 40, std::uint64_t seed = 3) {
  Fixture f;
  Rng rng(seed);
  f.model = make_model(EncoderConfig{4, {}, 3, 0.0},
                       EncoderConfig{5, {}, 3, 0.0}, 0.0, rng);
  for (std::size_t i = 0; i < items; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "i%03zu", i);
    std::vector<double> feat(5);
    for (double& x : feat) x = rng.uniform(-1.0, 1.0);
    f.corpus.items[buf] = {feat, {"t"}};
    f.item_ids.push_back(buf);
  }
  UserVector v(4, 0.0);
  v[0] = 0.5;
  v[1] = 0.5;
  f.user_vectors["u1"] = v;
  f.corpus.users["u1"] = {{"t"}, {}, {}, {}};
  return f;
}

}  // namespace

TEST_CASE("build_cache entries equal direct encode calls, and rebuilds agree") {
  auto f = make_fixture();
  const std::vector<std::string> users{"u1"};
  const auto cache =
      build_cache(f.model, f.corpus, f.user_vectors, users, f.item_ids);
  CHECK(cache.users.size() == 1);
  CHECK(cache.items.size() == f.item_ids.size());
  for (const auto& iid : f.item_ids) {
    CHECK(cache.item_latent(iid) ==
          encode_item(f.model, f.corpus.item(iid).features));
  }
  CHECK(cache.user_latent("u1") == encode_user(f.model, f.user_vectors["u1"]));

  const auto rebuilt =
      build_cache(f.model, f.corpus, f.user_vectors, users, f.item_ids);
  CHECK(rebuilt.users == cache.users);
  CHECK(rebuilt.items == cache.items);
  CHECK_NOTHROW(verify_cache(cache, f.model));
}

TEST_CASE("an empty id list yields an empty cache") {
  auto f = make_fixture();
  const auto cache = build_cache(f.model, f.corpus, f.user_vectors, {}, {});
  CHECK(cache.users.empty());
  CHECK(cache.items.empty());
}

TEST_CASE("a stale cache is rejected") {
  auto f = make_fixture();
  auto cache = build_cache(f.model, f.corpus, f.user_vectors, {}, {});
  f.model.head.weights[0] += 1.0;
  CHECK_THROWS_AS(verify_cache(cache, f.model), DataError);
}

TEST_CASE("cache misses name the id") {
  auto f = make_fixture();
  const auto cache = build_cache(f.model, f.corpus, f.user_vectors, {}, {});
  try {
    cache.user_latent("ghost");
    FAIL("expected CacheMissError");
  } catch (const CacheMissError& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
}

TEST_CASE("recommend with k equal to the pool size is a permutation") {
  auto f = make_fixture();
  const auto cache = build_cache(f.model, f.corpus, f.user_vectors, std::vector<std::string>{"u1"},
                                 f.item_ids);
  const auto ranked =
      recommend(cache, f.model.head, "u1", f.item_ids, f.item_ids.size());
  CHECK(ranked.size() == f.item_ids.size());
  std::set<std::string> seen;
  for (const auto& s : ranked) seen.insert(s.id);
  CHECK(seen.size() == f.item_ids.size());
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    CHECK(ranked[i - 1].distance <= ranked[i].distance);
  }
}

TEST_CASE("recommend matches a brute-force sort of independent distances") {
  auto f = make_fixture(100, 9);
  const auto cache = build_cache(f.model, f.corpus, f.user_vectors, std::vector<std::string>{"u1"},
                                 f.item_ids);
  const auto ranked =
      recommend(cache, f.model.head, "u1", f.item_ids, f.item_ids.size());

  const auto user_latent = encode_user(f.model, f.user_vectors["u1"]);
  std::vector<std::pair<double, std::string>> brute;
  for (const auto& iid : f.item_ids) {
    const auto latent = encode_item(f.model, f.corpus.item(iid).features);
    double d = 0.0;
    for (std::size_t k = 0; k < latent.size(); ++k) {
      const double diff = user_latent[k] - latent[k];
      d += f.model.head.weights[k] * diff * diff;
    }
    brute.emplace_back(d, iid);
  }
  std::sort(brute.begin(), brute.end());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    CHECK(ranked[i].id == brute[i].second);
    CHECK(ranked[i].distance == doctest::Approx(brute[i].first).epsilon(1e-12));
  }
}

TEST_CASE("an item colocated with the user ranks first at distance zero") {
  Fixture f = make_fixture(5, 11);
  RepresentationCache cache;
  cache.model_checksum = model_checksum(f.model);
  cache.users["u1"] = {1.0, 2.0, 3.0};
  cache.items["match"] = {1.0, 2.0, 3.0};
  cache.items["far"] = {9.0, 9.0, 9.0};
  const std::vector<std::string> pool{"far", "match"};
  const auto ranked = recommend(cache, f.model.head, "u1", pool, 2);
  CHECK(ranked[0].id == "match");
  CHECK(ranked[0].distance == 0.0);
}

TEST_CASE("distance ties break by ascending item id") {
  Fixture f = make_fixture(5, 12);
  RepresentationCache cache;
  cache.users["u1"] = {0.0, 0.0, 0.0};
  cache.items["b"] = {1.0, 0.0, 0.0};
  cache.items["a"] = {0.0, 1.0, 0.0};
  cache.items["c"] = {0.0, 0.0, 1.0};
  const std::vector<std::string> pool{"b", "c", "a"};
  const auto ranked = recommend(cache, f.model.head, "u1", pool, 3);
  CHECK(ranked[0].id == "a");
  CHECK(ranked[1].id == "b");
  CHECK(ranked[2].id == "c");
}

TEST_CASE("recommend rejects k above the pool size and missing ids") {
  auto f = make_fixture(5, 13);
  const auto cache =
      build_cache(f.model, f.corpus, f.user_vectors, std::vector<std::string>{"u1"}, f.item_ids);
  CHECK_THROWS_AS(recommend(cache, f.model.head, "u1", f.item_ids, 99),
                  DataError);
  const std::vector<std::string> pool{"nope"};
  CHECK_THROWS_AS(recommend(cache, f.model.head, "u1", pool, 1),
                  CacheMissError);
}

TEST_CASE("ranking is invariant under a positive rescaling of the head") {
  auto f = make_fixture(60, 14);
  const auto cache =
      build_cache(f.model, f.corpus, f.user_vectors, std::vector<std::string>{"u1"}, f.item_ids);
  const auto base =
      recommend(cache, f.model.head, "u1", f.item_ids, f.item_ids.size());
  DistanceHead scaled = f.model.head;
  for (double& w : scaled.weights) w *= 7.5;  // strictly increasing transform
  const auto rescaled =
      recommend(cache, scaled, "u1", f.item_ids, f.item_ids.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(base[i].id == rescaled[i].id);
  }
}

TEST_CASE("select_candidates requires a shared interest cluster") {
  Corpus c;
  c.items["i1"] = {{1.0}, {"x", "z"}};
  c.items["i2"] = {{1.0}, {"y"}};
  c.users["u1"] = {{"x"}, {}, {}, {}};
  ClusterModel m;
  m.k = 3;
  m.assignment = {{"x", 0}, {"y", 1}, {"z", 2}};
  const auto got = select_candidates(c, "u1", m);
  CHECK(got == std::vector<std::string>{"i1"});
}

TEST_CASE("select_candidates matches a brute-force intersection filter") {
  SynthConfig scfg;
  scfg.prototypes = 3;
  scfg.users = 20;
  scfg.items = 120;
  scfg.tags_per_prototype = 8;
  scfg.embedding_dim = 6;
  scfg.feature_dim = 6;
  scfg.favorites_min = 5;
  scfg.favorites_max = 10;
  scfg.seed = 6;
  const auto synth = generate_corpus(scfg);
  const auto model = kmeans(synth.embeddings, 9, 30, 2);
  for (const auto& [uid, user] : synth.corpus.users) {
    std::vector<std::string> tags = user.tags;
    for (const auto& fav : user.favorites) {
      const auto& item_tags = synth.corpus.items.at(fav).tags;
      tags.insert(tags.end(), item_tags.begin(), item_tags.end());
    }
    std::set<std::size_t> interests;
    for (const auto& t : tags) {
      auto it = model.assignment.find(t);
      if (it != model.assignment.end()) interests.insert(it->second);
    }
    std::vector<std::string> want;
    for (const auto& [iid, item] : synth.corpus.items) {
      bool hit = false;
      for (const auto& t : item.tags) {
        auto it = model.assignment.find(t);
        if (it != model.assignment.end() && interests.count(it->second)) {
          hit = true;
          break;
        }
      }
      if (hit) want.push_back(iid);
    }
    CHECK(select_candidates(synth.corpus, uid, model) == want);
  }
}

TEST_CASE("evaluate on a hand-built fixture matches hand-computed metrics") {
  // Three users; identity-like model over 1-dim features so distances are
  // fully controlled: latent = feature, user latents 0, item latent = value.
  Corpus corpus;
  UserVectorTable vectors;
  Rng rng(0);
  CdlModel model = make_model(EncoderConfig{1, {}, 1, 0.0},
                              EncoderConfig{1, {}, 1, 0.0}, 0.0, rng);
  model.user_encoder.layers[0].weights.at(0, 0) = 1.0;
  model.item_encoder.layers[0].weights.at(0, 0) = 1.0;

  // Items at increasing distance from 0.
  for (int i = 0; i < 6; ++i) {
    corpus.items["i" + std::to_string(i)] = {{static_cast<double>(i)}, {"t"}};
  }
  std::vector<EvalSet> sets;
  for (int u = 0; u < 3; ++u) {
    const std::string uid = "u" + std::to_string(u);
    vectors[uid] = {0.0};
    corpus.users[uid] = {{"t"}, {}, {}, {}};
    // Concealed = the two nearest items; candidates = nearest four.
    sets.push_back({uid, {"i0", "i1"}, {"i3", "i1", "i0", "i2"}});
  }
  const auto report = evaluate(model, corpus, vectors, sets, 4);
  CHECK(report.users_evaluated == 3);
  // Ranking is i0, i1, i2, i3 for every user; hits at ranks 1 and 2.
  CHECK(report.precision[0] == doctest::Approx(1.0));
  CHECK(report.precision[1] == doctest::Approx(1.0));
  CHECK(report.precision[2] == doctest::Approx(2.0 / 3.0));
  CHECK(report.precision[3] == doctest::Approx(0.5));
  CHECK(report.recall[0] == doctest::Approx(0.5));
  CHECK(report.recall[1] == doctest::Approx(1.0));
  CHECK(report.recall[3] == doctest::Approx(1.0));
}

TEST_CASE("a perfect ranking gives precision@K and recall@K of 1") {
  Corpus corpus;
  UserVectorTable vectors;
  Rng rng(1);
  CdlModel model = make_model(EncoderConfig{1, {}, 1, 0.0},
                              EncoderConfig{1, {}, 1, 0.0}, 0.0, rng);
  model.user_encoder.layers[0].weights.at(0, 0) = 1.0;
  model.item_encoder.layers[0].weights.at(0, 0) = 1.0;
  vectors["u"] = {0.0};
  corpus.users["u"] = {{"t"}, {}, {}, {}};
  std::vector<std::string> concealed, candidates;
  for (int i = 0; i < 40; ++i) {
    const std::string id = "i" + std::to_string(100 + i);
    corpus.items[id] = {{i < 20 ? 0.1 : 5.0}, {"t"}};
    if (i < 20) concealed.push_back(id);
    candidates.push_back(id);
  }
  const auto report =
      evaluate(model, corpus, vectors, {{"u", concealed, candidates}}, 20);
  CHECK(report.precision[19] == doctest::Approx(1.0));
  CHECK(report.recall[19] == doctest::Approx(1.0));
}

TEST_CASE("recall grows with K and hits identities hold") {
  auto f = make_fixture(30, 21);
  std::vector<std::string> concealed(f.item_ids.begin(), f.item_ids.begin() + 5);
  const auto report = evaluate(f.model, f.corpus, f.user_vectors,
                               {{"u1", concealed, f.item_ids}}, 20);
  for (std::size_t i = 1; i < 20; ++i) {
    CHECK(report.recall[i] >= report.recall[i - 1] - 1e-12);
  }
  // precision@K * K == recall@K * |concealed| (both count hits@K).
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(report.precision[i] * static_cast<double>(i + 1) ==
          doctest::Approx(report.recall[i] * 5.0).epsilon(1e-12));
  }
}

TEST_CASE("users without vectors are skipped and counted") {
  auto f = make_fixture(30, 22);
  std::vector<std::string> concealed(f.item_ids.begin(), f.item_ids.begin() + 3);
  std::vector<EvalSet> sets{{"u1", concealed, f.item_ids},
                            {"missing", concealed, f.item_ids}};
  const auto report = evaluate(f.model, f.corpus, f.user_vectors, sets, 5);
  CHECK(report.users_evaluated == 1);
  CHECK(report.users_skipped == 1);
}

TEST_CASE("random scoring over 20-in-100 pools calibrates to 0.2") {
  Rng rng(23);
  std::vector<EvalSet> sets;
  for (int u = 0; u < 300; ++u) {
    EvalSet s;
    s.user_id = "u" + std::to_string(u);
    for (int i = 0; i < 100; ++i) {
      const std::string id = "i" + std::to_string(i);
      s.candidates.push_back(id);
      if (i < 20) s.concealed.push_back(id);
    }
    sets.push_back(std::move(s));
  }
  const auto report = evaluate_random(sets, 20, 99);
  CHECK(report.users_evaluated == 300);
  CHECK(std::fabs(report.precision[19] - 0.2) < 0.03);
}

TEST_CASE("report text and csv carry the per-K table") {
  auto f = make_fixture(30, 24);
  std::vector<std::string> concealed(f.item_ids.begin(), f.item_ids.begin() + 3);
  const auto report = evaluate(f.model, f.corpus, f.user_vectors,
                               {{"u1", concealed, f.item_ids}}, 5);
  const auto text = report_text(report);
  CHECK(text.find("users_evaluated 1") != std::string::npos);
  CHECK(text.find("K precision recall") != std::string::npos);
  const auto csv = report_csv(report);
  CHECK(csv.rfind("K,precision,recall\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 rows
}
