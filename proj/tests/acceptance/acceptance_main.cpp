// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier end-to-end checks run the same pipeline entry points as
// the CLI against generated corpora under a scratch directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cdlrec/checkpoint.hpp"
#include "cdlrec/io_util.hpp"
#include "cdlrec/pipeline.hpp"
#include "cdlrec/recsys.hpp"

using namespace cdlrec;

namespace {

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

std::filesystem::path g_work;
std::ostringstream g_sink;  // swallows pipeline progress logs

std::string work_dir(const std::string& name) {
  const auto dir = g_work / name;
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -1.0,
                               double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// ---------------------------------------------------------------------------
// Criterion 1: loss identities.

CriterionResult criterion_loss_identities() {
  Rng rng(101);
  double worst_ln2 = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double d = rng.uniform(-50.0, 50.0);
    const auto r = comparative_loss(LossKind{}, d, d);
    worst_ln2 = std::max(worst_ln2, std::fabs(r.loss - std::log(2.0)));
  }
  double worst_anti = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double d_pos = rng.uniform(-30.0, 30.0);
    const double d_neg = rng.uniform(-30.0, 30.0);
    worst_anti = std::max(worst_anti,
                          std::fabs(pair_cross_entropy(d_pos - d_neg, 0) -
                                    pair_cross_entropy(d_neg - d_pos, 1)));
  }
  const bool pass = worst_ln2 < 1e-12 && worst_anti < 1e-12;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "ln2 identity err %.2e (100 draws), antisymmetry err %.2e "
                "(1000 pairs), tolerance 1e-12",
                worst_ln2, worst_anti);
  return {pass, buf};
}

// ---------------------------------------------------------------------------
// Criterion 2: gradient correctness of the full triplet loss.

CriterionResult criterion_gradient_check() {
  double worst = 0.0;
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    Rng rng(200 + draw);
    auto model = make_model(EncoderConfig{8, {6}, 4, 0.0},
                            EncoderConfig{8, {6}, 4, 0.0}, 0.5, rng);
    const auto u = random_vec(8, rng);
    const auto pos = random_vec(8, rng);
    const auto neg = random_vec(8, rng);
    const LossKind kind = draw % 2 == 0
                              ? LossKind{}
                              : LossKind{LossKind::Kind::hinge, 1.0};

    ModelGrads grads = zero_grads(model);
    Rng scratch(0);
    triplet_forward_backward(model, u, pos, neg, kind, Mode::inference,
                             scratch, grads);
    const auto loss = [&] {
      ModelGrads unused = zero_grads(model);
      Rng r2(0);
      return triplet_forward_backward(model, u, pos, neg, kind,
                                      Mode::inference, r2, unused)
          .loss;
    };
    worst = std::max(worst, grad_check(loss, parameter_views(model),
                                       flatten_grads(grads), 1e-5));
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "max relative gradient error %.3e over 20 draws (tolerance 1e-4)",
                worst);
  return {worst < 1e-4, buf};
}

// ---------------------------------------------------------------------------
// Criterion 3: weight sharing between the item towers.

CriterionResult criterion_weight_sharing() {
  Rng rng(301);
  auto model = make_model(EncoderConfig{6, {8}, 5, 0.0},
                          EncoderConfig{7, {8}, 5, 0.0}, 0.0, rng);
  bool identical = true;
  double worst_grad_gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto item = random_vec(7, rng);
    const auto user = random_vec(6, rng);
    const auto other = random_vec(7, rng);

    ModelGrads same = zero_grads(model);
    Rng r0(0);
    const auto twin = triplet_forward_backward(model, user, item, item,
                                               LossKind{}, Mode::inference, r0,
                                               same);
    if (twin.pos_latent != twin.neg_latent) identical = false;

    // Shared accumulation vs the sum of per-tower contributions.
    ModelGrads shared = zero_grads(model);
    Rng r1(0);
    const auto r = triplet_forward_backward(model, user, item, other,
                                            LossKind{}, Mode::inference, r1,
                                            shared);
    EncoderGrads pos_only = zero_grads(model.item_encoder);
    EncoderGrads neg_only = zero_grads(model.item_encoder);
    encoder_backward(model.item_encoder,
                     encode_traced(model.item_encoder, item, Mode::inference),
                     r.grad_pos_latent, pos_only);
    encoder_backward(model.item_encoder,
                     encode_traced(model.item_encoder, other, Mode::inference),
                     r.grad_neg_latent, neg_only);
    for (std::size_t li = 0; li < pos_only.weights.size(); ++li) {
      for (std::size_t j = 0; j < pos_only.weights[li].data.size(); ++j) {
        const double want =
            pos_only.weights[li].data[j] + neg_only.weights[li].data[j];
        worst_grad_gap =
            std::max(worst_grad_gap,
                     std::fabs(shared.item_encoder.weights[li].data[j] - want));
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "tower latents bit-identical on 100 items: %s; shared-gradient "
                "gap %.2e (tolerance 1e-10)",
                identical ? "yes" : "NO", worst_grad_gap);
  return {identical && worst_grad_gap < 1e-10, buf};
}

// ---------------------------------------------------------------------------
// Criterion 4: k-means behavior.

CriterionResult criterion_kmeans() {
  bool monotone = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(400 + seed);
    EmbeddingTable table;
    table.dim = 1 + rng.below(6);
    const std::size_t n = 30 + rng.below(120);
    for (std::size_t i = 0; i < n; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "t%04zu", i);
      table.entries[buf] = random_vec(table.dim, rng, -3.0, 3.0);
    }
    KmeansStats stats;
    kmeans(table, 2 + seed % 7, 60, seed, &stats);
    for (std::size_t i = 1; i < stats.objective.size(); ++i) {
      if (stats.objective[i] > stats.objective[i - 1] + 1e-9) monotone = false;
    }
  }

  EmbeddingTable blobs;
  blobs.dim = 2;
  Rng rng(499);
  for (int i = 0; i < 25; ++i) {
    blobs.entries["a" + std::to_string(i)] = {rng.uniform(-0.5, 0.5),
                                              rng.uniform(-0.5, 0.5)};
    blobs.entries["b" + std::to_string(i)] = {20.0 + rng.uniform(-0.5, 0.5),
                                              20.0 + rng.uniform(-0.5, 0.5)};
  }
  const auto model = kmeans(blobs, 2, 50, 7);
  bool exact = true;
  const std::size_t cluster_a = model.assignment.at("a0");
  const std::size_t cluster_b = model.assignment.at("b0");
  if (cluster_a == cluster_b) exact = false;
  for (int i = 0; i < 25; ++i) {
    if (model.assignment.at("a" + std::to_string(i)) != cluster_a) exact = false;
    if (model.assignment.at("b" + std::to_string(i)) != cluster_b) exact = false;
  }
  std::string detail = std::string("objective monotone on 20 datasets: ") +
                       (monotone ? "yes" : "NO") +
                       "; two-blob clustering exact: " + (exact ? "yes" : "NO");
  return {monotone && exact, detail};
}

// ---------------------------------------------------------------------------
// Criterion 5/6 corpus: 500 users.

SynthConfig pipeline_synth_500() {
  SynthConfig cfg;
  cfg.prototypes = 4;
  cfg.users = 500;
  cfg.items = 1000;
  cfg.tags_per_prototype = 24;
  cfg.embedding_dim = 16;
  cfg.feature_dim = 16;
  cfg.favorites_min = 25;
  cfg.favorites_max = 50;
  cfg.friends_per_user = 4;
  cfg.seed = 20240501;
  return cfg;
}

CriterionResult criterion_pipeline_soundness() {
  const auto synth = generate_corpus(pipeline_synth_500());
  const auto& corpus = synth.corpus;
  const auto clusters = kmeans(synth.embeddings, 64, 50, 1);
  std::vector<std::string> users;
  for (const auto& [uid, user] : corpus.users) {
    (void)user;
    users.push_back(uid);
  }
  SplitSpec spec{20, 80, 20, 555};

  const auto pools = build_negative_pools(corpus, users, clusters);
  const auto triplets = sample_triplets_from_pools(corpus, users, pools, spec);
  const auto sets = build_eval_sets_from_pools(corpus, users, pools, spec);
  if (triplets.empty() || sets.size() < 200) {
    return {false, "pipeline produced too little data (" +
                       std::to_string(triplets.size()) + " triplets, " +
                       std::to_string(sets.size()) + " eval sets)"};
  }

  // Zero leakage between concealed positives and training positives.
  std::map<std::string, std::set<std::string>> train_positives;
  for (const auto& t : triplets) {
    train_positives[t.user_id].insert(t.positive_item_id);
  }
  std::size_t leaks = 0;
  for (const auto& s : sets) {
    auto it = train_positives.find(s.user_id);
    if (it == train_positives.end()) continue;
    for (const auto& c : s.concealed) leaks += it->second.count(c);
  }

  // Brute-force three-rule re-verification of every sampled negative.
  std::size_t bad_negatives = 0;
  std::map<std::string, std::set<std::string>> verified_pools;
  for (const auto& t : triplets) {
    auto it = verified_pools.find(t.user_id);
    if (it == verified_pools.end()) {
      const auto& user = corpus.user(t.user_id);
      // Interests = own tags plus favorite-item tags.
      std::vector<std::string> tags = user.tags;
      for (const auto& fav : user.favorites) {
        const auto& item_tags = corpus.items.at(fav).tags;
        tags.insert(tags.end(), item_tags.begin(), item_tags.end());
      }
      std::set<std::size_t> interests;
      for (const auto& tag : tags) {
        auto a = clusters.assignment.find(tag);
        if (a != clusters.assignment.end()) interests.insert(a->second);
      }
      const auto liked = potentially_liked(corpus, t.user_id);
      const std::set<std::string> favs(user.favorites.begin(),
                                       user.favorites.end());
      std::set<std::string> pool;
      for (const auto& [iid, item] : corpus.items) {
        bool overlap = false;
        for (const auto& tag : item.tags) {
          auto a = clusters.assignment.find(tag);
          if (a != clusters.assignment.end() && interests.count(a->second)) {
            overlap = true;
            break;
          }
        }
        if (!overlap && !liked.count(iid) && !favs.count(iid)) pool.insert(iid);
      }
      it = verified_pools.emplace(t.user_id, std::move(pool)).first;
    }
    if (!it->second.count(t.negative_item_id)) ++bad_negatives;
  }

  // Deterministic regeneration.
  const auto triplets2 = sample_triplets_from_pools(corpus, users, pools, spec);
  const auto sets2 = build_eval_sets_from_pools(corpus, users, pools, spec);
  const bool deterministic = triplets == triplets2 && sets == sets2;

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%zu triplets, %zu eval sets; leaks %zu; unsound negatives "
                "%zu; regeneration identical: %s",
                triplets.size(), sets.size(), leaks, bad_negatives,
                deterministic ? "yes" : "NO");
  return {leaks == 0 && bad_negatives == 0 && deterministic, buf};
}

CriterionResult criterion_random_baseline() {
  const auto synth = generate_corpus(pipeline_synth_500());
  const auto clusters = kmeans(synth.embeddings, 64, 50, 1);
  std::vector<std::string> users;
  for (const auto& [uid, user] : synth.corpus.users) {
    (void)user;
    users.push_back(uid);
  }
  SplitSpec spec{20, 80, 20, 555};
  const auto sets = build_eval_sets(synth.corpus, users, spec, clusters);
  if (sets.size() < 200) {
    return {false, "only " + std::to_string(sets.size()) + " eval sets"};
  }
  const auto report = evaluate_random(sets, 20, 777);
  const double p20 = report.precision[19];
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "random precision@20 = %.4f over %zu users (target 0.2 +- 0.03)",
                p20, report.users_evaluated);
  return {std::fabs(p20 - 0.2) <= 0.03, buf};
}

// ---------------------------------------------------------------------------
// Criterion 7: planted-structure recovery, end to end.

RunConfig planted_config(const std::string& dir) {
  RunConfig cfg;
  cfg.seed = 42;
  cfg.output_dir = dir;
  cfg.corpus_path = dir + "/corpus.txt";
  cfg.embeddings_path = dir + "/embeddings.txt";
  cfg.synth.prototypes = 4;
  cfg.synth.users = 400;
  cfg.synth.items = 2000;
  cfg.synth.tags_per_prototype = 24;
  cfg.synth.embedding_dim = 16;
  cfg.synth.feature_dim = 16;
  cfg.synth.favorites_min = 30;
  cfg.synth.favorites_max = 60;
  cfg.synth.friends_per_user = 4;
  cfg.synth.favorite_noise = 0.1;  // moderate noise
  cfg.synth.tag_noise = 0.05;
  cfg.uservec.clusters = 64;
  cfg.uservec.kmeans_max_iters = 50;
  cfg.filter.min_favorites = 25;
  cfg.filter.max_favorites = 100;
  cfg.filter.min_clusters = 2;
  cfg.filter.max_clusters = 64;
  cfg.split.concealed_per_user = 20;
  cfg.split.distractors_per_user = 80;
  cfg.split.triplets_per_user = 20;
  cfg.model.latent_dim = 32;
  cfg.model.user_hidden = {48};
  cfg.model.item_hidden = {32};
  // train block stays at the reference defaults: lr 0.001, momentum 0.9,
  // weight decay 0.0005, batch 128, dropout 0.5.
  cfg.train.epochs = 30;
  cfg.eval.max_k = 20;
  return cfg;
}

// Held-out triplets: each concealed positive paired with a distractor from
// the same user's candidate pool.
std::vector<Triplet> heldout_triplets(const std::vector<EvalSet>& sets,
                                      std::uint64_t seed) {
  std::vector<Triplet> out;
  for (const auto& s : sets) {
    const std::set<std::string> concealed(s.concealed.begin(),
                                          s.concealed.end());
    std::vector<std::string> distractors;
    for (const auto& c : s.candidates) {
      if (!concealed.count(c)) distractors.push_back(c);
    }
    if (distractors.empty()) continue;
    Rng rng(derive_seed(seed, "heldout", s.user_id));
    for (const auto& pos : s.concealed) {
      out.push_back(
          {s.user_id, pos, distractors[rng.below(distractors.size())]});
    }
  }
  return out;
}

// Independent oracle: logistic regression over the bilinear feature map
// psi(U, I) = user_vector (x) item_features, trained on the same triplets
// with its own plain gradient-descent loop.
struct BilinearOracle {
  std::size_t user_dim = 0, item_dim = 0;
  std::vector<double> w;  // user_dim x item_dim

  double score(const std::vector<double>& u,
               const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t c = 0; c < user_dim; ++c) {
      if (u[c] == 0.0) continue;
      const double* row = w.data() + c * item_dim;
      double dot = 0.0;
      for (std::size_t j = 0; j < item_dim; ++j) dot += row[j] * x[j];
      s += u[c] * dot;
    }
    return s;
  }
};

BilinearOracle train_oracle(const Corpus& corpus,
                            const UserVectorTable& vectors,
                            const std::vector<Triplet>& triplets,
                            std::size_t epochs, double lr) {
  BilinearOracle o;
  o.user_dim = vectors.begin()->second.size();
  o.item_dim = corpus.items.begin()->second.features.size();
  o.w.assign(o.user_dim * o.item_dim, 0.0);
  std::vector<double> velocity(o.w.size(), 0.0);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::vector<double> grad(o.w.size(), 0.0);
    for (const auto& t : triplets) {
      const auto& u = vectors.at(t.user_id);
      const auto& p = corpus.item(t.positive_item_id).features;
      const auto& n = corpus.item(t.negative_item_id).features;
      const double z = o.score(u, p) - o.score(u, n);
      // d softplus(-z) / dz = -1 / (1 + e^z)
      const double g = -1.0 / (1.0 + std::exp(z));
      for (std::size_t c = 0; c < o.user_dim; ++c) {
        if (u[c] == 0.0) continue;
        double* row = grad.data() + c * o.item_dim;
        const double scale = g * u[c];
        for (std::size_t j = 0; j < o.item_dim; ++j) {
          row[j] += scale * (p[j] - n[j]);
        }
      }
    }
    const double inv = 1.0 / static_cast<double>(triplets.size());
    for (std::size_t i = 0; i < o.w.size(); ++i) {
      velocity[i] = 0.9 * velocity[i] - lr * grad[i] * inv;
      o.w[i] += velocity[i];
    }
  }
  return o;
}

double oracle_satisfaction(const BilinearOracle& o, const Corpus& corpus,
                           const UserVectorTable& vectors,
                           const std::vector<Triplet>& triplets) {
  std::size_t ok = 0;
  for (const auto& t : triplets) {
    const auto& u = vectors.at(t.user_id);
    if (o.score(u, corpus.item(t.positive_item_id).features) >
        o.score(u, corpus.item(t.negative_item_id).features)) {
      ++ok;
    }
  }
  return static_cast<double>(ok) / static_cast<double>(triplets.size());
}

double oracle_precision_at(const BilinearOracle& o, const Corpus& corpus,
                           const UserVectorTable& vectors,
                           const std::vector<EvalSet>& sets, std::size_t k) {
  double total = 0.0;
  std::size_t users = 0;
  for (const auto& s : sets) {
    auto uit = vectors.find(s.user_id);
    if (uit == vectors.end()) continue;
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& iid : s.candidates) {
      scored.emplace_back(-o.score(uit->second, corpus.item(iid).features),
                          iid);
    }
    std::sort(scored.begin(), scored.end());
    const std::set<std::string> concealed(s.concealed.begin(),
                                          s.concealed.end());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k && i < scored.size(); ++i) {
      hits += concealed.count(scored[i].second);
    }
    total += static_cast<double>(hits) / static_cast<double>(k);
    ++users;
  }
  return users == 0 ? 0.0 : total / static_cast<double>(users);
}

CriterionResult criterion_planted_recovery() {
  const auto cfg = planted_config(work_dir("planted"));
  run_synth(cfg, g_sink);
  run_pipeline(cfg, g_sink);

  const auto paths = artifact_paths(cfg.output_dir);
  const auto corpus = load_corpus(cfg.corpus_path);
  const auto user_vectors = load_user_vectors(paths.user_vectors, nullptr);
  const auto sets = load_eval_sets(paths.eval_sets);
  const auto loaded = load_checkpoint(paths.checkpoint);

  const auto heldout = heldout_triplets(sets, derive_seed(cfg.seed, "acc7"));
  const double satisfaction =
      triplet_satisfaction(loaded.state.model, corpus, user_vectors, heldout);

  const auto report =
      evaluate(loaded.state.model, corpus, user_vectors, sets, 20);
  const double p20 = report.precision[19];

  // Calibration record: the linear oracle on identical data and splits.
  const auto triplets = load_triplets(paths.triplets);
  const auto oracle = train_oracle(corpus, user_vectors, triplets, 120, 2.0);
  const double oracle_sat =
      oracle_satisfaction(oracle, corpus, user_vectors, heldout);
  const double oracle_p20 =
      oracle_precision_at(oracle, corpus, user_vectors, sets, 20);

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "held-out satisfaction %.4f (need >= 0.90), precision@20 %.4f "
                "(need >= 0.40); linear-oracle calibration: satisfaction %.4f, "
                "precision@20 %.4f",
                satisfaction, p20, oracle_sat, oracle_p20);
  return {satisfaction >= 0.90 && p20 >= 0.40, buf};
}

// ---------------------------------------------------------------------------
// Criterion 8: corrupted negative pools, CDL vs TwoNets.

CriterionResult criterion_corrupted_negatives() {
  const auto cfg = planted_config(work_dir("planted"));  // artifacts from c7
  const auto paths = artifact_paths(cfg.output_dir);
  if (!file_exists(paths.eval_sets)) {
    run_synth(cfg, g_sink);
    run_pipeline(cfg, g_sink, "triplets");
  }
  const auto corpus = load_corpus(cfg.corpus_path);
  std::size_t k = 0;
  const auto user_vectors = load_user_vectors(paths.user_vectors, &k);
  const auto clusters = load_cluster_model(paths.clusters);
  const auto users = load_split(paths.user_split);
  const auto sets = load_eval_sets(paths.eval_sets);
  const auto plan = load_plan(cfg.output_dir + "/plan.json");

  // Corrupt: 10% of each user's negative pool becomes items of the user's own
  // prototype (excluding favorites), i.e. secretly positive.
  auto pools = build_negative_pools(corpus, users.test_users, clusters,
                                    cfg.negative_rule);
  Rng rng(derive_seed(cfg.seed, "corrupt"));
  for (auto& [uid, pool] : pools) {
    const std::size_t proto = plan.user_prototype.at(uid);
    const auto& favorites = corpus.user(uid).favorites;
    std::vector<std::string> same_proto;
    for (const auto& [iid, p] : plan.item_prototype) {
      if (p == proto &&
          !std::binary_search(favorites.begin(), favorites.end(), iid)) {
        same_proto.push_back(iid);
      }
    }
    if (same_proto.empty() || pool.empty()) continue;
    const std::size_t corrupted = pool.size() / 10;
    for (std::size_t i = 0; i < corrupted; ++i) {
      pool[rng.below(pool.size())] = same_proto[rng.below(same_proto.size())];
    }
  }

  SplitSpec spec = cfg.split;
  spec.seed = derive_seed(cfg.seed, "split");
  const auto triplets =
      sample_triplets_from_pools(corpus, users.train_users, pools, spec);
  const auto doublets =
      make_doublets_from_pools(corpus, users.train_users, pools, spec);

  TrainConfig train = cfg.train;
  train.sgd.seed = derive_seed(cfg.seed, "train");
  Rng model_rng(derive_seed(cfg.seed, "model"));
  const CdlModel init = make_model(
      EncoderConfig{k, cfg.model.user_hidden, cfg.model.latent_dim, 0.0},
      EncoderConfig{corpus.items.begin()->second.features.size(),
                    cfg.model.item_hidden, cfg.model.latent_dim, 0.0},
      cfg.model.head_dropout, model_rng);

  const auto cdl_state = train_cdl(corpus, user_vectors, triplets, init, train);
  auto cdl_report = evaluate(cdl_state.model, corpus, user_vectors, sets, 20);
  cdl_report.label = "cdl_xent_corrupted";

  const auto twonets_state =
      train_twonets(corpus, user_vectors, doublets, init, train);
  auto twonets_report =
      evaluate(twonets_state.model, corpus, user_vectors, sets, 20);
  twonets_report.label = "twonets_corrupted";

  const std::string out_dir = work_dir("corrupted");
  write_file(out_dir + "/cdl_report.txt", report_text(cdl_report));
  write_file(out_dir + "/twonets_report.txt", report_text(twonets_report));
  std::string csv =
      "K,cdl_precision,cdl_recall,twonets_precision,twonets_recall\n";
  for (std::size_t i = 0; i < 20; ++i) {
    csv += std::to_string(i + 1) + "," +
           format_double(cdl_report.precision[i]) + "," +
           format_double(cdl_report.recall[i]) + "," +
           format_double(twonets_report.precision[i]) + "," +
           format_double(twonets_report.recall[i]) + "\n";
  }
  write_file(out_dir + "/ablation.csv", csv);

  const double cdl_p20 = cdl_report.precision[19];
  const double two_p20 = twonets_report.precision[19];
  const bool complete = cdl_report.users_evaluated > 0 &&
                        twonets_report.users_evaluated > 0 &&
                        file_exists(out_dir + "/ablation.csv");
  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "cdl precision@20 %.4f vs twonets %.4f (expected ordering "
                "cdl >= twonets: %s); both reports emitted: %s",
                cdl_p20, two_p20,
                cdl_p20 >= two_p20 ? "holds" : "DOES NOT HOLD",
                complete ? "yes" : "NO");
  return {complete, buf};
}

// ---------------------------------------------------------------------------
// Criterion 9: bit-identical reruns of the criterion-7 pipeline.

CriterionResult criterion_reproducibility() {
  const auto cfg_a = planted_config(work_dir("planted"));
  const auto paths_a = artifact_paths(cfg_a.output_dir);
  if (!file_exists(paths_a.checkpoint)) {
    run_synth(cfg_a, g_sink);
    run_pipeline(cfg_a, g_sink);
  }
  const auto cfg_b = planted_config(work_dir("planted_rerun"));
  run_synth(cfg_b, g_sink);
  run_pipeline(cfg_b, g_sink);
  const auto paths_b = artifact_paths(cfg_b.output_dir);

  const bool corpus_same =
      read_file(cfg_a.corpus_path) == read_file(cfg_b.corpus_path);
  const bool checkpoint_same =
      read_file(paths_a.checkpoint) == read_file(paths_b.checkpoint);
  const bool report_same =
      read_file(paths_a.report_txt) == read_file(paths_b.report_txt) &&
      read_file(paths_a.report_csv) == read_file(paths_b.report_csv);
  std::string detail = std::string("corpus identical: ") +
                       (corpus_same ? "yes" : "NO") +
                       "; checkpoint identical: " +
                       (checkpoint_same ? "yes" : "NO") +
                       "; reports identical: " + (report_same ? "yes" : "NO");
  return {corpus_same && checkpoint_same && report_same, detail};
}

// ---------------------------------------------------------------------------
// Criterion 10: checkpoint interrupt-and-resume equivalence.

CriterionResult criterion_resumption() {
  const auto synth = generate_corpus(pipeline_synth_500());
  const auto clusters = kmeans(synth.embeddings, 64, 50, 1);
  const auto user_vectors = vectorize_all_users(synth.corpus, clusters);
  std::vector<std::string> users;
  for (const auto& [uid, user] : synth.corpus.users) {
    (void)user;
    users.push_back(uid);
  }
  users.resize(120);
  SplitSpec spec{10, 20, 10, 99};
  const auto triplets = sample_triplets(synth.corpus, users, spec, clusters);

  TrainConfig train;
  train.sgd.seed = 4242;
  train.epochs = 6;
  Rng model_rng(31);
  const CdlModel init =
      make_model(EncoderConfig{64, {24}, 16, 0.0},
                 EncoderConfig{16, {24}, 16, 0.0}, 0.5, model_rng);

  const auto full = train_cdl(synth.corpus, user_vectors, triplets, init, train);
  const std::string full_path = work_dir("resume") + "/full.txt";
  save_checkpoint(full, train, full_path);

  bool all_match = true;
  for (const std::size_t stop : {1, 3, 5}) {
    TrainState partial = init_train_state(init, train);
    train_cdl_epochs(partial, synth.corpus, user_vectors, triplets, train,
                     stop);
    const std::string path =
        work_dir("resume") + "/at_" + std::to_string(stop) + ".txt";
    save_checkpoint(partial, train, path);
    auto resumed = load_checkpoint(path);
    train_cdl_epochs(resumed.state, synth.corpus, user_vectors, triplets,
                     resumed.config, train.epochs);
    const std::string resumed_path =
        work_dir("resume") + "/resumed_" + std::to_string(stop) + ".txt";
    save_checkpoint(resumed.state, resumed.config, resumed_path);
    if (read_file(resumed_path) != read_file(full_path)) all_match = false;
  }
  return {all_match,
          std::string("resume at epochs {1,3,5} reproduces the 6-epoch run "
                      "bit-exactly: ") +
              (all_match ? "yes" : "NO")};
}

}  // namespace

int main() {
  g_work = std::filesystem::temp_directory_path() / "cdlrec_acceptance";
  std::filesystem::remove_all(g_work);
  std::filesystem::create_directories(g_work);

  struct Criterion {
    int number;
    const char* name;
    std::function<CriterionResult()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "loss identities", criterion_loss_identities},
      {2, "gradient correctness", criterion_gradient_check},
      {3, "weight sharing", criterion_weight_sharing},
      {4, "k-means", criterion_kmeans},
      {5, "data-pipeline soundness", criterion_pipeline_soundness},
      {6, "random baseline calibration", criterion_random_baseline},
      {7, "planted-structure recovery", criterion_planted_recovery},
      {8, "corrupted-negatives ablation", criterion_corrupted_negatives},
      {9, "reproducibility", criterion_reproducibility},
      {10, "checkpoint resumption", criterion_resumption},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("criterion %2d [%s] %s: %s (%.1fs)\n", criterion.number,
                result.pass ? "pass" : "FAIL", criterion.name,
                result.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!result.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
  } else {
    std::printf("all criteria passed\n");
  }
  return failures;
}
