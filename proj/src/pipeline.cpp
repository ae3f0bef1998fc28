#include "cdlrec/pipeline.hpp"

#include <filesystem>
#include <ostream>

#include "cdlrec/checkpoint.hpp"
#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"
#include "cdlrec/recsys.hpp"

namespace cdlrec {

namespace {

using nlohmann::json;

std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Tracks per-stage input/output checksums in manifest.json. A stage is
// skipped when its inputs are unchanged, its outputs still match, and no
// upstream stage re-ran in this invocation.
class StageRunner {
 public:
  StageRunner(std::string manifest_path, std::ostream& log)
      : manifest_path_(std::move(manifest_path)), log_(log) {
    if (file_exists(manifest_path_)) {
      try {
        manifest_ = json::parse(read_file(manifest_path_));
      } catch (const json::exception&) {
        manifest_ = json::object();
      }
    } else {
      manifest_ = json::object();
    }
    if (!manifest_.contains("stages")) manifest_["stages"] = json::object();
  }

  template <typename Fn>
  StageOutcome run(const std::string& name, const json& inputs,
                   const std::vector<std::string>& outputs, const Fn& body) {
    const bool inputs_match = manifest_["stages"].contains(name) &&
                              manifest_["stages"][name]["inputs"] == inputs;
    const bool outputs_match =
        inputs_match && outputs_current(manifest_["stages"][name], outputs);
    if (!upstream_ran_ && inputs_match && outputs_match) {
      log_ << "stage " << name << ": skipped (up to date)\n";
      return {name, true};
    }

    log_ << "stage " << name << ": running\n";
    body();

    json entry;
    entry["inputs"] = inputs;
    entry["outputs"] = json::object();
    for (const auto& out : outputs) {
      entry["outputs"][out] = to_hex(checksum_file(out));
    }
    manifest_["stages"][name] = entry;
    write_file(manifest_path_, manifest_.dump(2) + "\n");
    upstream_ran_ = true;
    return {name, false};
  }

 private:
  static bool outputs_current(const json& entry,
                              const std::vector<std::string>& outputs) {
    if (!entry.contains("outputs")) return false;
    for (const auto& out : outputs) {
      if (!entry["outputs"].contains(out)) return false;
      if (!file_exists(out)) return false;
      if (entry["outputs"][out] != to_hex(checksum_file(out))) return false;
    }
    return true;
  }

  std::string manifest_path_;
  std::ostream& log_;
  json manifest_;
  bool upstream_ran_ = false;
};

json section(const json& whole, const char* key) { return whole.at(key); }

EncoderConfig user_encoder_config(const ModelConfig& model, std::size_t k) {
  return {k, model.user_hidden, model.latent_dim, model.encoder_dropout};
}

EncoderConfig item_encoder_config(const ModelConfig& model,
                                  std::size_t feature_dim) {
  return {feature_dim, model.item_hidden, model.latent_dim,
          model.encoder_dropout};
}

std::size_t corpus_feature_dim(const Corpus& corpus) {
  if (corpus.items.empty()) throw DataError("corpus has no items");
  return corpus.items.begin()->second.features.size();
}

std::string loss_curve_csv(const std::vector<double>& history) {
  std::string out = "epoch,mean_loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(history[i]) + "\n";
  }
  return out;
}

TrainConfig train_config_with_seed(const RunConfig& cfg) {
  TrainConfig train = cfg.train;
  train.sgd.seed = derive_seed(cfg.seed, "train");
  train.clamp_head_nonnegative = cfg.model.clamp_head_nonnegative;
  return train;
}

SplitSpec split_with_seed(const RunConfig& cfg) {
  SplitSpec split = cfg.split;
  split.seed = derive_seed(cfg.seed, "split");
  return split;
}

CdlModel initial_model(const RunConfig& cfg, std::size_t k,
                       std::size_t feature_dim) {
  Rng rng(derive_seed(cfg.seed, "model"));
  return make_model(user_encoder_config(cfg.model, k),
                    item_encoder_config(cfg.model, feature_dim),
                    cfg.model.head_dropout, rng);
}

}  // namespace

ArtifactPaths artifact_paths(const std::string& output_dir) {
  return {path_join(output_dir, "clusters.txt"),
          path_join(output_dir, "user_vectors.txt"),
          path_join(output_dir, "user_split.txt"),
          path_join(output_dir, "triplets.txt"),
          path_join(output_dir, "eval_sets.txt"),
          path_join(output_dir, "checkpoint.txt"),
          path_join(output_dir, "loss_curve.csv"),
          path_join(output_dir, "report.txt"),
          path_join(output_dir, "report.csv"),
          path_join(output_dir, "manifest.json")};
}

void run_synth(const RunConfig& cfg, std::ostream& log) {
  SynthConfig synth = cfg.synth;
  synth.seed = derive_seed(cfg.seed, "synth");
  log << "synth: generating " << synth.users << " users, " << synth.items
      << " items, " << synth.prototypes << " prototypes\n";
  const auto result = generate_corpus(synth);
  std::filesystem::create_directories(cfg.output_dir);
  save_corpus(result.corpus, path_join(cfg.output_dir, "corpus.txt"));
  save_embeddings(result.embeddings,
                  path_join(cfg.output_dir, "embeddings.txt"));
  save_plan(result.plan, path_join(cfg.output_dir, "plan.json"));
  log << "synth: wrote corpus.txt, embeddings.txt, plan.json under "
      << cfg.output_dir << "\n";
}

std::vector<StageOutcome> run_pipeline(const RunConfig& cfg, std::ostream& log,
                                       const std::string& last_stage) {
  if (cfg.corpus_path.empty() || cfg.embeddings_path.empty()) {
    throw ConfigError("pipeline requires paths.corpus and paths.embeddings");
  }
  const ArtifactPaths paths = artifact_paths(cfg.output_dir);
  std::filesystem::create_directories(cfg.output_dir);
  const json cfg_json = config_to_json(cfg);

  StageRunner runner(paths.manifest, log);
  std::vector<StageOutcome> outcomes;
  const auto done = [&](const std::string& stage) {
    return stage == last_stage;
  };

  // cluster
  {
    json inputs;
    inputs["embeddings"] = to_hex(checksum_file(cfg.embeddings_path));
    inputs["config"] = section(cfg_json, "uservec");
    inputs["seed"] = derive_seed(cfg.seed, "cluster");
    outcomes.push_back(runner.run("cluster", inputs, {paths.clusters}, [&] {
      const auto table = load_embeddings(cfg.embeddings_path);
      const auto model =
          kmeans(table, cfg.uservec.clusters, cfg.uservec.kmeans_max_iters,
                 derive_seed(cfg.seed, "cluster"));
      save_cluster_model(model, paths.clusters);
    }));
  }
  if (done("cluster")) return outcomes;

  // uservec
  {
    json inputs;
    inputs["corpus"] = to_hex(checksum_file(cfg.corpus_path));
    inputs["clusters"] = to_hex(checksum_file(paths.clusters));
    const std::string histogram = path_join(cfg.output_dir, "cluster_histogram.csv");
    outcomes.push_back(runner.run(
        "uservec", inputs, {paths.user_vectors, histogram}, [&] {
          const auto corpus = load_corpus(cfg.corpus_path);
          const auto clusters = load_cluster_model(paths.clusters);
          const auto vectors = vectorize_all_users(corpus, clusters);
          save_user_vectors(vectors, clusters.k, paths.user_vectors);

          // Per-cluster user-interest counts, as plot data.
          std::vector<UserVector> all;
          all.reserve(vectors.size());
          for (const auto& [uid, v] : vectors) {
            (void)uid;
            all.push_back(v);
          }
          const auto counts = cluster_histogram(all, clusters.k);
          std::string csv = "cluster,users_interested\n";
          for (std::size_t c = 0; c < counts.size(); ++c) {
            csv += std::to_string(c) + "," + std::to_string(counts[c]) + "\n";
          }
          write_file(histogram, csv);
        }));
  }
  if (done("uservec")) return outcomes;

  // filter
  {
    json inputs;
    inputs["corpus"] = to_hex(checksum_file(cfg.corpus_path));
    inputs["clusters"] = to_hex(checksum_file(paths.clusters));
    inputs["config"] = section(cfg_json, "filter");
    outcomes.push_back(runner.run("filter", inputs, {paths.user_split}, [&] {
      const auto corpus = load_corpus(cfg.corpus_path);
      const auto clusters = load_cluster_model(paths.clusters);
      const auto result = filter_users(corpus, cfg.filter, clusters);
      log << "filter: " << result.train_users.size() << " train users, "
          << result.test_users.size() << " test users\n";
      save_split(result, paths.user_split);
    }));
  }
  if (done("filter")) return outcomes;

  // triplets + eval sets
  {
    json inputs;
    inputs["corpus"] = to_hex(checksum_file(cfg.corpus_path));
    inputs["clusters"] = to_hex(checksum_file(paths.clusters));
    inputs["split_users"] = to_hex(checksum_file(paths.user_split));
    inputs["config"] = section(cfg_json, "split");
    inputs["negatives"] = section(cfg_json, "negatives");
    inputs["seed"] = derive_seed(cfg.seed, "split");
    outcomes.push_back(
        runner.run("triplets", inputs, {paths.triplets, paths.eval_sets}, [&] {
          const auto corpus = load_corpus(cfg.corpus_path);
          const auto clusters = load_cluster_model(paths.clusters);
          const auto users = load_split(paths.user_split);
          const SplitSpec spec = split_with_seed(cfg);

          const auto pools = build_negative_pools(corpus, users.test_users,
                                                  clusters, cfg.negative_rule);
          SampleStats tstats;
          const auto triplets = sample_triplets_from_pools(
              corpus, users.train_users, pools, spec, &tstats);
          save_triplets(triplets, paths.triplets);
          SampleStats estats;
          const auto sets = build_eval_sets_from_pools(
              corpus, users.test_users, pools, spec, &estats);
          save_eval_sets(sets, paths.eval_sets);
          log << "triplets: " << triplets.size() << " triplets ("
              << tstats.users_skipped << " users skipped), " << sets.size()
              << " eval sets (" << estats.users_skipped << " skipped)\n";
        }));
  }
  if (done("triplets")) return outcomes;

  // train
  {
    json inputs;
    inputs["corpus"] = to_hex(checksum_file(cfg.corpus_path));
    inputs["triplets"] = to_hex(checksum_file(paths.triplets));
    inputs["user_vectors"] = to_hex(checksum_file(paths.user_vectors));
    inputs["model"] = section(cfg_json, "model");
    inputs["train"] = section(cfg_json, "train");
    inputs["seed"] = derive_seed(cfg.seed, "train");
    outcomes.push_back(runner.run(
        "train", inputs, {paths.checkpoint, paths.loss_curve}, [&] {
          const auto corpus = load_corpus(cfg.corpus_path);
          std::size_t k = 0;
          const auto user_vectors = load_user_vectors(paths.user_vectors, &k);
          const auto triplets = load_triplets(paths.triplets);
          const TrainConfig train = train_config_with_seed(cfg);
          CdlModel model = initial_model(cfg, k, corpus_feature_dim(corpus));

          const auto state = train_cdl(
              corpus, user_vectors, triplets, std::move(model), train,
              [&](const TrainState& s) {
                if (train.eval_every > 0 && s.epoch % train.eval_every == 0) {
                  log << "train: epoch " << s.epoch << " mean loss "
                      << s.loss_history.back() << "\n";
                }
                if (train.checkpoint_every > 0 &&
                    s.epoch % train.checkpoint_every == 0 &&
                    s.epoch < train.epochs) {
                  save_checkpoint(s, train, paths.checkpoint);
                }
              });
          save_checkpoint(state, train, paths.checkpoint);
          write_file(paths.loss_curve, loss_curve_csv(state.loss_history));
          log << "train: final mean loss "
              << (state.loss_history.empty() ? 0.0 : state.loss_history.back())
              << "\n";
        }));
  }
  if (done("train")) return outcomes;

  // evaluate
  {
    json inputs;
    inputs["corpus"] = to_hex(checksum_file(cfg.corpus_path));
    inputs["checkpoint"] = to_hex(checksum_file(paths.checkpoint));
    inputs["eval_sets"] = to_hex(checksum_file(paths.eval_sets));
    inputs["user_vectors"] = to_hex(checksum_file(paths.user_vectors));
    inputs["config"] = section(cfg_json, "eval");
    outcomes.push_back(runner.run(
        "evaluate", inputs, {paths.report_txt, paths.report_csv}, [&] {
          const auto corpus = load_corpus(cfg.corpus_path);
          const auto user_vectors = load_user_vectors(paths.user_vectors, nullptr);
          const auto sets = load_eval_sets(paths.eval_sets);
          const auto loaded = load_checkpoint(paths.checkpoint);
          auto report =
              evaluate(loaded.state.model, corpus, user_vectors, sets, cfg.eval.max_k);
          report.label = "cdl";
          write_file(paths.report_txt, report_text(report));
          write_file(paths.report_csv, report_csv(report));
          if (!report.precision.empty()) {
            log << "evaluate: precision@" << report.max_k << " = "
                << report.precision.back() << ", recall@" << report.max_k
                << " = " << report.recall.back() << " over "
                << report.users_evaluated << " users\n";
          }
        }));
  }
  return outcomes;
}

void run_compare(const RunConfig& cfg, std::ostream& log) {
  // Shared data stages.
  run_pipeline(cfg, log, "triplets");
  const ArtifactPaths paths = artifact_paths(cfg.output_dir);

  const auto corpus = load_corpus(cfg.corpus_path);
  std::size_t k = 0;
  const auto user_vectors = load_user_vectors(paths.user_vectors, &k);
  const auto clusters = load_cluster_model(paths.clusters);
  const auto users = load_split(paths.user_split);
  const auto triplets = load_triplets(paths.triplets);
  const auto sets = load_eval_sets(paths.eval_sets);
  const SplitSpec spec = split_with_seed(cfg);
  const std::size_t feature_dim = corpus_feature_dim(corpus);

  const std::string compare_dir = path_join(cfg.output_dir, "compare");
  std::filesystem::create_directories(compare_dir);

  std::vector<EvalReport> reports;

  const auto train_variant = [&](const std::string& name, LossKind loss) {
    log << "compare: training " << name << "\n";
    TrainConfig train = train_config_with_seed(cfg);
    train.loss = loss;
    CdlModel model = initial_model(cfg, k, feature_dim);
    const auto state = train_cdl(corpus, user_vectors, triplets,
                                 std::move(model), train);
    save_checkpoint(state, train,
                    path_join(compare_dir, name + "_checkpoint.txt"));
    auto report = evaluate(state.model, corpus, user_vectors, sets, cfg.eval.max_k);
    report.label = name;
    write_file(path_join(compare_dir, name + "_report.txt"), report_text(report));
    reports.push_back(std::move(report));
  };

  train_variant("cdl_xent", LossKind{LossKind::Kind::cross_entropy,
                                     cfg.train.loss.margin});
  train_variant("cdl_hinge",
                LossKind{LossKind::Kind::hinge, cfg.train.loss.margin});

  {
    log << "compare: training twonets\n";
    TrainConfig train = train_config_with_seed(cfg);
    const auto doublets = make_doublets_from_pools(
        corpus, users.train_users,
        build_negative_pools(corpus, users.test_users, clusters,
                             cfg.negative_rule),
        spec);
    CdlModel model = initial_model(cfg, k, feature_dim);
    const auto state = train_twonets(corpus, user_vectors, doublets,
                                     std::move(model), train);
    save_checkpoint(state, train,
                    path_join(compare_dir, "twonets_checkpoint.txt"));
    auto report = evaluate(state.model, corpus, user_vectors, sets, cfg.eval.max_k);
    report.label = "twonets";
    write_file(path_join(compare_dir, "twonets_report.txt"), report_text(report));
    reports.push_back(std::move(report));
  }

  {
    auto report = evaluate_random(sets, cfg.eval.max_k, derive_seed(cfg.seed, "random"));
    write_file(path_join(compare_dir, "random_report.txt"), report_text(report));
    reports.push_back(std::move(report));
  }

  // Combined K-vs-metric table.
  std::string csv = "K";
  for (const auto& r : reports) {
    csv += "," + r.label + "_precision," + r.label + "_recall";
  }
  csv += "\n";
  for (std::size_t i = 0; i < cfg.eval.max_k; ++i) {
    csv += std::to_string(i + 1);
    for (const auto& r : reports) {
      csv += "," + format_double(r.precision[i]) + "," +
             format_double(r.recall[i]);
    }
    csv += "\n";
  }
  write_file(path_join(compare_dir, "compare.csv"), csv);

  std::string summary = "cdlrec model comparison\n";
  for (const auto& r : reports) {
    summary += r.label + ": precision@" + std::to_string(cfg.eval.max_k) +
               " = " + format_double(r.precision.back()) + ", recall@" +
               std::to_string(cfg.eval.max_k) + " = " +
               format_double(r.recall.back()) + "\n";
  }
  write_file(path_join(compare_dir, "compare.txt"), summary);
  log << "compare: wrote " << path_join(compare_dir, "compare.csv") << "\n";
}

}  // namespace cdlrec
