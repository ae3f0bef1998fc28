#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cdlrec/config.hpp"
#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"
#include "cdlrec/pipeline.hpp"

namespace {

// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_path, "JSON config file");
  cmd->add_option("--set", opts.overrides,
                  "Override a config key, dotted path: --set train.epochs=5");
  cmd->add_option("-o,--output-dir", opts.output_dir,
                  "Output directory (overrides paths.output_dir)");
  cmd->add_option("--seed", opts.seed, "Global seed (overrides config)");
}

cdlrec::RunConfig resolve_config(const CommonOpts& opts) {
  nlohmann::json j = nlohmann::json::object();
  if (!opts.config_path.empty()) {
    try {
      j = nlohmann::json::parse(cdlrec::read_file(opts.config_path));
    } catch (const nlohmann::json::exception& e) {
      throw cdlrec::ConfigError(opts.config_path + ": " + e.what());
    }
  }
  for (const auto& assignment : opts.overrides) {
    cdlrec::apply_override(j, assignment);
  }
  auto cfg = cdlrec::config_from_json(j);
  if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cdlrec: comparative dual-encoder training and top-K "
               "recommendation over hybrid user/item representations"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string pipeline_stage = "evaluate";

  auto* synth = app.add_subcommand(
      "synth", "Generate a planted-structure corpus with embeddings");
  add_common(synth, opts);

  auto* cluster = app.add_subcommand(
      "cluster", "Fit the k-means cluster model over tag embeddings");
  add_common(cluster, opts);

  auto* triplets = app.add_subcommand(
      "triplets", "Build user vectors, filter users, sample triplets and eval sets");
  add_common(triplets, opts);

  auto* train =
      app.add_subcommand("train", "Train the comparative model (and prerequisites)");
  add_common(train, opts);

  auto* evaluate = app.add_subcommand(
      "evaluate", "Rank the evaluation pools and report precision/recall");
  add_common(evaluate, opts);

  auto* pipeline =
      app.add_subcommand("pipeline", "Run every stage, skipping up-to-date ones");
  add_common(pipeline, opts);
  pipeline->add_option("--until", pipeline_stage,
                       "Last stage to run (cluster|uservec|filter|triplets|train|evaluate)");

  auto* compare = app.add_subcommand(
      "compare", "Train and evaluate cdl_xent, cdl_hinge, twonets and random");
  add_common(compare, opts);

  auto* config = app.add_subcommand("config", "Configuration utilities");
  auto* config_show = config->add_subcommand(
      "show", "Print the effective config as JSON (with paper-default markers)");
  add_common(config_show, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message / help text
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      cdlrec::run_synth(resolve_config(opts), std::cout);
    } else if (cluster->parsed()) {
      cdlrec::run_pipeline(resolve_config(opts), std::cout, "cluster");
    } else if (triplets->parsed()) {
      cdlrec::run_pipeline(resolve_config(opts), std::cout, "triplets");
    } else if (train->parsed()) {
      cdlrec::run_pipeline(resolve_config(opts), std::cout, "train");
    } else if (evaluate->parsed()) {
      cdlrec::run_pipeline(resolve_config(opts), std::cout, "evaluate");
    } else if (pipeline->parsed()) {
      cdlrec::run_pipeline(resolve_config(opts), std::cout, pipeline_stage);
    } else if (compare->parsed()) {
      cdlrec::run_compare(resolve_config(opts), std::cout);
    } else if (config->parsed() && config_show->parsed()) {
      const auto cfg = resolve_config(opts);
      std::cout << cdlrec::annotated_config_json(cfg).dump(2) << "\n";
    } else {
      std::cerr << app.help() << "\n";
      return kExitUsage;
    }
  } catch (const cdlrec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cdlrec::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const cdlrec::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
