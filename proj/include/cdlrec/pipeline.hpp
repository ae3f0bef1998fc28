#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cdlrec/config.hpp"

namespace cdlrec {

struct StageOutcome {
  std::string stage;
  bool skipped = false;
};

// Artifact file names inside the run's output directory.
struct ArtifactPaths {
  std::string clusters, user_vectors, user_split, triplets, eval_sets,
      checkpoint, loss_curve, report_txt, report_csv, manifest;
};

ArtifactPaths artifact_paths(const std::string& output_dir);

// Writes corpus.txt, embeddings.txt and plan.json into the output directory.
void run_synth(const RunConfig& cfg, std::ostream& log);

// uservec -> filter -> triplets/eval-sets -> train -> evaluate, with
// checksum-based stage skipping. `last_stage` truncates the run ("cluster",
// "uservec", "filter", "triplets", "train" or "evaluate").
std::vector<StageOutcome> run_pipeline(const RunConfig& cfg, std::ostream& log,
                                       const std::string& last_stage = "evaluate");

// Trains and evaluates cdl_xent, cdl_hinge and twonets on identical data and
// seeds, adds the random baseline, and writes the combined K-vs-metric table.
void run_compare(const RunConfig& cfg, std::ostream& log);

}  // namespace cdlrec
