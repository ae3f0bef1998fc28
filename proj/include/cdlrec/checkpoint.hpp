#pragma once

#include <string>

#include "cdlrec/trainer.hpp"

namespace cdlrec {

// Versioned, checksummed text document holding the train config, all
// parameter arrays, optimizer velocities, the rng state, the epoch counter
// and the loss history. load(save(s)) reproduces s bit-exactly.
void save_checkpoint(const TrainState& state, const TrainConfig& cfg,
                     const std::string& path);

struct LoadedCheckpoint {
  TrainState state;
  TrainConfig config;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace cdlrec
