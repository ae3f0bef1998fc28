#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cdlrec/dataset.hpp"
#include "cdlrec/model.hpp"
#include "cdlrec/sgd.hpp"

namespace cdlrec {

struct TrainConfig {
  SgdConfig sgd;
  LossKind loss;
  std::size_t epochs = 30;
  bool dropout_enabled = true;  // head/encoder dropout active at train time
  std::size_t checkpoint_every = 0;  // epochs between periodic checkpoints; 0 = final only
  std::size_t eval_every = 0;        // epochs between logged loss probes; 0 = off
  double lr_decay_factor = 1.0;      // step decay, off by default
  std::size_t lr_decay_every = 0;
  bool clamp_head_nonnegative = false;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainState {
  CdlModel model;
  ModelGrads velocities;  // congruent with the model parameters
  std::size_t epoch = 0;
  Rng rng{0};
  std::vector<double> loss_history;  // mean training loss per epoch
};

TrainState init_train_state(CdlModel model, const TrainConfig& cfg);

using EpochCallback = std::function<void(const TrainState&)>;

// Trains epochs [state.epoch, target_epoch). One rng stream drives epoch
// shuffling and all dropout draws, so an interrupted run resumed from a
// checkpoint reproduces the uninterrupted run bit-exactly.
void train_cdl_epochs(TrainState& state, const Corpus& corpus,
                      const UserVectorTable& user_vectors,
                      const std::vector<Triplet>& triplets,
                      const TrainConfig& cfg, std::size_t target_epoch,
                      const EpochCallback& on_epoch = {});

TrainState train_cdl(const Corpus& corpus, const UserVectorTable& user_vectors,
                     const std::vector<Triplet>& triplets, CdlModel model,
                     const TrainConfig& cfg, const EpochCallback& on_epoch = {});

void train_twonets_epochs(TrainState& state, const Corpus& corpus,
                          const UserVectorTable& user_vectors,
                          const std::vector<Doublet>& doublets,
                          const TrainConfig& cfg, std::size_t target_epoch,
                          const EpochCallback& on_epoch = {});

TrainState train_twonets(const Corpus& corpus,
                         const UserVectorTable& user_vectors,
                         const std::vector<Doublet>& doublets, CdlModel model,
                         const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {});

// Fraction of triplets with D(user, positive) < D(user, negative), inference
// mode (no dropout).
double triplet_satisfaction(const CdlModel& model, const Corpus& corpus,
                            const UserVectorTable& user_vectors,
                            const std::vector<Triplet>& triplets);

// Mean comparative loss at the current parameters, inference mode.
double mean_triplet_loss(const CdlModel& model, const Corpus& corpus,
                         const UserVectorTable& user_vectors,
                         const std::vector<Triplet>& triplets,
                         const LossKind& kind);

}  // namespace cdlrec
