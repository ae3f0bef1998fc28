#include "cdlrec/trainer.hpp"

#include <cmath>
#include <string>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"

namespace cdlrec {

namespace {

struct ResolvedTriplet {
  const std::vector<double>* user;
  const std::vector<double>* pos;
  const std::vector<double>* neg;
  const Triplet* source;
};

struct ResolvedDoublet {
  const std::vector<double>* user;
  const std::vector<double>* item;
  int negative_label;
  const Doublet* source;
};

const std::vector<double>& user_vec(const UserVectorTable& table,
                                    const std::string& uid) {
  auto it = table.find(uid);
  if (it == table.end()) {
    throw DataError("trainer: no user vector for '" + uid + "'");
  }
  return it->second;
}

std::vector<ResolvedTriplet> resolve(const Corpus& corpus,
                                     const UserVectorTable& table,
                                     const std::vector<Triplet>& triplets) {
  std::vector<ResolvedTriplet> out;
  out.reserve(triplets.size());
  for (const auto& t : triplets) {
    out.push_back({&user_vec(table, t.user_id),
                   &corpus.item(t.positive_item_id).features,
                   &corpus.item(t.negative_item_id).features, &t});
  }
  return out;
}

std::vector<ResolvedDoublet> resolve(const Corpus& corpus,
                                     const UserVectorTable& table,
                                     const std::vector<Doublet>& doublets) {
  std::vector<ResolvedDoublet> out;
  out.reserve(doublets.size());
  for (const auto& d : doublets) {
    out.push_back({&user_vec(table, d.user_id), &corpus.item(d.item_id).features,
                   d.positive ? 0 : 1, &d});
  }
  return out;
}

double param_norm(CdlModel& model) {
  double sum = 0.0;
  for (const auto& view : parameter_views(model)) {
    for (double v : view.values) sum += v * v;
  }
  return std::sqrt(sum);
}

SgdConfig effective_sgd(const TrainConfig& cfg, std::size_t epoch) {
  SgdConfig sgd = cfg.sgd;
  if (cfg.lr_decay_every > 0 && cfg.lr_decay_factor != 1.0) {
    for (std::size_t e = cfg.lr_decay_every; e <= epoch; e += cfg.lr_decay_every) {
      sgd.learning_rate *= cfg.lr_decay_factor;
    }
  }
  return sgd;
}

void apply_update(TrainState& state, ModelGrads& grads, const SgdConfig& sgd,
                  bool clamp_head) {
  auto params = parameter_views(state.model);
  auto gviews = grad_views(grads);
  auto vviews = grad_views(state.velocities);
  for (std::size_t b = 0; b < params.size(); ++b) {
    sgd_step(params[b].values, gviews[b].values, vviews[b].values, sgd);
  }
  if (clamp_head) {
    for (double& w : state.model.head.weights) {
      if (w < 0.0) w = 0.0;
    }
  }
}

std::string describe(const ResolvedTriplet& s) {
  return "triplet (" + s.source->user_id + ", " + s.source->positive_item_id +
         ", " + s.source->negative_item_id + ")";
}

std::string describe(const ResolvedDoublet& s) {
  return "doublet (" + s.source->user_id + ", " + s.source->item_id + ")";
}

template <typename Sample, typename Step>
void run_epochs(TrainState& state, const std::vector<Sample>& samples,
                const TrainConfig& cfg, std::size_t target_epoch,
                const EpochCallback& on_epoch, const Step& step) {
  if (samples.empty()) throw DataError("trainer: empty training stream");
  const Mode mode = cfg.dropout_enabled ? Mode::train : Mode::inference;
  const std::size_t batch_size = std::max<std::size_t>(1, cfg.sgd.batch_size);

  std::vector<std::size_t> order(samples.size());

  while (state.epoch < target_epoch) {
    // Canonical order reshuffled from the run stream, so the permutation is a
    // function of the rng state alone and resumption reproduces it.
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[state.rng.below(i)]);
    }
    const SgdConfig sgd = effective_sgd(cfg, state.epoch);

    double epoch_loss = 0.0;
    ModelGrads grads = zero_grads(state.model);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      clear_grads(grads);
      for (std::size_t i = start; i < end; ++i) {
        const double loss = step(samples[order[i]], mode, grads);
        if (!std::isfinite(loss)) {
          throw NumericError(
              "trainer: non-finite loss at epoch " +
              std::to_string(state.epoch) + " on " +
              describe(samples[order[i]]) + ", parameter norm " +
              format_double(param_norm(state.model)));
        }
        epoch_loss += loss;
      }
      scale_grads(grads, 1.0 / static_cast<double>(end - start));
      apply_update(state, grads, sgd, cfg.clamp_head_nonnegative);
    }
    state.loss_history.push_back(epoch_loss /
                                 static_cast<double>(samples.size()));
    ++state.epoch;
    if (on_epoch) on_epoch(state);
  }
}

}  // namespace

TrainState init_train_state(CdlModel model, const TrainConfig& cfg) {
  TrainState state;
  state.velocities = zero_grads(model);
  state.model = std::move(model);
  state.rng = Rng(cfg.sgd.seed);
  return state;
}

void train_cdl_epochs(TrainState& state, const Corpus& corpus,
                      const UserVectorTable& user_vectors,
                      const std::vector<Triplet>& triplets,
                      const TrainConfig& cfg, std::size_t target_epoch,
                      const EpochCallback& on_epoch) {
  const auto samples = resolve(corpus, user_vectors, triplets);
  run_epochs(state, samples, cfg, target_epoch, on_epoch,
             [&](const ResolvedTriplet& s, Mode mode, ModelGrads& grads) {
               auto& rng = state.rng;
               return triplet_forward_backward(state.model, *s.user, *s.pos,
                                               *s.neg, cfg.loss, mode, rng,
                                               grads)
                   .loss;
             });
}

TrainState train_cdl(const Corpus& corpus, const UserVectorTable& user_vectors,
                     const std::vector<Triplet>& triplets, CdlModel model,
                     const TrainConfig& cfg, const EpochCallback& on_epoch) {
  TrainState state = init_train_state(std::move(model), cfg);
  train_cdl_epochs(state, corpus, user_vectors, triplets, cfg, cfg.epochs,
                   on_epoch);
  return state;
}

void train_twonets_epochs(TrainState& state, const Corpus& corpus,
                          const UserVectorTable& user_vectors,
                          const std::vector<Doublet>& doublets,
                          const TrainConfig& cfg, std::size_t target_epoch,
                          const EpochCallback& on_epoch) {
  const auto samples = resolve(corpus, user_vectors, doublets);
  run_epochs(state, samples, cfg, target_epoch, on_epoch,
             [&](const ResolvedDoublet& s, Mode mode, ModelGrads& grads) {
               auto& rng = state.rng;
               return twonets_forward_backward(state.model, *s.user, *s.item,
                                               s.negative_label, mode, rng,
                                               grads)
                   .loss;
             });
}

TrainState train_twonets(const Corpus& corpus,
                         const UserVectorTable& user_vectors,
                         const std::vector<Doublet>& doublets, CdlModel model,
                         const TrainConfig& cfg, const EpochCallback& on_epoch) {
  TrainState state = init_train_state(std::move(model), cfg);
  train_twonets_epochs(state, corpus, user_vectors, doublets, cfg, cfg.epochs,
                       on_epoch);
  return state;
}

double triplet_satisfaction(const CdlModel& model, const Corpus& corpus,
                            const UserVectorTable& user_vectors,
                            const std::vector<Triplet>& triplets) {
  if (triplets.empty()) return 0.0;
  std::size_t satisfied = 0;
  for (const auto& t : triplets) {
    const auto u = encode_user(model, user_vec(user_vectors, t.user_id));
    const auto p = encode_item(model, corpus.item(t.positive_item_id).features);
    const auto n = encode_item(model, corpus.item(t.negative_item_id).features);
    const double d_pos = distance(model.head, u, p);
    const double d_neg = distance(model.head, u, n);
    if (d_pos < d_neg) ++satisfied;
  }
  return static_cast<double>(satisfied) / static_cast<double>(triplets.size());
}

double mean_triplet_loss(const CdlModel& model, const Corpus& corpus,
                         const UserVectorTable& user_vectors,
                         const std::vector<Triplet>& triplets,
                         const LossKind& kind) {
  if (triplets.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : triplets) {
    const auto u = encode_user(model, user_vec(user_vectors, t.user_id));
    const auto p = encode_item(model, corpus.item(t.positive_item_id).features);
    const auto n = encode_item(model, corpus.item(t.negative_item_id).features);
    total += comparative_loss(kind, distance(model.head, u, p),
                              distance(model.head, u, n))
                 .loss;
  }
  return total / static_cast<double>(triplets.size());
}

}  // namespace cdlrec
