#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cdlrec/encoder.hpp"
#include "cdlrec/grad_check.hpp"
#include "cdlrec/loss.hpp"

namespace cdlrec {

// Full comparative model: one user encoder, one item encoder shared by the
// positive and negative towers, and one distance head shared by both distance
// evaluations. twonets_offset participates only in the doublet baseline.
struct CdlModel {
  EncoderParams user_encoder;
  EncoderParams item_encoder;
  DistanceHead head;
  double twonets_offset = 0.0;
  bool operator==(const CdlModel&) const = default;
};

// Validates that both encoders share the latent dimension.
CdlModel make_model(const EncoderConfig& user_cfg, const EncoderConfig& item_cfg,
                    double head_dropout, Rng& rng);

struct ModelGrads {
  EncoderGrads user_encoder;
  EncoderGrads item_encoder;
  std::vector<double> head;
  double twonets_offset = 0.0;
};

ModelGrads zero_grads(const CdlModel& model);
void clear_grads(ModelGrads& grads);
void scale_grads(ModelGrads& grads, double factor);

std::vector<double> encode_user(const CdlModel& model,
                                std::span<const double> user_vector,
                                Mode mode = Mode::inference, Rng* rng = nullptr);
std::vector<double> encode_item(const CdlModel& model,
                                std::span<const double> item_features,
                                Mode mode = Mode::inference, Rng* rng = nullptr);

struct TripletResult {
  double loss = 0.0;
  double d_pos = 0.0;
  double d_neg = 0.0;
  std::vector<double> user_latent, pos_latent, neg_latent;
  std::vector<double> grad_pos_latent, grad_neg_latent;
};

// Forward + backward over one triplet. Parameter gradients are accumulated
// into `grads`; both item towers contribute to the single shared item
// encoder. Randomness (dropout masks) is consumed from `rng` in a fixed
// order: user encode, positive encode, negative encode, positive distance,
// negative distance.
TripletResult triplet_forward_backward(const CdlModel& model,
                                       std::span<const double> user_vector,
                                       std::span<const double> pos_features,
                                       std::span<const double> neg_features,
                                       const LossKind& kind, Mode mode,
                                       Rng& rng, ModelGrads& grads);

struct DoubletResult {
  double loss = 0.0;
  double dist = 0.0;
};

DoubletResult twonets_forward_backward(const CdlModel& model,
                                       std::span<const double> user_vector,
                                       std::span<const double> item_features,
                                       int negative_label, Mode mode, Rng& rng,
                                       ModelGrads& grads);

// Fixed parameter enumeration order shared by the optimizer, the checkpoint
// format and gradient checking: user layers (W, b)..., item layers (W, b)...,
// head weights, twonets offset.
std::vector<ParamView> parameter_views(CdlModel& model);
std::vector<ParamView> grad_views(ModelGrads& grads);
std::vector<std::vector<double>> flatten_grads(const ModelGrads& grads);

std::uint64_t model_checksum(const CdlModel& model);

}  // namespace cdlrec
