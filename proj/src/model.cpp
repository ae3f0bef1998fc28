#include "cdlrec/model.hpp"

#include <cstring>
#include <string>

#include "cdlrec/errors.hpp"
#include "cdlrec/io_util.hpp"

namespace cdlrec {

CdlModel make_model(const EncoderConfig& user_cfg, const EncoderConfig& item_cfg,
                    double head_dropout, Rng& rng) {
  if (user_cfg.latent_dim != item_cfg.latent_dim) {
    throw ConfigError("make_model: user latent_dim " +
                      std::to_string(user_cfg.latent_dim) +
                      " != item latent_dim " +
                      std::to_string(item_cfg.latent_dim));
  }
  CdlModel model;
  model.user_encoder = make_encoder(user_cfg, rng);
  model.item_encoder = make_encoder(item_cfg, rng);
  model.head = make_distance_head(user_cfg.latent_dim, head_dropout);
  return model;
}

ModelGrads zero_grads(const CdlModel& model) {
  ModelGrads g;
  g.user_encoder = zero_grads(model.user_encoder);
  g.item_encoder = zero_grads(model.item_encoder);
  g.head.assign(model.head.weights.size(), 0.0);
  g.twonets_offset = 0.0;
  return g;
}

void clear_grads(ModelGrads& grads) {
  for (auto& m : grads.user_encoder.weights) m.data.assign(m.data.size(), 0.0);
  for (auto& b : grads.user_encoder.bias) b.assign(b.size(), 0.0);
  for (auto& m : grads.item_encoder.weights) m.data.assign(m.data.size(), 0.0);
  for (auto& b : grads.item_encoder.bias) b.assign(b.size(), 0.0);
  grads.head.assign(grads.head.size(), 0.0);
  grads.twonets_offset = 0.0;
}

void scale_grads(ModelGrads& grads, double factor) {
  for (auto& m : grads.user_encoder.weights)
    for (double& v : m.data) v *= factor;
  for (auto& b : grads.user_encoder.bias)
    for (double& v : b) v *= factor;
  for (auto& m : grads.item_encoder.weights)
    for (double& v : m.data) v *= factor;
  for (auto& b : grads.item_encoder.bias)
    for (double& v : b) v *= factor;
  for (double& v : grads.head) v *= factor;
  grads.twonets_offset *= factor;
}

std::vector<double> encode_user(const CdlModel& model,
                                std::span<const double> user_vector, Mode mode,
                                Rng* rng) {
  return encode(model.user_encoder, user_vector, mode, rng);
}

std::vector<double> encode_item(const CdlModel& model,
                                std::span<const double> item_features,
                                Mode mode, Rng* rng) {
  return encode(model.item_encoder, item_features, mode, rng);
}

TripletResult triplet_forward_backward(const CdlModel& model,
                                       std::span<const double> user_vector,
                                       std::span<const double> pos_features,
                                       std::span<const double> neg_features,
                                       const LossKind& kind, Mode mode,
                                       Rng& rng, ModelGrads& grads) {
  auto user_trace = encode_traced(model.user_encoder, user_vector, mode, &rng);
  auto pos_trace = encode_traced(model.item_encoder, pos_features, mode, &rng);
  auto neg_trace = encode_traced(model.item_encoder, neg_features, mode, &rng);

  auto d_pos =
      distance_traced(model.head, user_trace.output, pos_trace.output, mode, &rng);
  auto d_neg =
      distance_traced(model.head, user_trace.output, neg_trace.output, mode, &rng);

  const auto comp = comparative_loss(kind, d_pos.value, d_neg.value);

  auto back_pos = distance_backward(model.head, d_pos, comp.grad_d_pos);
  auto back_neg = distance_backward(model.head, d_neg, comp.grad_d_neg);

  for (std::size_t k = 0; k < grads.head.size(); ++k) {
    grads.head[k] += back_pos.grad_weights[k] + back_neg.grad_weights[k];
  }

  std::vector<double> grad_user(user_trace.output.size());
  for (std::size_t k = 0; k < grad_user.size(); ++k) {
    grad_user[k] = back_pos.grad_a[k] + back_neg.grad_a[k];
  }
  encoder_backward(model.user_encoder, user_trace, grad_user,
                   grads.user_encoder);
  encoder_backward(model.item_encoder, pos_trace, back_pos.grad_b,
                   grads.item_encoder);
  encoder_backward(model.item_encoder, neg_trace, back_neg.grad_b,
                   grads.item_encoder);

  TripletResult r;
  r.loss = comp.loss;
  r.d_pos = d_pos.value;
  r.d_neg = d_neg.value;
  r.user_latent = std::move(user_trace.output);
  r.pos_latent = std::move(pos_trace.output);
  r.neg_latent = std::move(neg_trace.output);
  r.grad_pos_latent = std::move(back_pos.grad_b);
  r.grad_neg_latent = std::move(back_neg.grad_b);
  return r;
}

DoubletResult twonets_forward_backward(const CdlModel& model,
                                       std::span<const double> user_vector,
                                       std::span<const double> item_features,
                                       int negative_label, Mode mode, Rng& rng,
                                       ModelGrads& grads) {
  auto user_trace = encode_traced(model.user_encoder, user_vector, mode, &rng);
  auto item_trace = encode_traced(model.item_encoder, item_features, mode, &rng);
  auto dist =
      distance_traced(model.head, user_trace.output, item_trace.output, mode, &rng);

  const auto sl = twonets_loss(dist.value, negative_label, model.twonets_offset);
  auto back = distance_backward(model.head, dist, sl.grad_d);

  for (std::size_t k = 0; k < grads.head.size(); ++k) {
    grads.head[k] += back.grad_weights[k];
  }
  grads.twonets_offset += -sl.grad_d;
  encoder_backward(model.user_encoder, user_trace, back.grad_a,
                   grads.user_encoder);
  encoder_backward(model.item_encoder, item_trace, back.grad_b,
                   grads.item_encoder);
  return {sl.loss, dist.value};
}

namespace {

void encoder_views(const std::string& prefix, EncoderParams& enc,
                   std::vector<ParamView>& out) {
  for (std::size_t i = 0; i < enc.layers.size(); ++i) {
    out.push_back({prefix + ".layer" + std::to_string(i) + ".W",
                   std::span<double>(enc.layers[i].weights.data)});
    out.push_back({prefix + ".layer" + std::to_string(i) + ".b",
                   std::span<double>(enc.layers[i].bias)});
  }
}

void encoder_grad_views(const std::string& prefix, EncoderGrads& enc,
                        std::vector<ParamView>& out) {
  for (std::size_t i = 0; i < enc.weights.size(); ++i) {
    out.push_back({prefix + ".layer" + std::to_string(i) + ".W",
                   std::span<double>(enc.weights[i].data)});
    out.push_back({prefix + ".layer" + std::to_string(i) + ".b",
                   std::span<double>(enc.bias[i])});
  }
}

}  // namespace

std::vector<ParamView> parameter_views(CdlModel& model) {
  std::vector<ParamView> out;
  encoder_views("user", model.user_encoder, out);
  encoder_views("item", model.item_encoder, out);
  out.push_back({"head.w", std::span<double>(model.head.weights)});
  out.push_back({"twonets_offset", std::span<double>(&model.twonets_offset, 1)});
  return out;
}

std::vector<ParamView> grad_views(ModelGrads& grads) {
  std::vector<ParamView> out;
  encoder_grad_views("user", grads.user_encoder, out);
  encoder_grad_views("item", grads.item_encoder, out);
  out.push_back({"head.w", std::span<double>(grads.head)});
  out.push_back({"twonets_offset", std::span<double>(&grads.twonets_offset, 1)});
  return out;
}

std::vector<std::vector<double>> flatten_grads(const ModelGrads& grads) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < grads.user_encoder.weights.size(); ++i) {
    out.push_back(grads.user_encoder.weights[i].data);
    out.push_back(grads.user_encoder.bias[i]);
  }
  for (std::size_t i = 0; i < grads.item_encoder.weights.size(); ++i) {
    out.push_back(grads.item_encoder.weights[i].data);
    out.push_back(grads.item_encoder.bias[i]);
  }
  out.push_back(grads.head);
  out.push_back({grads.twonets_offset});
  return out;
}

std::uint64_t model_checksum(const CdlModel& model) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](std::span<const double> values) {
    const char* bytes = reinterpret_cast<const char*>(values.data());
    h = fnv1a64(std::string_view(bytes, values.size() * sizeof(double)), h);
  };
  for (const auto& enc : {&model.user_encoder, &model.item_encoder}) {
    for (const auto& layer : enc->layers) {
      mix(layer.weights.data);
      mix(layer.bias);
    }
  }
  mix(model.head.weights);
  mix(std::span<const double>(&model.twonets_offset, 1));
  return h;
}

}  // namespace cdlrec
