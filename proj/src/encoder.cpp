#include "cdlrec/encoder.hpp"

#include <cmath>
#include <string>

#include "cdlrec/errors.hpp"

namespace cdlrec {

namespace {

DenseLayer init_layer(std::size_t out, std::size_t in, Activation act,
                      Rng& rng) {
  DenseLayer layer{Matrix(out, in), std::vector<double>(out, 0.0), act};
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& w : layer.weights.data) w = rng.uniform(-limit, limit);
  return layer;
}

bool has_dropout(const EncoderParams& params, Mode mode) {
  return mode == Mode::train && params.config.dropout_rate > 0.0;
}

}  // namespace

EncoderParams make_encoder(const EncoderConfig& config, Rng& rng) {
  if (config.input_dim == 0 || config.latent_dim == 0) {
    throw ConfigError("make_encoder: input_dim and latent_dim must be positive");
  }
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0) {
    throw ConfigError("make_encoder: dropout_rate must be in [0,1)");
  }
  EncoderParams params{config, {}};
  std::size_t in = config.input_dim;
  for (std::size_t h : config.hidden_dims) {
    params.layers.push_back(init_layer(h, in, Activation::relu, rng));
    in = h;
  }
  params.layers.push_back(
      init_layer(config.latent_dim, in, Activation::identity, rng));
  return params;
}

std::vector<double> encode(const EncoderParams& params,
                           std::span<const double> input, Mode mode,
                           Rng* rng) {
  return encode_traced(params, input, mode, rng).output;
}

EncoderTrace encode_traced(const EncoderParams& params,
                           std::span<const double> input, Mode mode,
                           Rng* rng) {
  if (input.size() != params.config.input_dim) {
    throw DimensionError("encode: input length " +
                         std::to_string(input.size()) +
                         " does not match encoder input_dim " +
                         std::to_string(params.config.input_dim));
  }
  const bool dropout = has_dropout(params, mode);
  if (dropout && rng == nullptr) {
    throw ConfigError("encode: train-mode dropout requires an rng");
  }

  EncoderTrace trace;
  std::vector<double> x(input.begin(), input.end());
  const std::size_t n_layers = params.layers.size();
  for (std::size_t i = 0; i < n_layers; ++i) {
    trace.layer_inputs.push_back(x);
    x = dense_forward(params.layers[i], x);
    if (dropout && i + 1 < n_layers) {
      DropoutSpec spec{params.config.dropout_rate, Mode::train};
      auto d = dropout_forward(spec, x, *rng);
      trace.dropout_masks.push_back(std::move(d.mask));
      x = std::move(d.output);
    }
  }
  trace.output = std::move(x);
  return trace;
}

EncoderGrads zero_grads(const EncoderParams& params) {
  EncoderGrads g;
  for (const auto& layer : params.layers) {
    g.weights.emplace_back(layer.out_dim(), layer.in_dim());
    g.bias.emplace_back(layer.out_dim(), 0.0);
  }
  return g;
}

std::vector<double> encoder_backward(const EncoderParams& params,
                                     const EncoderTrace& trace,
                                     std::span<const double> grad_output,
                                     EncoderGrads& grads) {
  const std::size_t n_layers = params.layers.size();
  if (trace.layer_inputs.size() != n_layers) {
    throw DimensionError("encoder_backward: trace does not match encoder");
  }
  const double keep = 1.0 - params.config.dropout_rate;

  std::vector<double> g(grad_output.begin(), grad_output.end());
  for (std::size_t i = n_layers; i-- > 0;) {
    auto back = dense_backward(params.layers[i], trace.layer_inputs[i], g);
    for (std::size_t j = 0; j < back.grad_weights.data.size(); ++j) {
      grads.weights[i].data[j] += back.grad_weights.data[j];
    }
    for (std::size_t j = 0; j < back.grad_bias.size(); ++j) {
      grads.bias[i][j] += back.grad_bias[j];
    }
    g = std::move(back.grad_input);
    if (i > 0 && i - 1 < trace.dropout_masks.size()) {
      const auto& mask = trace.dropout_masks[i - 1];
      for (std::size_t j = 0; j < g.size(); ++j) {
        g[j] = mask[j] ? g[j] / keep : 0.0;
      }
    }
  }
  return g;
}

}  // namespace cdlrec
