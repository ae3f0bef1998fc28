#pragma once

#include <span>
#include <vector>

#include "cdlrec/layers.hpp"
#include "cdlrec/rng.hpp"

namespace cdlrec {

struct EncoderConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t latent_dim = 0;
  // Applied after hidden activations, never after the output layer. A rate of
  // zero means no dropout layer exists at all (no randomness is consumed).
  double dropout_rate = 0.0;
  bool operator==(const EncoderConfig&) const = default;
};

// Feedforward stack mapping an input vector into the shared latent space.
// One EncoderParams value serves both item towers of a triplet; weight
// sharing is the identity of this object, not a copy.
struct EncoderParams {
  EncoderConfig config;
  std::vector<DenseLayer> layers;
  bool operator==(const EncoderParams&) const = default;
};

// Uniform init in [-sqrt(6/(in+out)), +sqrt(6/(in+out))], zero biases.
// Hidden layers use relu, the output layer is identity.
EncoderParams make_encoder(const EncoderConfig& config, Rng& rng);

std::vector<double> encode(const EncoderParams& params,
                           std::span<const double> input, Mode mode,
                           Rng* rng = nullptr);

struct EncoderTrace {
  std::vector<std::vector<double>> layer_inputs;  // input seen by each layer
  std::vector<std::vector<std::uint8_t>> dropout_masks;  // per hidden layer
  std::vector<double> output;
};

EncoderTrace encode_traced(const EncoderParams& params,
                           std::span<const double> input, Mode mode,
                           Rng* rng = nullptr);

struct EncoderGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
};

EncoderGrads zero_grads(const EncoderParams& params);

// Backprop through the stack; accumulates parameter gradients into `grads`
// and returns the gradient w.r.t. the encoder input.
std::vector<double> encoder_backward(const EncoderParams& params,
                                     const EncoderTrace& trace,
                                     std::span<const double> grad_output,
                                     EncoderGrads& grads);

}  // namespace cdlrec
