#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cdlrec/matrix.hpp"
#include "cdlrec/rng.hpp"

namespace cdlrec {

enum class Activation { identity, relu };

enum class Mode { train, inference };

struct DenseLayer {
  Matrix weights;            // out x in
  std::vector<double> bias;  // out
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }
  bool operator==(const DenseLayer&) const = default;
};

std::vector<double> dense_forward(const DenseLayer& layer,
                                  std::span<const double> input);

struct DenseBackward {
  Matrix grad_weights;
  std::vector<double> grad_bias;
  std::vector<double> grad_input;
};

// grad_out is d(loss)/d(output). The relu subgradient at exactly zero
// pre-activation is taken as 0.
DenseBackward dense_backward(const DenseLayer& layer,
                             std::span<const double> input,
                             std::span<const double> grad_out);

struct DropoutSpec {
  double rate = 0.5;  // in [0, 1)
  Mode mode = Mode::inference;
};

struct DropoutResult {
  std::vector<double> output;
  std::vector<std::uint8_t> mask;  // 1 = kept
};

// Inverted dropout: surviving entries are scaled by 1/(1-rate) at train time
// so the inference path is the identity map. Inference consumes no
// randomness; train mode draws one uniform per element even at rate 0.
DropoutResult dropout_forward(const DropoutSpec& spec,
                              std::span<const double> input, Rng& rng);

}  // namespace cdlrec
