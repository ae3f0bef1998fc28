#include "cdlrec/layers.hpp"

#include <string>

#include "cdlrec/errors.hpp"

namespace cdlrec {

namespace {

void check_dims(std::string_view op, std::size_t got, std::size_t want,
                std::string_view what) {
  if (got != want) {
    throw DimensionError(std::string(op) + ": " + std::string(what) +
                         " length " + std::to_string(got) +
                         " does not match expected " + std::to_string(want));
  }
}

}  // namespace

std::vector<double> dense_forward(const DenseLayer& layer,
                                  std::span<const double> input) {
  check_dims("dense_forward", input.size(), layer.in_dim(), "input");
  std::vector<double> out(layer.out_dim());
  for (std::size_t k = 0; k < layer.out_dim(); ++k) {
    const double* row = layer.weights.row(k);
    double acc = layer.bias[k];
    for (std::size_t j = 0; j < layer.in_dim(); ++j) acc += row[j] * input[j];
    if (layer.activation == Activation::relu && acc <= 0.0) acc = 0.0;
    out[k] = acc;
  }
  return out;
}

DenseBackward dense_backward(const DenseLayer& layer,
                             std::span<const double> input,
                             std::span<const double> grad_out) {
  check_dims("dense_backward", input.size(), layer.in_dim(), "input");
  check_dims("dense_backward", grad_out.size(), layer.out_dim(), "grad_out");

  DenseBackward b{Matrix(layer.out_dim(), layer.in_dim()),
                  std::vector<double>(layer.out_dim(), 0.0),
                  std::vector<double>(layer.in_dim(), 0.0)};
  for (std::size_t k = 0; k < layer.out_dim(); ++k) {
    const double* row = layer.weights.row(k);
    double g = grad_out[k];
    if (layer.activation == Activation::relu) {
      double pre = layer.bias[k];
      for (std::size_t j = 0; j < layer.in_dim(); ++j) pre += row[j] * input[j];
      if (pre <= 0.0) g = 0.0;
    }
    b.grad_bias[k] = g;
    double* wrow = b.grad_weights.data.data() + k * layer.in_dim();
    for (std::size_t j = 0; j < layer.in_dim(); ++j) {
      wrow[j] = g * input[j];
      b.grad_input[j] += g * row[j];
    }
  }
  return b;
}

DropoutResult dropout_forward(const DropoutSpec& spec,
                              std::span<const double> input, Rng& rng) {
  DropoutResult r;
  r.output.assign(input.begin(), input.end());
  r.mask.assign(input.size(), 1);
  if (spec.mode == Mode::inference) return r;

  const double keep = 1.0 - spec.rate;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (rng.uniform() < keep) {
      r.output[i] = input[i] / keep;
    } else {
      r.output[i] = 0.0;
      r.mask[i] = 0;
    }
  }
  return r;
}

}  // namespace cdlrec
