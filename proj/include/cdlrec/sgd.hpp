#pragma once

#include <cstdint>
#include <span>

namespace cdlrec {

struct SgdConfig {
  double learning_rate = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  bool operator==(const SgdConfig&) const = default;
};

// Classical momentum with L2 decay folded into the gradient:
//   v <- momentum * v - lr * (grad + weight_decay * param)
//   param <- param + v
void sgd_step(std::span<double> params, std::span<const double> grads,
              std::span<double> velocities, const SgdConfig& cfg);

}  // namespace cdlrec
