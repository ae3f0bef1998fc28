#include "cdlrec/sgd.hpp"

#include <string>

#include "cdlrec/errors.hpp"

namespace cdlrec {

void sgd_step(std::span<double> params, std::span<const double> grads,
              std::span<double> velocities, const SgdConfig& cfg) {
  if (grads.size() != params.size() || velocities.size() != params.size()) {
    throw DimensionError("sgd_step: params/grads/velocities sizes differ (" +
                         std::to_string(params.size()) + ", " +
                         std::to_string(grads.size()) + ", " +
                         std::to_string(velocities.size()) + ")");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + cfg.weight_decay * params[i];
    velocities[i] = cfg.momentum * velocities[i] - cfg.learning_rate * g;
    params[i] += velocities[i];
  }
}

}  // namespace cdlrec
