#include "cdlrec/loss.hpp"

#include <cmath>
#include <string>

#include "cdlrec/errors.hpp"

namespace cdlrec {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

DistanceHead make_distance_head(std::size_t latent_dim, double dropout_rate) {
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("make_distance_head: dropout_rate must be in [0,1)");
  }
  return DistanceHead{std::vector<double>(latent_dim, 1.0), dropout_rate};
}

double distance(const DistanceHead& head, std::span<const double> a,
                std::span<const double> b, Mode mode, Rng* rng) {
  return distance_traced(head, a, b, mode, rng).value;
}

DistanceTrace distance_traced(const DistanceHead& head,
                              std::span<const double> a,
                              std::span<const double> b, Mode mode, Rng* rng) {
  if (a.size() != b.size() || a.size() != head.weights.size()) {
    throw DimensionError("distance: lengths differ (a=" +
                         std::to_string(a.size()) + ", b=" +
                         std::to_string(b.size()) + ", weights=" +
                         std::to_string(head.weights.size()) + ")");
  }
  DistanceTrace trace;
  trace.diff.resize(a.size());
  std::vector<double> squares(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    trace.diff[k] = a[k] - b[k];
    squares[k] = trace.diff[k] * trace.diff[k];
  }

  const bool dropout = mode == Mode::train && head.dropout_rate > 0.0;
  if (dropout) {
    if (rng == nullptr) {
      throw ConfigError("distance: train-mode dropout requires an rng");
    }
    DropoutSpec spec{head.dropout_rate, Mode::train};
    auto d = dropout_forward(spec, squares, *rng);
    trace.dropped_squares = std::move(d.output);
    trace.mask = std::move(d.mask);
    trace.keep = 1.0 - head.dropout_rate;
  } else {
    trace.dropped_squares = std::move(squares);
    trace.mask.assign(a.size(), 1);
  }

  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sum += head.weights[k] * trace.dropped_squares[k];
  }
  trace.value = sum;
  return trace;
}

DistanceBackward distance_backward(const DistanceHead& head,
                                   const DistanceTrace& trace, double grad_d) {
  const std::size_t n = head.weights.size();
  DistanceBackward b{std::vector<double>(n), std::vector<double>(n),
                     std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    b.grad_weights[k] = grad_d * trace.dropped_squares[k];
    const double through =
        trace.mask[k] ? grad_d * head.weights[k] * 2.0 * trace.diff[k] / trace.keep
                      : 0.0;
    b.grad_a[k] = through;
    b.grad_b[k] = -through;
  }
  return b;
}

double pair_cross_entropy(double o, int pbar) {
  // pbar == 0: -log(1 - P) = softplus(o); pbar == 1: -log(P) = softplus(-o)
  return pbar == 0 ? softplus(o) : softplus(-o);
}

ComparativeLoss comparative_loss(const LossKind& kind, double d_pos,
                                 double d_neg) {
  const double o = d_pos - d_neg;
  if (kind.kind == LossKind::Kind::cross_entropy) {
    const double g = sigmoid(o);
    return {softplus(o), g, -g};
  }
  const double a = kind.margin + o;
  if (a > 0.0) return {a, 1.0, -1.0};
  return {0.0, 0.0, 0.0};
}

ScalarLoss twonets_loss(double d, int negative_label, double offset) {
  const double z = d - offset;
  const double q = sigmoid(z);
  if (negative_label != 0) {
    return {softplus(-z), q - 1.0};
  }
  return {softplus(z), q};
}

}  // namespace cdlrec
