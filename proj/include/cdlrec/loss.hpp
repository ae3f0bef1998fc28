#pragma once

#include <span>
#include <vector>

#include "cdlrec/layers.hpp"

namespace cdlrec {

double sigmoid(double x);
double softplus(double x);  // log(1 + e^x), overflow-safe

// Weighted squared-distance head: D(a, b) = sum_k w_k * (a_k - b_k)^2. At
// train time the squared-difference vector passes through dropout before the
// weighted sum. D(a, a) = 0 in both modes for every dropout draw.
struct DistanceHead {
  std::vector<double> weights;
  double dropout_rate = 0.5;
  bool operator==(const DistanceHead&) const = default;
};

// All-ones init, so training starts from plain squared Euclidean distance.
DistanceHead make_distance_head(std::size_t latent_dim,
                                double dropout_rate = 0.5);

double distance(const DistanceHead& head, std::span<const double> a,
                std::span<const double> b, Mode mode = Mode::inference,
                Rng* rng = nullptr);

struct DistanceTrace {
  double value = 0.0;
  std::vector<double> diff;             // a - b
  std::vector<double> dropped_squares;  // what the weights see
  std::vector<std::uint8_t> mask;       // all-ones at inference
  double keep = 1.0;
};

DistanceTrace distance_traced(const DistanceHead& head,
                              std::span<const double> a,
                              std::span<const double> b, Mode mode,
                              Rng* rng = nullptr);

struct DistanceBackward {
  std::vector<double> grad_a;
  std::vector<double> grad_b;
  std::vector<double> grad_weights;
};

DistanceBackward distance_backward(const DistanceHead& head,
                                   const DistanceTrace& trace, double grad_d);

struct LossKind {
  enum class Kind { cross_entropy, hinge };
  Kind kind = Kind::cross_entropy;
  double margin = 1.0;  // hinge only
  bool operator==(const LossKind&) const = default;
};

// -pbar*log(P) - (1-pbar)*log(1-P) with P = sigmoid(o), in softplus form.
// pbar = 0 labels the (positive, negative) pair order, pbar = 1 the swap.
double pair_cross_entropy(double o, int pbar);

struct ComparativeLoss {
  double loss = 0.0;
  double grad_d_pos = 0.0;
  double grad_d_neg = 0.0;
};

// Canonical orientation: o = d_pos - d_neg with label pbar = 0, so the
// objective is softplus(o) for cross entropy and max(0, margin + o) for
// hinge. Gradients are exact partials.
ComparativeLoss comparative_loss(const LossKind& kind, double d_pos,
                                 double d_neg);

struct ScalarLoss {
  double loss = 0.0;
  double grad_d = 0.0;
};

// Doublet baseline loss: q = sigmoid(d - offset) is the probability of the
// negative class. negative_label is 1 for a negative doublet, 0 for a
// positive one. The gradient w.r.t. offset is -grad_d.
ScalarLoss twonets_loss(double d, int negative_label, double offset);

}  // namespace cdlrec
