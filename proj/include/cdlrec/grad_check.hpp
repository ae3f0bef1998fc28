#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cdlrec {

struct ParamView {
  std::string name;
  std::span<double> values;
};

using LossFn = std::function<double()>;

// Central-difference verification of analytic gradients. `analytic` blocks
// are congruent with `params`; the loss callable must observe perturbations
// made through the views (and must run with dropout forced to inference).
// Returns the max over all coordinates of
//   |analytic - numeric| / max(1, |analytic|, |numeric|).
double grad_check(const LossFn& loss, std::span<const ParamView> params,
                  const std::vector<std::vector<double>>& analytic,
                  double epsilon);

}  // namespace cdlrec
