#include "cdlrec/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "cdlrec/errors.hpp"

namespace cdlrec {

namespace {

double checked_loss(const LossFn& loss, const std::string& where) {
  const double v = loss();
  if (!std::isfinite(v)) {
    throw NumericError("grad_check: non-finite loss at " + where);
  }
  return v;
}

}  // namespace

double grad_check(const LossFn& loss, std::span<const ParamView> params,
                  const std::vector<std::vector<double>>& analytic,
                  double epsilon) {
  if (epsilon <= 0.0) throw ConfigError("grad_check: epsilon must be positive");
  if (analytic.size() != params.size()) {
    throw DimensionError("grad_check: " + std::to_string(analytic.size()) +
                         " analytic blocks for " +
                         std::to_string(params.size()) + " parameter blocks");
  }
  checked_loss(loss, "initial point");

  double max_err = 0.0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto& view = params[b];
    if (analytic[b].size() != view.values.size()) {
      throw DimensionError("grad_check: block '" + view.name +
                           "' analytic size mismatch");
    }
    for (std::size_t i = 0; i < view.values.size(); ++i) {
      double& x = view.values[i];
      const double x0 = x;
      x = x0 + epsilon;
      const double up = checked_loss(loss, view.name + "+eps");
      x = x0 - epsilon;
      const double down = checked_loss(loss, view.name + "-eps");
      x = x0;

      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[b][i];
      const double denom =
          std::max({1.0, std::fabs(a), std::fabs(numeric)});
      max_err = std::max(max_err, std::fabs(a - numeric) / denom);
    }
  }
  return max_err;
}

}  // namespace cdlrec
