#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace superrl {

/// A deterministic loss over a flat parameter vector, returning both the
/// value and its analytic gradient.
using LossWithGrad =
    std::function<std::pair<double, std::vector<double>>(std::span<const double>)>;

/// Compares the analytic gradient of loss_fn at params against central finite
/// differences with step eps. Returns
///   max_i |analytic_i - numeric_i| / max(1, |analytic_i|).
/// Throws NumericError if any loss evaluation is non-finite.
double check_gradients(const LossWithGrad& loss_fn, std::span<const double> params,
                       double eps);

}  // namespace superrl
