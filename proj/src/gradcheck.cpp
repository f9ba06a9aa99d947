#include "superrl/gradcheck.hpp"

#include <cmath>

#include "superrl/errors.hpp"

namespace superrl {

double check_gradients(const LossWithGrad& loss_fn, std::span<const double> params,
                       double eps) {
    auto [value, analytic] = loss_fn(params);
    if (!std::isfinite(value)) {
        throw NumericError("check_gradients: non-finite loss at base point");
    }
    if (analytic.size() != params.size()) {
        throw ShapeError("check_gradients: gradient length mismatch");
    }

    std::vector<double> theta(params.begin(), params.end());
    double max_rel = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double saved = theta[i];
        theta[i] = saved + eps;
        const double up = loss_fn(theta).first;
        theta[i] = saved - eps;
        const double down = loss_fn(theta).first;
        theta[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw NumericError("check_gradients: non-finite loss during perturbation");
        }
        const double numeric = (up - down) / (2.0 * eps);
        const double rel = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace superrl
