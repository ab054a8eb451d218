#include "tnet/nn/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace tnet::nn {

namespace {
Tensor targets_like(const Tensor& pred, const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != pred.size())
        throw std::invalid_argument("loss: target count does not match predictions");
    return Tensor::constant(y, pred.shape());
}
} // namespace

Tensor pinball_mean(const Tensor& pred, const std::vector<double>& y, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("pinball: tau must lie in (0,1)");
    Tensor diff = sub(targets_like(pred, y), pred); // y - yhat
    Tensor under = scale(relu(diff), tau);
    Tensor over = scale(relu(neg(diff)), 1.0 - tau);
    return mean_all(add(under, over));
}

Tensor pseudo_huber_mean(const Tensor& pred, const std::vector<double>& y, double delta) {
    if (delta <= 0.0) throw std::domain_error("pseudo_huber: delta must be positive");
    Tensor r = sub(targets_like(pred, y), pred);
    Tensor root = sqrt(add_scalar(scale(mul(r, r), 1.0 / (delta * delta)), 1.0));
    return mean_all(scale(add_scalar(root, -1.0), delta * delta));
}

Tensor quantile3_mean(const Tensor& q10, const Tensor& q50, const Tensor& q90,
                      const std::vector<double>& y) {
    Tensor total = add(add(pinball_mean(q10, y, 0.10), pinball_mean(q50, y, 0.50)),
                       pinball_mean(q90, y, 0.90));
    return scale(total, 1.0 / 3.0);
}

double pseudo_huber(double residual, double delta) {
    double a = residual / delta;
    return delta * delta * (std::sqrt(1.0 + a * a) - 1.0);
}

double pinball(double y, double yhat, double tau) {
    return tau * std::max(y - yhat, 0.0) + (1.0 - tau) * std::max(yhat - y, 0.0);
}

} // namespace tnet::nn
