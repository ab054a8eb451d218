#pragma once

#include "tnet/nn/tensor.hpp"

#include <vector>

namespace tnet::nn {

// Asymmetric check loss: tau*max(y-yhat,0) + (1-tau)*max(yhat-y,0), batch mean.
Tensor pinball_mean(const Tensor& pred, const std::vector<double>& y, double tau);

// delta^2 * (sqrt(1 + (r/delta)^2) - 1), batch mean.
Tensor pseudo_huber_mean(const Tensor& pred, const std::vector<double>& y, double delta);

// Mean of the 0.10 / 0.50 / 0.90 pinball terms, shared across quantile heads.
Tensor quantile3_mean(const Tensor& q10, const Tensor& q50, const Tensor& q90,
                      const std::vector<double>& y);

// Scalar reference forms used for spot values in reports and tests.
double pseudo_huber(double residual, double delta);
double pinball(double y, double yhat, double tau);

} // namespace tnet::nn
