#pragma once

#include "tnet/features.hpp"
#include "tnet/nn/layers.hpp"
#include "tnet/nn/tensor.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace tnet::itf {

// Inverted-transformer variant: every one of the 123 standardized features
// becomes a token, attention runs across features, and three pinball heads
// per target emit P10/P50/P90.
struct ITransformerConfig {
    int n_features = feat::kFeatureCount; // 123
    int d_model = 128;
    int layers = 4;
    int n_heads = 8;
    int ff_dim = 512;
    std::uint64_t seed = 42;
};

struct QuantilePrediction {
    std::array<double, 4> q10{};
    std::array<double, 4> q50{};
    std::array<double, 4> q90{};
    std::array<double, 4> spread{}; // q90 - q10 after the inference-time sort
};

class ITransformerModel {
public:
    explicit ITransformerModel(const ITransformerConfig& config);

    // Raw (unsorted) quantile outputs, shape (B, 12): targets major,
    // quantiles minor. Training consumes this directly.
    nn::Tensor forward(const nn::Tensor& x) const;

    nn::Tensor loss(const nn::Tensor& raw_out,
                    const std::vector<labels::ThresholdLabels>& batch_labels) const;

    // Sorted quantiles per target; q90 is the deployment threshold.
    std::vector<QuantilePrediction> predict(const std::vector<const feat::Sample*>& samples,
                                            int batch_size = 128) const;

    nn::ParamSet& params() { return params_; }
    const nn::ParamSet& params() const { return params_; }
    const ITransformerConfig& config() const { return config_; }

private:
    ITransformerConfig config_;
    nn::ParamSet params_;
    nn::Tensor embed_w_, embed_b_;
    std::vector<nn::TransformerEncoderLayer> encoder_;
    nn::Linear head_;
};

} // namespace tnet::itf
