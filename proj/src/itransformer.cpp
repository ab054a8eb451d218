#include "tnet/itransformer.hpp"

#include "tnet/nn/losses.hpp"

#include <algorithm>
#include <stdexcept>

namespace tnet::itf {

using nn::Tensor;

ITransformerModel::ITransformerModel(const ITransformerConfig& config) : config_(config) {
    std::mt19937_64 rng(config_.seed);
    embed_w_ = params_.add("embed_w",
                           Tensor::parameter({config_.n_features, config_.d_model}, 1.0, rng));
    embed_b_ = params_.add("embed_b",
                           Tensor::parameter({config_.n_features, config_.d_model}, 1.0, rng));
    for (int l = 0; l < config_.layers; ++l)
        encoder_.emplace_back(params_, "enc" + std::to_string(l), config_.d_model,
                              config_.n_heads, config_.ff_dim, rng);
    head_ = nn::Linear(params_, "head", config_.d_model, 12, rng);
}

Tensor ITransformerModel::forward(const Tensor& x) const {
    if (x.rank() != 2 || x.dim(1) != config_.n_features)
        throw std::invalid_argument("itransformer: input must be (B,123)");
    Tensor tokens = nn::token_embed(x, embed_w_, embed_b_); // feature identity is per-token
    for (const auto& layer : encoder_) tokens = layer.forward(tokens);
    Tensor pooled = nn::mean_tokens(tokens);
    return head_.forward(pooled); // (B, 4 targets x 3 quantiles)
}

Tensor ITransformerModel::loss(const Tensor& raw_out,
                               const std::vector<labels::ThresholdLabels>& batch_labels) const {
    if (raw_out.rank() != 2 || raw_out.dim(1) != 12)
        throw std::invalid_argument("itransformer loss: expects (B,12) raw quantiles");
    size_t B = batch_labels.size();
    Tensor total;
    for (int t = 0; t < 4; ++t) {
        std::vector<double> y(B);
        for (size_t i = 0; i < B; ++i) y[i] = batch_labels[i].target(t);
        Tensor q10 = nn::slice_cols(raw_out, 3 * t, 3 * t + 1);
        Tensor q50 = nn::slice_cols(raw_out, 3 * t + 1, 3 * t + 2);
        Tensor q90 = nn::slice_cols(raw_out, 3 * t + 2, 3 * t + 3);
        Tensor l = nn::quantile3_mean(q10, q50, q90, y);
        total = t == 0 ? l : nn::add(total, l);
    }
    return nn::scale(total, 1.0 / 4.0);
}

std::vector<QuantilePrediction> ITransformerModel::predict(
    const std::vector<const feat::Sample*>& samples, int batch_size) const {
    std::vector<QuantilePrediction> out;
    out.reserve(samples.size());
    for (size_t begin = 0; begin < samples.size(); begin += static_cast<size_t>(batch_size)) {
        size_t end = std::min(samples.size(), begin + static_cast<size_t>(batch_size));
        int B = static_cast<int>(end - begin);
        std::vector<double> flat;
        flat.reserve(static_cast<size_t>(B) * feat::kFeatureCount);
        for (size_t i = begin; i < end; ++i)
            flat.insert(flat.end(), samples[i]->x.begin(), samples[i]->x.end());
        Tensor raw = forward(Tensor::constant(flat, {B, config_.n_features}));
        for (int i = 0; i < B; ++i) {
            QuantilePrediction qp;
            for (int t = 0; t < 4; ++t) {
                std::array<double, 3> q = {raw.value()[i * 12 + 3 * t],
                                           raw.value()[i * 12 + 3 * t + 1],
                                           raw.value()[i * 12 + 3 * t + 2]};
                std::sort(q.begin(), q.end()); // quantile crossing fixed at inference
                qp.q10[static_cast<size_t>(t)] = q[0];
                qp.q50[static_cast<size_t>(t)] = q[1];
                qp.q90[static_cast<size_t>(t)] = q[2];
                qp.spread[static_cast<size_t>(t)] = q[2] - q[0];
            }
            out.push_back(qp);
        }
    }
    return out;
}

} // namespace tnet::itf
