#pragma once

#include "tnet/features.hpp"
#include "tnet/labels.hpp"
#include "tnet/nn/layers.hpp"
#include "tnet/nn/tensor.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace tnet::pctn {

struct PctnConfig {
    int ctx_in = feat::kContextCount;    // 75, fixed by the feature contract
    int ctx_hidden = 128;
    int ctx_out = 64;
    int hourly_tokens = feat::kHourlyCount; // 48
    int token_dim = 32;
    int encoder_layers = 2;
    int n_heads = 4;
    int fusion_dim = 64;
    int alpha_hidden = 32;
    bool gate_enabled = true; // false: plain regression head on the fluctuation targets
    double tau_inactive = 0.75;
    double tau_fluct = 0.90;
    std::uint64_t seed = 42;
};

struct PctnOutput {
    std::array<double, 4> mu{};
    std::array<double, 4> sigma{};  // >= 0.1
    std::array<double, 4> alpha{};  // >= 0.1
    std::array<double, 4> theta{};  // mu + alpha * sigma
    std::array<double, 7> p_hours{}; // categorical over window lengths 2..8
    double gate_total = 0;  // P(threshold_fluctuation above floor)
    double gate_hourly = 0; // P(each_hour_fluctuation above floor)
    std::array<double, 4> t_hat{};
};

// Graph handles of one forward pass; the loss consumes these directly so
// training backpropagates through the same tensors.
struct PctnForward {
    nn::Tensor hours_logits; // (B,7)
    nn::Tensor t1_hat;       // (B,1) expectation over classes 2..8
    nn::Tensor t2_hat;       // (B,1) theta_2 * S(start_hour)
    nn::Tensor t3_hat;       // (B,1)
    nn::Tensor t4_hat;       // (B,1)
    nn::Tensor gate3;        // (B,1) probability, gated config only
    nn::Tensor gate4;        // (B,1)
    nn::Tensor mu;           // (B,4)
    nn::Tensor sigma;        // (B,4)
    std::array<nn::Tensor, 4> alpha; // (B,1) each
};

class PctnModel {
public:
    explicit PctnModel(const PctnConfig& config);

    // x_ctx: (B,75) standardized context slice; x_hourly: (B,48)
    // standardized hourly slice; start_hours: 1..24 per sample.
    PctnForward forward(const nn::Tensor& x_ctx, const nn::Tensor& x_hourly,
                        const std::vector<int>& start_hours) const;

    // Mean of the five loss components (CE, three pinballs, averaged gate
    // BCE); four components when the gate is disabled.
    nn::Tensor loss(const PctnForward& fwd,
                    const std::vector<labels::ThresholdLabels>& batch_labels) const;

    std::vector<PctnOutput> predict(const std::vector<const feat::Sample*>& samples,
                                    int batch_size = 512) const;

    nn::ParamSet& params() { return params_; }
    const nn::ParamSet& params() const { return params_; }
    const PctnConfig& config() const { return config_; }

    // Splits a standardized 123-feature row into the model's two inputs.
    static void split_input(const feat::FeatureArray& row, std::vector<double>& ctx,
                            std::vector<double>& hourly);

    // The five forward stages, individually exercisable.
    nn::Tensor encode_context(const nn::Tensor& x_ctx) const;   // (B,75) -> (B,64)
    nn::Tensor encode_hourly(const nn::Tensor& x_hourly) const; // (B,48) -> H_pat (B,48,D)
    nn::Tensor attention_pool(const nn::Tensor& h_pat) const;   // v_pat (B,D)
    nn::Tensor cross_attend_fuse(const nn::Tensor& v_ctx, const nn::Tensor& h_pat,
                                 const nn::Tensor& v_pat) const; // v_fused (B,fusion_dim)

private:
    PctnConfig config_;
    nn::ParamSet params_;

    nn::Linear ctx1_, ctx2_;
    nn::LayerNorm ctx_ln1_, ctx_ln2_;
    nn::Tensor embed_w_, embed_b_, pos_embed_;
    std::vector<nn::TransformerEncoderLayer> encoder_;
    nn::Tensor pool_w_;
    nn::MultiHeadAttention cross_fwd_, cross_bwd_;
    nn::Linear fuse1_, fuse2_;
    nn::Linear dist_head_;
    nn::Linear hours_head_;
    std::array<nn::Linear, 4> alpha1_;
    std::array<nn::Linear, 4> alpha2_;
    nn::Linear gate3_head_, gate4_head_;
};

} // namespace tnet::pctn
