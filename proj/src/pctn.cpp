#include "tnet/pctn.hpp"

#include "tnet/nn/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace tnet::pctn {

using nn::Tensor;

PctnModel::PctnModel(const PctnConfig& config) : config_(config) {
    std::mt19937_64 rng(config_.seed);
    const int D = config_.token_dim;

    ctx1_ = nn::Linear(params_, "ctx.l1", config_.ctx_in, config_.ctx_hidden, rng);
    ctx_ln1_ = nn::LayerNorm(params_, "ctx.ln1", config_.ctx_hidden);
    ctx2_ = nn::Linear(params_, "ctx.l2", config_.ctx_hidden, config_.ctx_out, rng);
    ctx_ln2_ = nn::LayerNorm(params_, "ctx.ln2", config_.ctx_out);

    double embed_bound = 1.0; // scalar fan-in
    embed_w_ = params_.add("hourly.embed_w",
                           Tensor::parameter({config_.hourly_tokens, D}, embed_bound, rng));
    embed_b_ = params_.add("hourly.embed_b",
                           Tensor::parameter({config_.hourly_tokens, D}, embed_bound, rng));
    pos_embed_ = params_.add("hourly.pos",
                             Tensor::parameter({config_.hourly_tokens, D},
                                               std::sqrt(1.0 / D), rng));
    for (int l = 0; l < config_.encoder_layers; ++l)
        encoder_.emplace_back(params_, "hourly.enc" + std::to_string(l), D, config_.n_heads,
                              4 * D, rng);
    pool_w_ = params_.add("hourly.pool_w", Tensor::parameter({D, 1}, std::sqrt(1.0 / D), rng));

    cross_fwd_ = nn::MultiHeadAttention(params_, "cross.fwd", config_.ctx_out, D, D,
                                        config_.n_heads, rng);
    cross_bwd_ = nn::MultiHeadAttention(params_, "cross.bwd", D, config_.ctx_out, D,
                                        config_.n_heads, rng);
    fuse1_ = nn::Linear(params_, "fuse.l1", 2 * D, config_.fusion_dim, rng);
    fuse2_ = nn::Linear(params_, "fuse.l2", config_.fusion_dim, config_.fusion_dim, rng);

    dist_head_ = nn::Linear(params_, "head.dist", config_.fusion_dim, 8, rng);
    hours_head_ = nn::Linear(params_, "head.hours", config_.fusion_dim, 7, rng);
    for (int i = 0; i < 4; ++i) {
        std::string base = "head.alpha" + std::to_string(i + 1);
        alpha1_[static_cast<size_t>(i)] =
            nn::Linear(params_, base + ".l1", config_.fusion_dim + 2, config_.alpha_hidden, rng);
        alpha2_[static_cast<size_t>(i)] =
            nn::Linear(params_, base + ".l2", config_.alpha_hidden, 1, rng);
    }
    gate3_head_ = nn::Linear(params_, "head.gate3", config_.fusion_dim, 1, rng);
    gate4_head_ = nn::Linear(params_, "head.gate4", config_.fusion_dim, 1, rng);
}

Tensor PctnModel::encode_context(const Tensor& x_ctx) const {
    Tensor h = nn::gelu(ctx_ln1_.forward(ctx1_.forward(x_ctx)));
    return nn::gelu(ctx_ln2_.forward(ctx2_.forward(h)));
}

Tensor PctnModel::encode_hourly(const Tensor& x_hourly) const {
    Tensor tokens = nn::token_embed(x_hourly, embed_w_, embed_b_);
    tokens = nn::add_positional(tokens, pos_embed_);
    for (const auto& layer : encoder_) tokens = layer.forward(tokens);
    return tokens;
}

Tensor PctnModel::attention_pool(const Tensor& h_pat) const {
    int B = h_pat.dim(0), T = h_pat.dim(1), D = h_pat.dim(2);
    Tensor scores = nn::reshape(nn::matmul(h_pat, pool_w_), {B, T});
    Tensor weights = nn::softmax_lastdim(scores);
    Tensor pooled = nn::bmm(nn::reshape(weights, {B, 1, T}), h_pat);
    return nn::reshape(pooled, {B, D});
}

Tensor PctnModel::cross_attend_fuse(const Tensor& v_ctx, const Tensor& h_pat, const Tensor& v_pat) const {
    int B = v_ctx.dim(0);
    Tensor q_fwd = nn::reshape(v_ctx, {B, 1, config_.ctx_out});
    Tensor attended = nn::reshape(cross_fwd_.forward(q_fwd, h_pat), {B, config_.token_dim});
    Tensor q_bwd = nn::reshape(v_pat, {B, 1, config_.token_dim});
    Tensor kv_ctx = nn::reshape(v_ctx, {B, 1, config_.ctx_out});
    Tensor ctx_updated = nn::reshape(cross_bwd_.forward(q_bwd, kv_ctx), {B, config_.token_dim});
    Tensor cat = nn::concat_cols(attended, ctx_updated);
    return nn::gelu(fuse2_.forward(nn::gelu(fuse1_.forward(cat))));
}

PctnForward PctnModel::forward(const Tensor& x_ctx, const Tensor& x_hourly,
                               const std::vector<int>& start_hours) const {
    if (x_ctx.rank() != 2 || x_ctx.dim(1) != config_.ctx_in)
        throw std::invalid_argument("pctn: context input must be (B,75)");
    if (x_hourly.rank() != 2 || x_hourly.dim(1) != config_.hourly_tokens)
        throw std::invalid_argument("pctn: hourly input must be (B,48)");
    int B = x_ctx.dim(0);
    if (static_cast<int>(start_hours.size()) != B)
        throw std::invalid_argument("pctn: start_hours size mismatch");

    Tensor v_ctx = encode_context(x_ctx);
    Tensor h_pat = encode_hourly(x_hourly);
    Tensor v_pat = attention_pool(h_pat);
    Tensor v_fused = cross_attend_fuse(v_ctx, h_pat, v_pat);

    Tensor dist = dist_head_.forward(v_fused);
    Tensor mu = nn::slice_cols(dist, 0, 4);
    Tensor sigma = nn::add_scalar(nn::softplus(nn::slice_cols(dist, 4, 8)), 0.1);

    PctnForward out;
    out.mu = mu;
    out.sigma = sigma;
    out.hours_logits = hours_head_.forward(v_fused);
    Tensor class_values = Tensor::constant({2, 3, 4, 5, 6, 7, 8}, {7, 1});
    out.t1_hat = nn::matmul(nn::softmax_lastdim(out.hours_logits), class_values);

    std::array<Tensor, 4> theta;
    for (int i = 0; i < 4; ++i) {
        Tensor mu_i = nn::slice_cols(mu, i, i + 1);
        Tensor sigma_i = nn::slice_cols(sigma, i, i + 1);
        Tensor alpha_in = nn::concat_cols(nn::concat_cols(v_fused, mu_i), sigma_i);
        Tensor a = alpha2_[static_cast<size_t>(i)].forward(
            nn::gelu(alpha1_[static_cast<size_t>(i)].forward(alpha_in)));
        out.alpha[static_cast<size_t>(i)] = nn::add_scalar(nn::softplus(a), 0.1);
        theta[static_cast<size_t>(i)] =
            nn::add(mu_i, nn::mul(out.alpha[static_cast<size_t>(i)], sigma_i));
    }

    std::vector<double> s_factors(static_cast<size_t>(B));
    for (int i = 0; i < B; ++i)
        s_factors[static_cast<size_t>(i)] =
            labels::sensitivity_factor(start_hours[static_cast<size_t>(i)]);
    out.t2_hat = nn::mul(theta[1], Tensor::constant(s_factors, {B, 1}));

    if (config_.gate_enabled) {
        out.gate3 = nn::sigmoid(gate3_head_.forward(v_fused));
        out.gate4 = nn::sigmoid(gate4_head_.forward(v_fused));
        // softplus keeps theta non-negative so the gated output cannot dip
        // below the 1.0 floor
        out.t3_hat = nn::add_scalar(nn::mul(out.gate3, nn::softplus(theta[2])), 1.0);
        out.t4_hat = nn::add_scalar(nn::mul(out.gate4, nn::softplus(theta[3])), 1.0);
    } else {
        out.t3_hat = theta[2];
        out.t4_hat = theta[3];
    }
    return out;
}

Tensor PctnModel::loss(const PctnForward& fwd,
                       const std::vector<labels::ThresholdLabels>& batch_labels) const {
    size_t B = batch_labels.size();
    std::vector<int> classes(B);
    std::vector<double> t2(B), t3(B), t4(B), above3(B), above4(B);
    for (size_t i = 0; i < B; ++i) {
        const auto& y = batch_labels[i];
        if (y.t1_hours < 2 || y.t1_hours > 8)
            throw std::invalid_argument("pctn loss: t1 label outside 2..8");
        classes[i] = y.t1_hours - 2;
        t2[i] = y.t2_inactive_min;
        t3[i] = y.t3_fluct;
        t4[i] = y.t4_hour_fluct;
        above3[i] = y.t3_fluct > 1.0 ? 1.0 : 0.0;
        above4[i] = y.t4_hour_fluct > 1.0 ? 1.0 : 0.0;
    }
    Tensor ce = nn::cross_entropy_mean(fwd.hours_logits, classes);
    Tensor p2 = nn::pinball_mean(fwd.t2_hat, t2, config_.tau_inactive);
    Tensor p3 = nn::pinball_mean(fwd.t3_hat, t3, config_.tau_fluct);
    Tensor p4 = nn::pinball_mean(fwd.t4_hat, t4, config_.tau_fluct);
    Tensor sum = nn::add(nn::add(ce, p2), nn::add(p3, p4));
    if (!config_.gate_enabled) return nn::scale(sum, 1.0 / 4.0);
    Tensor gates = nn::scale(
        nn::add(nn::bce_mean(fwd.gate3, above3), nn::bce_mean(fwd.gate4, above4)), 0.5);
    return nn::scale(nn::add(sum, gates), 1.0 / 5.0);
}

void PctnModel::split_input(const feat::FeatureArray& row, std::vector<double>& ctx,
                            std::vector<double>& hourly) {
    for (int c = 0; c < feat::kFeatureCount; ++c) {
        if (c >= feat::kHourlyBegin && c < feat::kHourlyEnd)
            hourly.push_back(row[static_cast<size_t>(c)]);
        else
            ctx.push_back(row[static_cast<size_t>(c)]);
    }
}

std::vector<PctnOutput> PctnModel::predict(const std::vector<const feat::Sample*>& samples,
                                           int batch_size) const {
    std::vector<PctnOutput> out;
    out.reserve(samples.size());
    for (size_t begin = 0; begin < samples.size(); begin += static_cast<size_t>(batch_size)) {
        size_t end = std::min(samples.size(), begin + static_cast<size_t>(batch_size));
        int B = static_cast<int>(end - begin);
        std::vector<double> ctx, hourly;
        ctx.reserve(static_cast<size_t>(B) * static_cast<size_t>(config_.ctx_in));
        hourly.reserve(static_cast<size_t>(B) * static_cast<size_t>(config_.hourly_tokens));
        std::vector<int> hours(static_cast<size_t>(B));
        for (size_t i = begin; i < end; ++i) {
            split_input(samples[i]->x, ctx, hourly);
            hours[i - begin] = samples[i]->key.start_hour;
        }
        auto fwd = forward(Tensor::constant(ctx, {B, config_.ctx_in}),
                           Tensor::constant(hourly, {B, config_.hourly_tokens}), hours);
        Tensor probs = nn::softmax_lastdim(fwd.hours_logits);
        for (int i = 0; i < B; ++i) {
            PctnOutput o;
            for (int t = 0; t < 4; ++t) {
                o.mu[static_cast<size_t>(t)] = fwd.mu.value()[i * 4 + t];
                o.sigma[static_cast<size_t>(t)] = fwd.sigma.value()[i * 4 + t];
                o.alpha[static_cast<size_t>(t)] = fwd.alpha[static_cast<size_t>(t)].value()[i];
                o.theta[static_cast<size_t>(t)] =
                    o.mu[static_cast<size_t>(t)] +
                    o.alpha[static_cast<size_t>(t)] * o.sigma[static_cast<size_t>(t)];
            }
            for (int k = 0; k < 7; ++k) o.p_hours[static_cast<size_t>(k)] = probs.value()[i * 7 + k];
            if (config_.gate_enabled) {
                o.gate_total = fwd.gate3.value()[i];
                o.gate_hourly = fwd.gate4.value()[i];
            }
            o.t_hat[0] = fwd.t1_hat.value()[i];
            o.t_hat[1] = fwd.t2_hat.value()[i];
            o.t_hat[2] = fwd.t3_hat.value()[i];
            o.t_hat[3] = fwd.t4_hat.value()[i];
            out.push_back(o);
        }
    }
    return out;
}

} // namespace tnet::pctn
