#include "tnet/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace tnet::nn {

Tensor& ParamSet::add(const std::string& name, Tensor t) {
    for (const auto& [n, _] : items_)
        if (n == name) throw std::logic_error("duplicate parameter name: " + name);
    items_.emplace_back(name, std::move(t));
    return items_.back().second;
}

std::vector<Tensor> ParamSet::tensors() const {
    std::vector<Tensor> out;
    out.reserve(items_.size());
    for (const auto& [_, t] : items_) out.push_back(t);
    return out;
}

Tensor ParamSet::find(const std::string& name) const {
    for (const auto& [n, t] : items_)
        if (n == name) return t;
    throw std::out_of_range("no parameter named " + name);
}

long ParamSet::total_count() const {
    long n = 0;
    for (const auto& [_, t] : items_) n += static_cast<long>(t.size());
    return n;
}

void ParamSet::zero_grad() {
    for (auto& [_, t] : items_) t.zero_grad();
}

Linear::Linear(ParamSet& ps, const std::string& name, int in, int out, std::mt19937_64& rng) {
    double bound = std::sqrt(1.0 / in);
    w = ps.add(name + ".w", Tensor::parameter({in, out}, bound, rng));
    b = ps.add(name + ".b", Tensor::parameter({out}, bound, rng));
}

Tensor Linear::forward(const Tensor& x) const {
    if (x.rank() < 2 || x.shape().back() != w.dim(0))
        throw std::invalid_argument("Linear: input width mismatch");
    return add_row(matmul(x, w), b); // leading dims pass through
}

LayerNorm::LayerNorm(ParamSet& ps, const std::string& name, int dim) {
    gain = ps.add(name + ".gain", Tensor::zeros({dim}, true));
    gain.value().setConstant(1.0);
    bias = ps.add(name + ".bias", Tensor::zeros({dim}, true));
}

Tensor LayerNorm::forward(const Tensor& x) const {
    return layer_norm_lastdim(x, gain, bias);
}

MultiHeadAttention::MultiHeadAttention(ParamSet& ps, const std::string& name, int q_dim,
                                       int kv_dim, int d_model_, int n_heads_,
                                       std::mt19937_64& rng)
    : n_heads(n_heads_), d_model(d_model_) {
    if (d_model % n_heads != 0)
        throw std::invalid_argument("MultiHeadAttention: d_model not divisible by n_heads");
    wq = Linear(ps, name + ".wq", q_dim, d_model, rng);
    wk = Linear(ps, name + ".wk", kv_dim, d_model, rng);
    wv = Linear(ps, name + ".wv", kv_dim, d_model, rng);
    wo = Linear(ps, name + ".wo", d_model, d_model, rng);
}

Tensor MultiHeadAttention::forward(const Tensor& q, const Tensor& kv) const {
    if (q.rank() != 3 || kv.rank() != 3 || q.dim(0) != kv.dim(0))
        throw std::invalid_argument("attention: expects rank-3 inputs with equal batch");
    int dh = d_model / n_heads;
    Tensor Q = split_heads(wq.forward(q), n_heads);   // (B*h, Tq, dh)
    Tensor K = split_heads(wk.forward(kv), n_heads);  // (B*h, Tk, dh)
    Tensor V = split_heads(wv.forward(kv), n_heads);
    Tensor scores = scale(bmm(Q, K, false, true), 1.0 / std::sqrt(static_cast<double>(dh)));
    Tensor attn = softmax_lastdim(scores);
    Tensor out = merge_heads(bmm(attn, V), n_heads); // (B, Tq, d_model)
    return wo.forward(out);
}

TransformerEncoderLayer::TransformerEncoderLayer(ParamSet& ps, const std::string& name,
                                                 int d_model, int n_heads, int ff_dim,
                                                 std::mt19937_64& rng) {
    ln1 = LayerNorm(ps, name + ".ln1", d_model);
    attn = MultiHeadAttention(ps, name + ".attn", d_model, d_model, d_model, n_heads, rng);
    ln2 = LayerNorm(ps, name + ".ln2", d_model);
    ff1 = Linear(ps, name + ".ff1", d_model, ff_dim, rng);
    ff2 = Linear(ps, name + ".ff2", ff_dim, d_model, rng);
}

Tensor TransformerEncoderLayer::forward(const Tensor& tokens) const {
    Tensor h = ln1.forward(tokens);
    Tensor x = add(tokens, attn.forward(h, h));
    Tensor f = ff2.forward(gelu(ff1.forward(ln2.forward(x))));
    return add(x, f);
}

Tensor scaled_dot_product_attention(const MultiHeadAttention& mha, const Tensor& q,
                                    const Tensor& kv) {
    return mha.forward(q, kv);
}

} // namespace tnet::nn
