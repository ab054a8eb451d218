#pragma once

#include "tnet/nn/tensor.hpp"

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace tnet::nn {

// Ordered named-parameter registry. Insertion order defines both the
// optimizer slot order and the checkpoint block order.
class ParamSet {
public:
    Tensor& add(const std::string& name, Tensor t);
    const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
    std::vector<Tensor> tensors() const;
    Tensor find(const std::string& name) const;
    long total_count() const;
    void zero_grad();

private:
    std::vector<std::pair<std::string, Tensor>> items_;
};

struct Linear {
    Tensor w; // (in, out)
    Tensor b; // (out)

    Linear() = default;
    Linear(ParamSet& ps, const std::string& name, int in, int out, std::mt19937_64& rng);
    Tensor forward(const Tensor& x) const; // rank-2 or rank-3 (last dim = in)
};

struct LayerNorm {
    Tensor gain;
    Tensor bias;

    LayerNorm() = default;
    LayerNorm(ParamSet& ps, const std::string& name, int dim);
    Tensor forward(const Tensor& x) const;
};

// Multi-head scaled dot-product attention with output projection.
// Query and key/value streams may have different widths; both are projected
// to d_model, attended per head, merged, and projected back to d_model.
struct MultiHeadAttention {
    Linear wq, wk, wv, wo;
    int n_heads = 1;
    int d_model = 0;

    MultiHeadAttention() = default;
    MultiHeadAttention(ParamSet& ps, const std::string& name, int q_dim, int kv_dim, int d_model,
                       int n_heads, std::mt19937_64& rng);
    // q: (B,Tq,q_dim), kv: (B,Tk,kv_dim) -> (B,Tq,d_model)
    Tensor forward(const Tensor& q, const Tensor& kv) const;
};

// Pre-norm residual encoder block: x + Attn(LN(x)), then x + FFN(LN(x)).
struct TransformerEncoderLayer {
    LayerNorm ln1, ln2;
    MultiHeadAttention attn;
    Linear ff1, ff2;

    TransformerEncoderLayer() = default;
    TransformerEncoderLayer(ParamSet& ps, const std::string& name, int d_model, int n_heads,
                            int ff_dim, std::mt19937_64& rng);
    Tensor forward(const Tensor& tokens) const; // (B,T,D) -> (B,T,D)
};

// Free-standing attention entry point used by tests; wraps a one-off
// multi-head module around the given projections' dimensions.
Tensor scaled_dot_product_attention(const MultiHeadAttention& mha, const Tensor& q,
                                    const Tensor& kv);

} // namespace tnet::nn
