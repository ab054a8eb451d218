#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace tnet::nn {

// Reverse-mode tensor engine. Values are flat row-major double arrays; each
// op records a backward closure on the node it produces. Graphs are rebuilt
// per step and freed when the last Tensor handle goes out of scope.
using Array = Eigen::ArrayXd;

struct Node {
    std::vector<int> shape;
    Array value;
    Array grad; // allocated on first use; accumulates until cleared
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward_fn;

    Eigen::Index size() const { return value.size(); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad = Array::Zero(value.size());
    }
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> n) : n_(std::move(n)) {}

    static Tensor constant(std::vector<double> values, std::vector<int> shape);
    static Tensor scalar(double v);
    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    // uniform(-bound, bound) leaf parameter drawn from the shared generator
    static Tensor parameter(std::vector<int> shape, double bound, std::mt19937_64& rng);

    bool defined() const { return n_ != nullptr; }
    const std::vector<int>& shape() const { return n_->shape; }
    int dim(int i) const { return n_->shape[static_cast<size_t>(i)]; }
    int rank() const { return static_cast<int>(n_->shape.size()); }
    Eigen::Index size() const { return n_->size(); }
    bool requires_grad() const { return n_->requires_grad; }

    Array& value() { return n_->value; }
    const Array& value() const { return n_->value; }
    Array& grad();
    double item() const; // scalar nodes only

    void zero_grad();
    void backward() const; // scalar nodes only

    std::shared_ptr<Node> node() const { return n_; }

private:
    std::shared_ptr<Node> n_;
};

int numel(const std::vector<int>& shape);

// elementwise / broadcast arithmetic
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor add_row(const Tensor& m, const Tensor& row); // (r,c) + (c)

// linear algebra
Tensor matmul(const Tensor& a, const Tensor& b);                                // (m,k)x(k,n)
Tensor bmm(const Tensor& a, const Tensor& b, bool trans_a = false, bool trans_b = false);

// structure
Tensor reshape(const Tensor& a, std::vector<int> shape);
Tensor concat_cols(const Tensor& a, const Tensor& b); // rank 2
Tensor slice_cols(const Tensor& a, int c0, int c1);   // rank 2, [c0, c1)
Tensor split_heads(const Tensor& x, int n_heads);     // (B,T,D) -> (B*h,T,D/h)
Tensor merge_heads(const Tensor& x, int n_heads);     // (B*h,T,d) -> (B,T,d*h)
Tensor add_positional(const Tensor& x, const Tensor& pos); // (B,T,D) + (T,D)
Tensor token_embed(const Tensor& x, const Tensor& w, const Tensor& b); // (B,F)->(B,F,D)
Tensor mean_tokens(const Tensor& x); // (B,T,D) -> (B,D)

// activations and normalization
Tensor relu(const Tensor& a);
Tensor gelu(const Tensor& a); // exact Gaussian CDF form
Tensor sigmoid(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor softmax_lastdim(const Tensor& a);
Tensor layer_norm_lastdim(const Tensor& x, const Tensor& gain, const Tensor& bias,
                          double eps = 1e-5);

// reductions
Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);

// fused losses (mean over leading dimension)
Tensor cross_entropy_mean(const Tensor& logits, const std::vector<int>& classes);
Tensor bce_mean(const Tensor& p, const std::vector<double>& targets); // p clamped to [1e-7, 1-1e-7]
Tensor huber_mean(const Tensor& pred, const std::vector<double>& y, double delta);

} // namespace tnet::nn
