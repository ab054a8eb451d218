#include "tnet/nn/tensor.hpp"

#include <cmath>
#include <malloc.h>
#include <stdexcept>
#include <unordered_set>

namespace tnet::nn {

namespace {

// Training rebuilds the graph every step, cycling ~100MB of multi-megabyte
// arrays. With glibc defaults those come from mmap and every step pays the
// fault-and-zero cost again; keeping them in the arena roughly halves the
// step time.
struct AllocatorTuning {
    AllocatorTuning() {
        mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);
        mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
    }
};
const AllocatorTuning allocator_tuning;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<RowMat>;
using CMap = Eigen::Map<const RowMat>;

Map as_mat(Array& a, int r, int c) { return Map(a.data(), r, c); }
CMap as_mat(const Array& a, int r, int c) { return CMap(a.data(), r, c); }

std::shared_ptr<Node> make_node(std::vector<int> shape, Array value) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    return n;
}

// Wires an op result into the graph. Inputs and the backward closure are
// dropped entirely when no input needs gradients, so constant subgraphs
// cost nothing at backward time.
Tensor make_op(std::vector<int> shape, Array value, std::vector<Tensor> inputs,
               std::function<void(Node&)> backward_fn) {
    auto n = make_node(std::move(shape), std::move(value));
    bool needs = false;
    for (const auto& t : inputs) needs = needs || t.requires_grad();
    if (needs) {
        n->requires_grad = true;
        n->inputs.reserve(inputs.size());
        for (auto& t : inputs) n->inputs.push_back(t.node());
        n->backward_fn = std::move(backward_fn);
    }
    return Tensor(n);
}

void check(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

int last_dim(const std::vector<int>& shape) { return shape.empty() ? 1 : shape.back(); }

} // namespace

int numel(const std::vector<int>& shape) {
    int n = 1;
    for (int d : shape) n *= d;
    return n;
}

Tensor Tensor::constant(std::vector<double> values, std::vector<int> shape) {
    check(static_cast<int>(values.size()) == numel(shape), "constant: size/shape mismatch");
    Array a = Eigen::Map<const Array>(values.data(), static_cast<Eigen::Index>(values.size()));
    return Tensor(make_node(std::move(shape), std::move(a)));
}

Tensor Tensor::scalar(double v) {
    Array a(1);
    a[0] = v;
    return Tensor(make_node({1}, std::move(a)));
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    auto n = make_node(shape, Array::Zero(numel(shape)));
    n->requires_grad = requires_grad;
    return Tensor(n);
}

Tensor Tensor::parameter(std::vector<int> shape, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Array a(numel(shape));
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = dist(rng);
    auto n = make_node(std::move(shape), std::move(a));
    n->requires_grad = true;
    return Tensor(n);
}

Array& Tensor::grad() {
    n_->ensure_grad();
    return n_->grad;
}

double Tensor::item() const {
    if (n_->size() != 1) throw std::logic_error("item() on non-scalar tensor");
    return n_->value[0];
}

void Tensor::zero_grad() {
    n_->ensure_grad();
    n_->grad.setZero();
}

void Tensor::backward() const {
    if (n_->size() != 1) throw std::logic_error("backward() requires a scalar loss node");
    // iterative post-order topological sort
    std::vector<Node*> topo;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(n_.get(), 0);
    visited.insert(n_.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->inputs.size()) {
            Node* next = node->inputs[idx++].get();
            if (next->requires_grad && !visited.count(next)) {
                visited.insert(next);
                stack.emplace_back(next, 0);
            }
        } else {
            topo.push_back(node);
            stack.pop_back();
        }
    }
    n_->ensure_grad();
    n_->grad[0] += 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        if ((*it)->backward_fn) (*it)->backward_fn(**it);
    }
}

// ---------------------------------------------------------------------------
// arithmetic

Tensor add(const Tensor& a, const Tensor& b) {
    check(a.shape() == b.shape(), "add: shape mismatch");
    return make_op(a.shape(), a.value() + b.value(), {a, b}, [](Node& n) {
        for (int i = 0; i < 2; ++i)
            if (n.inputs[i]->requires_grad) {
                n.inputs[i]->ensure_grad();
                n.inputs[i]->grad += n.grad;
            }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check(a.shape() == b.shape(), "sub: shape mismatch");
    return make_op(a.shape(), a.value() - b.value(), {a, b}, [](Node& n) {
        if (n.inputs[0]->requires_grad) {
            n.inputs[0]->ensure_grad();
            n.inputs[0]->grad += n.grad;
        }
        if (n.inputs[1]->requires_grad) {
            n.inputs[1]->ensure_grad();
            n.inputs[1]->grad -= n.grad;
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check(a.shape() == b.shape(), "mul: shape mismatch");
    return make_op(a.shape(), a.value() * b.value(), {a, b}, [](Node& n) {
        if (n.inputs[0]->requires_grad) {
            n.inputs[0]->ensure_grad();
            n.inputs[0]->grad += n.grad * n.inputs[1]->value;
        }
        if (n.inputs[1]->requires_grad) {
            n.inputs[1]->ensure_grad();
            n.inputs[1]->grad += n.grad * n.inputs[0]->value;
        }
    });
}

Tensor neg(const Tensor& a) {
    return make_op(a.shape(), -a.value(), {a}, [](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad -= n.grad;
    });
}

Tensor scale(const Tensor& a, double s) {
    return make_op(a.shape(), a.value() * s, {a}, [s](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad * s;
    });
}

Tensor add_scalar(const Tensor& a, double s) {
    return make_op(a.shape(), a.value() + s, {a}, [](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad;
    });
}

Tensor add_row(const Tensor& m, const Tensor& row) {
    check(m.rank() >= 2 && row.rank() == 1, "add_row: expects matrix and vector");
    int c = m.shape().back();
    check(row.dim(0) == c, "add_row: width mismatch");
    int r = static_cast<int>(m.size()) / c;
    Array out = m.value();
    as_mat(out, r, c).rowwise() += Eigen::Map<const Eigen::RowVectorXd>(row.value().data(), c);
    return make_op(m.shape(), std::move(out), {m, row}, [r, c](Node& n) {
        if (n.inputs[0]->requires_grad) {
            n.inputs[0]->ensure_grad();
            n.inputs[0]->grad += n.grad;
        }
        if (n.inputs[1]->requires_grad) {
            n.inputs[1]->ensure_grad();
            Eigen::Map<Eigen::RowVectorXd> db(n.inputs[1]->grad.data(), c);
            db += as_mat(n.grad, r, c).colwise().sum();
        }
    });
}

// ---------------------------------------------------------------------------
// linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
    // a may be any rank >= 2; its leading dimensions are treated as rows,
    // so (B,T,in) x (in,out) -> (B,T,out) without reshape copies
    check(a.rank() >= 2 && b.rank() == 2, "matmul: expects rank>=2 by rank-2");
    int k = a.shape().back();
    int m = static_cast<int>(a.size()) / k;
    check(k == b.dim(0), "matmul: inner dimension mismatch");
    int n = b.dim(1);
    Array out(static_cast<Eigen::Index>(m) * n);
    as_mat(out, m, n).noalias() = as_mat(a.value(), m, k) * as_mat(b.value(), k, n);
    std::vector<int> out_shape = a.shape();
    out_shape.back() = n;
    return make_op(std::move(out_shape), std::move(out), {a, b}, [m, k, n](Node& nd) {
        auto dC = as_mat(nd.grad, m, n);
        if (nd.inputs[0]->requires_grad) {
            nd.inputs[0]->ensure_grad();
            as_mat(nd.inputs[0]->grad, m, k).noalias() +=
                dC * as_mat(nd.inputs[1]->value, k, n).transpose();
        }
        if (nd.inputs[1]->requires_grad) {
            nd.inputs[1]->ensure_grad();
            as_mat(nd.inputs[1]->grad, k, n).noalias() +=
                as_mat(nd.inputs[0]->value, m, k).transpose() * dC;
        }
    });
}

Tensor bmm(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
    check(a.rank() == 3 && b.rank() == 3, "bmm: expects rank-3 tensors");
    check(a.dim(0) == b.dim(0), "bmm: batch mismatch");
    int nb = a.dim(0);
    int am = a.dim(1), ak = a.dim(2);
    int bk = b.dim(1), bn = b.dim(2);
    int m = trans_a ? ak : am, k = trans_a ? am : ak;
    int kb = trans_b ? bn : bk, n = trans_b ? bk : bn;
    check(k == kb, "bmm: inner dimension mismatch");

    Array out(static_cast<Eigen::Index>(nb) * m * n);
    for (int i = 0; i < nb; ++i) {
        CMap A(a.value().data() + static_cast<Eigen::Index>(i) * am * ak, am, ak);
        CMap B(b.value().data() + static_cast<Eigen::Index>(i) * bk * bn, bk, bn);
        Map C(out.data() + static_cast<Eigen::Index>(i) * m * n, m, n);
        if (!trans_a && !trans_b) C.noalias() = A * B;
        else if (!trans_a && trans_b) C.noalias() = A * B.transpose();
        else if (trans_a && !trans_b) C.noalias() = A.transpose() * B;
        else C.noalias() = A.transpose() * B.transpose();
    }
    return make_op({nb, m, n}, std::move(out), {a, b},
                   [nb, am, ak, bk, bn, m, n, trans_a, trans_b](Node& nd) {
        bool ga = nd.inputs[0]->requires_grad, gb = nd.inputs[1]->requires_grad;
        if (ga) nd.inputs[0]->ensure_grad();
        if (gb) nd.inputs[1]->ensure_grad();
        for (int i = 0; i < nb; ++i) {
            CMap A(nd.inputs[0]->value.data() + static_cast<Eigen::Index>(i) * am * ak, am, ak);
            CMap B(nd.inputs[1]->value.data() + static_cast<Eigen::Index>(i) * bk * bn, bk, bn);
            CMap dC(nd.grad.data() + static_cast<Eigen::Index>(i) * m * n, m, n);
            if (ga) {
                Map dA(nd.inputs[0]->grad.data() + static_cast<Eigen::Index>(i) * am * ak, am, ak);
                if (!trans_a && !trans_b) dA.noalias() += dC * B.transpose();
                else if (!trans_a && trans_b) dA.noalias() += dC * B;
                else if (trans_a && !trans_b) dA.noalias() += B * dC.transpose();
                else dA.noalias() += B.transpose() * dC.transpose();
            }
            if (gb) {
                Map dB(nd.inputs[1]->grad.data() + static_cast<Eigen::Index>(i) * bk * bn, bk, bn);
                if (!trans_a && !trans_b) dB.noalias() += A.transpose() * dC;
                else if (!trans_a && trans_b) dB.noalias() += dC.transpose() * A;
                else if (trans_a && !trans_b) dB.noalias() += A * dC;
                else dB.noalias() += dC.transpose() * A.transpose();
            }
        }
    });
}

// ---------------------------------------------------------------------------
// structure

Tensor reshape(const Tensor& a, std::vector<int> shape) {
    check(numel(shape) == a.size(), "reshape: element count mismatch");
    return make_op(std::move(shape), a.value(), {a}, [](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad;
    });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    check(a.rank() == 2 && b.rank() == 2 && a.dim(0) == b.dim(0), "concat_cols: shape mismatch");
    int r = a.dim(0), ca = a.dim(1), cb = b.dim(1);
    Array out(static_cast<Eigen::Index>(r) * (ca + cb));
    auto O = as_mat(out, r, ca + cb);
    O.leftCols(ca) = as_mat(a.value(), r, ca);
    O.rightCols(cb) = as_mat(b.value(), r, cb);
    return make_op({r, ca + cb}, std::move(out), {a, b}, [r, ca, cb](Node& n) {
        auto dO = as_mat(n.grad, r, ca + cb);
        if (n.inputs[0]->requires_grad) {
            n.inputs[0]->ensure_grad();
            as_mat(n.inputs[0]->grad, r, ca) += dO.leftCols(ca);
        }
        if (n.inputs[1]->requires_grad) {
            n.inputs[1]->ensure_grad();
            as_mat(n.inputs[1]->grad, r, cb) += dO.rightCols(cb);
        }
    });
}

Tensor slice_cols(const Tensor& a, int c0, int c1) {
    check(a.rank() == 2 && c0 >= 0 && c1 <= a.dim(1) && c0 < c1, "slice_cols: bad range");
    int r = a.dim(0), c = a.dim(1), w = c1 - c0;
    Array out(static_cast<Eigen::Index>(r) * w);
    as_mat(out, r, w) = as_mat(a.value(), r, c).middleCols(c0, w);
    return make_op({r, w}, std::move(out), {a}, [r, c, c0, w](Node& n) {
        n.inputs[0]->ensure_grad();
        as_mat(n.inputs[0]->grad, r, c).middleCols(c0, w) += as_mat(n.grad, r, w);
    });
}

Tensor split_heads(const Tensor& x, int n_heads) {
    check(x.rank() == 3, "split_heads: expects (B,T,D)");
    int B = x.dim(0), T = x.dim(1), D = x.dim(2);
    check(D % n_heads == 0, "split_heads: D not divisible by head count");
    int dh = D / n_heads;
    Array out(x.size());
    const double* src = x.value().data();
    double* dst = out.data();
    for (int b = 0; b < B; ++b)
        for (int h = 0; h < n_heads; ++h)
            for (int t = 0; t < T; ++t) {
                const double* s = src + (static_cast<Eigen::Index>(b) * T + t) * D + h * dh;
                double* d = dst + ((static_cast<Eigen::Index>(b) * n_heads + h) * T + t) * dh;
                std::copy(s, s + dh, d);
            }
    return make_op({B * n_heads, T, dh}, std::move(out), {x}, [B, T, D, n_heads, dh](Node& n) {
        n.inputs[0]->ensure_grad();
        const double* g = n.grad.data();
        double* dx = n.inputs[0]->grad.data();
        for (int b = 0; b < B; ++b)
            for (int h = 0; h < n_heads; ++h)
                for (int t = 0; t < T; ++t) {
                    const double* s = g + ((static_cast<Eigen::Index>(b) * n_heads + h) * T + t) * dh;
                    double* d = dx + (static_cast<Eigen::Index>(b) * T + t) * D + h * dh;
                    for (int i = 0; i < dh; ++i) d[i] += s[i];
                }
    });
}

Tensor merge_heads(const Tensor& x, int n_heads) {
    check(x.rank() == 3, "merge_heads: expects (B*h,T,d)");
    check(x.dim(0) % n_heads == 0, "merge_heads: batch not divisible by head count");
    int B = x.dim(0) / n_heads, T = x.dim(1), dh = x.dim(2), D = dh * n_heads;
    Array out(x.size());
    const double* src = x.value().data();
    double* dst = out.data();
    for (int b = 0; b < B; ++b)
        for (int h = 0; h < n_heads; ++h)
            for (int t = 0; t < T; ++t) {
                const double* s = src + ((static_cast<Eigen::Index>(b) * n_heads + h) * T + t) * dh;
                double* d = dst + (static_cast<Eigen::Index>(b) * T + t) * D + h * dh;
                std::copy(s, s + dh, d);
            }
    return make_op({B, T, D}, std::move(out), {x}, [B, T, D, n_heads, dh](Node& n) {
        n.inputs[0]->ensure_grad();
        const double* g = n.grad.data();
        double* dx = n.inputs[0]->grad.data();
        for (int b = 0; b < B; ++b)
            for (int h = 0; h < n_heads; ++h)
                for (int t = 0; t < T; ++t) {
                    const double* s = g + (static_cast<Eigen::Index>(b) * T + t) * D + h * dh;
                    double* d = dx + ((static_cast<Eigen::Index>(b) * n_heads + h) * T + t) * dh;
                    for (int i = 0; i < dh; ++i) d[i] += s[i];
                }
    });
}

Tensor add_positional(const Tensor& x, const Tensor& pos) {
    check(x.rank() == 3 && pos.rank() == 2, "add_positional: expects (B,T,D) and (T,D)");
    int B = x.dim(0), T = x.dim(1), D = x.dim(2);
    check(pos.dim(0) == T && pos.dim(1) == D, "add_positional: positional shape mismatch");
    Array out = x.value();
    for (int b = 0; b < B; ++b)
        Eigen::Map<Array>(out.data() + static_cast<Eigen::Index>(b) * T * D, T * D) += pos.value();
    return make_op({B, T, D}, std::move(out), {x, pos}, [B, T, D](Node& n) {
        if (n.inputs[0]->requires_grad) {
            n.inputs[0]->ensure_grad();
            n.inputs[0]->grad += n.grad;
        }
        if (n.inputs[1]->requires_grad) {
            n.inputs[1]->ensure_grad();
            for (int b = 0; b < B; ++b)
                n.inputs[1]->grad +=
                    Eigen::Map<const Array>(n.grad.data() + static_cast<Eigen::Index>(b) * T * D,
                                            static_cast<Eigen::Index>(T) * D);
        }
    });
}

Tensor token_embed(const Tensor& x, const Tensor& w, const Tensor& b) {
    check(x.rank() == 2 && w.rank() == 2 && b.rank() == 2, "token_embed: bad ranks");
    int B = x.dim(0), F = x.dim(1), D = w.dim(1);
    check(w.dim(0) == F && b.dim(0) == F && b.dim(1) == D, "token_embed: shape mismatch");
    Array out(static_cast<Eigen::Index>(B) * F * D);
    const double* xs = x.value().data();
    const double* ws = w.value().data();
    const double* bs = b.value().data();
    double* os = out.data();
    for (int i = 0; i < B; ++i)
        for (int f = 0; f < F; ++f) {
            double xv = xs[static_cast<Eigen::Index>(i) * F + f];
            const double* wf = ws + static_cast<Eigen::Index>(f) * D;
            const double* bf = bs + static_cast<Eigen::Index>(f) * D;
            double* o = os + (static_cast<Eigen::Index>(i) * F + f) * D;
            for (int d = 0; d < D; ++d) o[d] = xv * wf[d] + bf[d];
        }
    return make_op({B, F, D}, std::move(out), {x, w, b}, [B, F, D](Node& n) {
        const double* g = n.grad.data();
        const double* xs = n.inputs[0]->value.data();
        const double* ws = n.inputs[1]->value.data();
        bool gx = n.inputs[0]->requires_grad, gw = n.inputs[1]->requires_grad,
             gb = n.inputs[2]->requires_grad;
        if (gx) n.inputs[0]->ensure_grad();
        if (gw) n.inputs[1]->ensure_grad();
        if (gb) n.inputs[2]->ensure_grad();
        for (int i = 0; i < B; ++i)
            for (int f = 0; f < F; ++f) {
                const double* go = g + (static_cast<Eigen::Index>(i) * F + f) * D;
                double xv = xs[static_cast<Eigen::Index>(i) * F + f];
                if (gx) {
                    const double* wf = ws + static_cast<Eigen::Index>(f) * D;
                    double acc = 0;
                    for (int d = 0; d < D; ++d) acc += go[d] * wf[d];
                    n.inputs[0]->grad[static_cast<Eigen::Index>(i) * F + f] += acc;
                }
                if (gw) {
                    double* dw = n.inputs[1]->grad.data() + static_cast<Eigen::Index>(f) * D;
                    for (int d = 0; d < D; ++d) dw[d] += go[d] * xv;
                }
                if (gb) {
                    double* db = n.inputs[2]->grad.data() + static_cast<Eigen::Index>(f) * D;
                    for (int d = 0; d < D; ++d) db[d] += go[d];
                }
            }
    });
}

Tensor mean_tokens(const Tensor& x) {
    check(x.rank() == 3, "mean_tokens: expects (B,T,D)");
    int B = x.dim(0), T = x.dim(1), D = x.dim(2);
    Array out = Array::Zero(static_cast<Eigen::Index>(B) * D);
    for (int b = 0; b < B; ++b) {
        auto xb = as_mat(x.value(), B * T, D).middleRows(static_cast<Eigen::Index>(b) * T, T);
        Eigen::Map<Eigen::RowVectorXd>(out.data() + static_cast<Eigen::Index>(b) * D, D) =
            xb.colwise().mean();
    }
    return make_op({B, D}, std::move(out), {x}, [B, T, D](Node& n) {
        n.inputs[0]->ensure_grad();
        double inv = 1.0 / T;
        for (int b = 0; b < B; ++b) {
            Eigen::Map<const Eigen::RowVectorXd> gb(n.grad.data() + static_cast<Eigen::Index>(b) * D, D);
            as_mat(n.inputs[0]->grad, B * T, D)
                .middleRows(static_cast<Eigen::Index>(b) * T, T)
                .rowwise() += gb * inv;
        }
    });
}

// ---------------------------------------------------------------------------
// activations

Tensor relu(const Tensor& a) {
    return make_op(a.shape(), a.value().max(0.0), {a}, [](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad * (n.inputs[0]->value > 0.0).cast<double>();
    });
}

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
} // namespace

Tensor gelu(const Tensor& a) {
    Array cdf(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        cdf[i] = 0.5 * (1.0 + std::erf(a.value()[i] * kInvSqrt2));
    return make_op(a.shape(), a.value() * cdf, {a}, [cdf](Node& n) {
        n.inputs[0]->ensure_grad();
        const Array& x = n.inputs[0]->value;
        Array pdf = kInvSqrt2Pi * (-0.5 * x * x).exp();
        n.inputs[0]->grad += n.grad * (cdf + x * pdf);
    });
}

Tensor sigmoid(const Tensor& a) {
    Array y(a.size());
    const Array& x = a.value();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double v = x[i];
        y[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return make_op(a.shape(), std::move(y), {a}, [](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad * n.value * (1.0 - n.value);
    });
}

Tensor softplus(const Tensor& a) {
    Array y(a.size());
    const Array& x = a.value();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double v = x[i];
        y[i] = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
    }
    return make_op(a.shape(), std::move(y), {a}, [](Node& n) {
        n.inputs[0]->ensure_grad();
        const Array& x = n.inputs[0]->value;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double v = x[i];
            double s = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
            n.inputs[0]->grad[i] += n.grad[i] * s;
        }
    });
}

Tensor exp(const Tensor& a) {
    return make_op(a.shape(), a.value().exp(), {a}, [](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad * n.value;
    });
}

Tensor log(const Tensor& a) {
    return make_op(a.shape(), a.value().log(), {a}, [](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad / n.inputs[0]->value;
    });
}

Tensor sqrt(const Tensor& a) {
    return make_op(a.shape(), a.value().sqrt(), {a}, [](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad / (2.0 * n.value);
    });
}

Tensor softmax_lastdim(const Tensor& a) {
    int c = last_dim(a.shape());
    if (c <= 0) throw std::domain_error("softmax over empty axis");
    int r = static_cast<int>(a.size()) / c;
    Array out(a.size());
    {
        auto x = as_mat(a.value(), r, c);
        auto y = as_mat(out, r, c);
        Eigen::VectorXd mx = x.rowwise().maxCoeff();
        y = (x.colwise() - mx).array().exp();
        Eigen::VectorXd sum = y.rowwise().sum();
        y.array().colwise() /= sum.array();
    }
    return make_op(a.shape(), std::move(out), {a}, [r, c](Node& n) {
        n.inputs[0]->ensure_grad();
        auto y = as_mat(n.value, r, c);
        auto dy = as_mat(n.grad, r, c);
        Eigen::VectorXd dot = (y.array() * dy.array()).rowwise().sum();
        as_mat(n.inputs[0]->grad, r, c).array() +=
            y.array() * (dy.colwise() - dot).array();
    });
}

Tensor layer_norm_lastdim(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    int c = last_dim(x.shape());
    check(gain.rank() == 1 && gain.dim(0) == c && bias.rank() == 1 && bias.dim(0) == c,
          "layer_norm: gain/bias must match last dimension");
    int r = static_cast<int>(x.size()) / c;
    Array xhat(x.size());
    Array inv_std(r);
    Array out(x.size());
    {
        auto xm = as_mat(x.value(), r, c);
        auto xh = as_mat(xhat, r, c);
        Eigen::VectorXd mean = xm.rowwise().mean();
        xh = xm.colwise() - mean;
        inv_std = ((xh.array().square().rowwise().sum() / c) + eps).sqrt().inverse();
        xh.array().colwise() *= inv_std;
        auto om = as_mat(out, r, c);
        om = xh;
        om.array().rowwise() *=
            Eigen::Map<const Eigen::RowVectorXd>(gain.value().data(), c).array();
        om.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.value().data(), c);
    }
    return make_op(x.shape(), std::move(out), {x, gain, bias},
                   [r, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& n) {
        const Array& g = n.inputs[1]->value;
        bool gx = n.inputs[0]->requires_grad, gg = n.inputs[1]->requires_grad,
             gb = n.inputs[2]->requires_grad;
        if (gx) n.inputs[0]->ensure_grad();
        if (gg) n.inputs[1]->ensure_grad();
        if (gb) n.inputs[2]->ensure_grad();
        auto dy = as_mat(n.grad, r, c);
        auto xh = as_mat(xhat, r, c);
        if (gg)
            Eigen::Map<Eigen::RowVectorXd>(n.inputs[1]->grad.data(), c) +=
                (dy.array() * xh.array()).colwise().sum().matrix();
        if (gb)
            Eigen::Map<Eigen::RowVectorXd>(n.inputs[2]->grad.data(), c) += dy.colwise().sum();
        if (gx) {
            RowMat w = dy.array().rowwise() *
                       Eigen::Map<const Eigen::RowVectorXd>(g.data(), c).array();
            Eigen::VectorXd mw = w.rowwise().mean();
            Eigen::VectorXd mwx = (w.array() * xh.array()).rowwise().mean();
            auto dx = as_mat(n.inputs[0]->grad, r, c);
            dx.array() += (((w.colwise() - mw).array() -
                            (xh.array().colwise() * mwx.array())).colwise() *
                           inv_std.array());
        }
    });
}

// ---------------------------------------------------------------------------
// reductions

Tensor sum_all(const Tensor& a) {
    Array out(1);
    out[0] = a.value().sum();
    return make_op({1}, std::move(out), {a}, [](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad[0];
    });
}

Tensor mean_all(const Tensor& a) {
    Array out(1);
    out[0] = a.value().mean();
    double inv = 1.0 / static_cast<double>(a.size());
    return make_op({1}, std::move(out), {a}, [inv](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad[0] * inv;
    });
}

// ---------------------------------------------------------------------------
// fused losses

Tensor cross_entropy_mean(const Tensor& logits, const std::vector<int>& classes) {
    check(logits.rank() == 2, "cross_entropy: expects (B,K) logits");
    int B = logits.dim(0), K = logits.dim(1);
    check(static_cast<int>(classes.size()) == B, "cross_entropy: label count mismatch");
    Array probs(logits.size());
    double loss = 0;
    for (int i = 0; i < B; ++i) {
        check(classes[i] >= 0 && classes[i] < K, "cross_entropy: class index out of range");
        Eigen::Map<const Array> row(logits.value().data() + static_cast<Eigen::Index>(i) * K, K);
        Eigen::Map<Array> p(probs.data() + static_cast<Eigen::Index>(i) * K, K);
        double mx = row.maxCoeff();
        p = (row - mx).exp();
        double z = p.sum();
        p /= z;
        loss -= row[classes[i]] - mx - std::log(z);
    }
    Array out(1);
    out[0] = loss / B;
    return make_op({1}, std::move(out), {logits},
                   [B, K, probs = std::move(probs), classes](Node& n) {
        n.inputs[0]->ensure_grad();
        double s = n.grad[0] / B;
        for (int i = 0; i < B; ++i) {
            Eigen::Map<const Array> p(probs.data() + static_cast<Eigen::Index>(i) * K, K);
            Eigen::Map<Array> d(n.inputs[0]->grad.data() + static_cast<Eigen::Index>(i) * K, K);
            d += p * s;
            d[classes[i]] -= s;
        }
    });
}

Tensor bce_mean(const Tensor& p, const std::vector<double>& targets) {
    int B = static_cast<int>(p.size());
    check(static_cast<int>(targets.size()) == B, "bce: target count mismatch");
    constexpr double kEps = 1e-7;
    Array pc = p.value().min(1.0 - kEps).max(kEps);
    double loss = 0;
    for (int i = 0; i < B; ++i)
        loss -= targets[static_cast<size_t>(i)] * std::log(pc[i]) +
                (1.0 - targets[static_cast<size_t>(i)]) * std::log(1.0 - pc[i]);
    Array out(1);
    out[0] = loss / B;
    return make_op({1}, std::move(out), {p}, [B, pc = std::move(pc), targets](Node& n) {
        n.inputs[0]->ensure_grad();
        double s = n.grad[0] / B;
        const Array& raw = n.inputs[0]->value;
        for (int i = 0; i < B; ++i) {
            if (raw[i] != pc[i]) continue; // clamped: clamp has zero derivative
            double t = targets[static_cast<size_t>(i)];
            n.inputs[0]->grad[i] += s * (pc[i] - t) / (pc[i] * (1.0 - pc[i]));
        }
    });
}

Tensor huber_mean(const Tensor& pred, const std::vector<double>& y, double delta) {
    int B = static_cast<int>(pred.size());
    check(static_cast<int>(y.size()) == B, "huber: target count mismatch");
    double loss = 0;
    Array rclip(B);
    for (int i = 0; i < B; ++i) {
        double r = pred.value()[i] - y[static_cast<size_t>(i)];
        double a = std::abs(r);
        loss += a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
        rclip[i] = std::clamp(r, -delta, delta);
    }
    Array out(1);
    out[0] = loss / B;
    return make_op({1}, std::move(out), {pred}, [B, rclip = std::move(rclip)](Node& n) {
        n.inputs[0]->ensure_grad();
        n.inputs[0]->grad += n.grad[0] / B * rclip;
    });
}

} // namespace tnet::nn
