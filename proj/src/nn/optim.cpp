#include "tnet/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace tnet::nn {

AdamW::AdamW(std::vector<Tensor> params, double weight_decay, double beta1, double beta2,
             double eps)
    : params_(std::move(params)), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto& p : params_) {
        m_.push_back(Array::Zero(p.size()));
        v_.push_back(Array::Zero(p.size()));
    }
}

void AdamW::step(double lr) {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Array& g = params_[i].grad();
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
        Array& p = params_[i].value();
        if (wd_ != 0.0) p -= lr * wd_ * p;
        p -= lr * (m_[i] / bc1) / ((v_[i] / bc2).sqrt() + eps_);
    }
}

void AdamW::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

double cosine_lr(long step, long total, double lr_max, double lr_min) {
    if (total <= 0) throw std::domain_error("cosine_lr: total steps must be positive");
    double frac = static_cast<double>(step) / static_cast<double>(total);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(M_PI * frac));
}

bool EarlyStopper::update(double val_loss) {
    if (val_loss < best_ - 1e-6) {
        best_ = val_loss;
        stale_ = 0;
        improved_last_ = true;
        return false;
    }
    improved_last_ = false;
    ++stale_;
    return stale_ >= patience_;
}

std::vector<Array> snapshot_params(const ParamSet& ps) {
    std::vector<Array> snap;
    snap.reserve(ps.items().size());
    for (const auto& [_, t] : ps.items()) snap.push_back(t.value());
    return snap;
}

void restore_params(ParamSet& ps, const std::vector<Array>& snap) {
    if (snap.size() != ps.items().size())
        throw std::logic_error("restore_params: snapshot size mismatch");
    for (size_t i = 0; i < snap.size(); ++i) {
        Tensor t = ps.items()[i].second; // shared handle
        t.value() = snap[i];
    }
}

} // namespace tnet::nn
