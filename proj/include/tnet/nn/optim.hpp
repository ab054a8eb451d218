#pragma once

#include "tnet/nn/layers.hpp"
#include "tnet/nn/tensor.hpp"

#include <vector>

namespace tnet::nn {

// AdamW with decoupled weight decay. With weight_decay == 0 the decay write
// is skipped entirely, so the trajectory is bitwise plain Adam.
class AdamW {
public:
    AdamW(std::vector<Tensor> params, double weight_decay = 0.0, double beta1 = 0.9,
          double beta2 = 0.999, double eps = 1e-8);

    void step(double lr);
    void zero_grad();
    long step_count() const { return t_; }

private:
    std::vector<Tensor> params_;
    std::vector<Array> m_, v_;
    double wd_, beta1_, beta2_, eps_;
    long t_ = 0;
};

double cosine_lr(long step, long total, double lr_max, double lr_min);

class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    // Feeds one epoch's validation loss; returns true when training should stop.
    bool update(double val_loss);
    double best() const { return best_; }
    int epochs_without_improvement() const { return stale_; }
    bool improved_last() const { return improved_last_; }

private:
    int patience_;
    double best_ = std::numeric_limits<double>::infinity();
    int stale_ = 0;
    bool improved_last_ = false;
};

std::vector<Array> snapshot_params(const ParamSet& ps);
void restore_params(ParamSet& ps, const std::vector<Array>& snap);

} // namespace tnet::nn
