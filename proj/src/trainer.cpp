#include "tnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace tnet::train {

void validation_split(const feat::Dataset& ds, double val_fraction,
                      std::vector<size_t>& train_idx, std::vector<size_t>& val_idx) {
    if (!(val_fraction > 0.0 && val_fraction < 0.5))
        throw std::invalid_argument("val_fraction must lie in (0, 0.5)");
    auto all_train = ds.train_indices();
    if (all_train.empty()) throw std::invalid_argument("no training samples");
    Date last = ds.train_dates.back();
    std::vector<size_t> last_date;
    for (size_t i : all_train)
        if (ds.samples[i].key.date == last) last_date.push_back(i);
    size_t cap = std::max<size_t>(
        1, std::min(last_date.size(),
                    static_cast<size_t>(val_fraction * static_cast<double>(all_train.size()))));
    val_idx.assign(last_date.begin(), last_date.begin() + static_cast<long>(cap));
    train_idx.clear();
    size_t vi = 0;
    for (size_t i : all_train) {
        if (vi < val_idx.size() && val_idx[vi] == i) {
            ++vi;
            continue;
        }
        train_idx.push_back(i);
    }
}

TrainLog fit(nn::ParamSet& params, std::vector<size_t> train_idx,
             const std::vector<size_t>& val_idx,
             const std::function<nn::Tensor(const std::vector<size_t>&)>& batch_loss,
             const TrainConfig& config) {
    if (train_idx.empty()) throw std::invalid_argument("fit: empty training set");
    if (config.epochs <= 0 || config.batch_size <= 0)
        throw std::invalid_argument("fit: epochs and batch_size must be positive");

    nn::AdamW opt(params.tensors(), config.weight_decay);
    size_t steps_per_epoch = (train_idx.size() + static_cast<size_t>(config.batch_size) - 1) /
                             static_cast<size_t>(config.batch_size);
    long total_steps = static_cast<long>(steps_per_epoch) * config.epochs;

    auto eval_loss = [&](const std::vector<size_t>& idx) {
        double sum = 0;
        size_t n = 0;
        for (size_t b = 0; b < idx.size(); b += static_cast<size_t>(config.batch_size)) {
            size_t e = std::min(idx.size(), b + static_cast<size_t>(config.batch_size));
            std::vector<size_t> chunk(idx.begin() + static_cast<long>(b),
                                      idx.begin() + static_cast<long>(e));
            sum += batch_loss(chunk).item() * static_cast<double>(chunk.size());
            n += chunk.size();
        }
        return sum / static_cast<double>(n);
    };

    std::mt19937_64 shuffle_rng(config.shuffle_seed ^ 0x7f4a7c15d1e2b3c4ULL);
    nn::EarlyStopper stopper(config.patience);
    TrainLog log;
    std::vector<nn::Array> best = nn::snapshot_params(params);
    long step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(train_idx.begin(), train_idx.end(), shuffle_rng);
        double epoch_sum = 0;
        for (size_t b = 0; b < train_idx.size(); b += static_cast<size_t>(config.batch_size)) {
            size_t e = std::min(train_idx.size(), b + static_cast<size_t>(config.batch_size));
            std::vector<size_t> batch(train_idx.begin() + static_cast<long>(b),
                                      train_idx.begin() + static_cast<long>(e));
            opt.zero_grad();
            nn::Tensor loss = batch_loss(batch);
            double lv = loss.item();
            if (!std::isfinite(lv)) {
                char msg[128];
                std::snprintf(msg, sizeof(msg),
                              "training aborted: non-finite loss at epoch %d, step %ld", epoch,
                              step);
                throw std::runtime_error(msg);
            }
            loss.backward();
            opt.step(nn::cosine_lr(step, total_steps, config.lr_max, config.lr_min));
            ++step;
            epoch_sum += lv * static_cast<double>(batch.size());
        }
        log.train_losses.push_back(epoch_sum / static_cast<double>(train_idx.size()));
        log.epochs_run = epoch + 1;

        double val = val_idx.empty() ? log.train_losses.back() : eval_loss(val_idx);
        log.val_losses.push_back(val);
        bool stop = stopper.update(val);
        if (stopper.improved_last()) {
            best = nn::snapshot_params(params);
            log.best_epoch = epoch;
        }
        if (config.verbose)
            std::fprintf(stderr, "epoch %3d  train %.6f  val %.6f%s\n", epoch,
                         log.train_losses.back(), val,
                         stopper.improved_last() ? "  *" : "");
        if (stop) {
            log.early_stopped = true;
            break;
        }
    }
    log.best_val = stopper.best();
    nn::restore_params(params, best);
    return log;
}

nn::Tensor pctn_batch_loss(const pctn::PctnModel& model, const feat::Dataset& ds,
                           const std::vector<size_t>& idx) {
    int B = static_cast<int>(idx.size());
    const auto& cfg = model.config();
    std::vector<double> ctx, hourly;
    ctx.reserve(static_cast<size_t>(B) * static_cast<size_t>(cfg.ctx_in));
    hourly.reserve(static_cast<size_t>(B) * static_cast<size_t>(cfg.hourly_tokens));
    std::vector<int> hours(idx.size());
    std::vector<labels::ThresholdLabels> y(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        const auto& s = ds.samples[idx[i]];
        pctn::PctnModel::split_input(s.x, ctx, hourly);
        hours[i] = s.key.start_hour;
        y[i] = s.y;
    }
    auto fwd = model.forward(nn::Tensor::constant(ctx, {B, cfg.ctx_in}),
                             nn::Tensor::constant(hourly, {B, cfg.hourly_tokens}), hours);
    return model.loss(fwd, y);
}

nn::Tensor itf_batch_loss(const itf::ITransformerModel& model, const feat::Dataset& ds,
                          const std::vector<size_t>& idx) {
    int B = static_cast<int>(idx.size());
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(B) * feat::kFeatureCount);
    std::vector<labels::ThresholdLabels> y(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        const auto& s = ds.samples[idx[i]];
        flat.insert(flat.end(), s.x.begin(), s.x.end());
        y[i] = s.y;
    }
    nn::Tensor raw = model.forward(nn::Tensor::constant(flat, {B, feat::kFeatureCount}));
    return model.loss(raw, y);
}

TrainLog train_pctn(pctn::PctnModel& model, const feat::Dataset& ds, const TrainConfig& config) {
    std::vector<size_t> train_idx, val_idx;
    validation_split(ds, config.val_fraction, train_idx, val_idx);
    return fit(model.params(), std::move(train_idx), val_idx,
               [&](const std::vector<size_t>& idx) { return pctn_batch_loss(model, ds, idx); },
               config);
}

TrainLog train_itransformer(itf::ITransformerModel& model, const feat::Dataset& ds,
                            const TrainConfig& config) {
    std::vector<size_t> train_idx, val_idx;
    validation_split(ds, config.val_fraction, train_idx, val_idx);
    return fit(model.params(), std::move(train_idx), val_idx,
               [&](const std::vector<size_t>& idx) { return itf_batch_loss(model, ds, idx); },
               config);
}

TrainLog finetune_pctn(pctn::PctnModel& model, const feat::Dataset& new_days, int epochs,
                       const TrainConfig& base) {
    if (epochs < 5 || epochs > 10)
        throw std::invalid_argument("finetune_pctn: epochs must lie in 5..10");
    TrainConfig cfg = base;
    cfg.epochs = epochs;
    cfg.lr_max = base.lr_max * 0.1; // gentle adaptation from the warm start
    cfg.lr_min = std::min(cfg.lr_min, cfg.lr_max * 0.1);
    std::vector<size_t> train_idx, val_idx;
    validation_split(new_days, cfg.val_fraction, train_idx, val_idx);
    return fit(model.params(), std::move(train_idx), val_idx,
               [&](const std::vector<size_t>& idx) { return pctn_batch_loss(model, new_days, idx); },
               cfg);
}

} // namespace tnet::train
