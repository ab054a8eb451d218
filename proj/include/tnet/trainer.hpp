#pragma once

#include "tnet/features.hpp"
#include "tnet/itransformer.hpp"
#include "tnet/nn/optim.hpp"
#include "tnet/pctn.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace tnet::train {

struct TrainConfig {
    int epochs = 60; // cap; early stopping usually ends sooner
    int batch_size = 256;
    double lr_max = 1e-3;
    double lr_min = 1e-5;
    double weight_decay = 0.01;
    int patience = 8;
    double val_fraction = 0.1;
    std::uint64_t shuffle_seed = 42;
    bool verbose = false;
};

struct TrainLog {
    std::vector<double> train_losses;
    std::vector<double> val_losses;
    double best_val = 0;
    int best_epoch = -1;
    int epochs_run = 0;
    bool early_stopped = false;
};

// Validation slice: samples of the latest training date, capped at
// val_fraction of the training set, taken in dataset order.
void validation_split(const feat::Dataset& ds, double val_fraction,
                      std::vector<size_t>& train_idx, std::vector<size_t>& val_idx);

// Epoch loop shared by both models: seeded shuffling, AdamW with cosine
// annealing over the planned step budget, early stopping on validation
// loss, best-epoch weights restored on exit. Throws on non-finite loss.
TrainLog fit(nn::ParamSet& params, std::vector<size_t> train_idx,
             const std::vector<size_t>& val_idx,
             const std::function<nn::Tensor(const std::vector<size_t>&)>& batch_loss,
             const TrainConfig& config);

TrainLog train_pctn(pctn::PctnModel& model, const feat::Dataset& ds, const TrainConfig& config);
TrainLog train_itransformer(itf::ITransformerModel& model, const feat::Dataset& ds,
                            const TrainConfig& config);

// Warm-start adaptation on newly arrived days; epochs must lie in 5..10.
TrainLog finetune_pctn(pctn::PctnModel& model, const feat::Dataset& new_days, int epochs,
                       const TrainConfig& base);

nn::Tensor pctn_batch_loss(const pctn::PctnModel& model, const feat::Dataset& ds,
                           const std::vector<size_t>& idx);
nn::Tensor itf_batch_loss(const itf::ITransformerModel& model, const feat::Dataset& ds,
                          const std::vector<size_t>& idx);

} // namespace tnet::train
