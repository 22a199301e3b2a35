#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "overseg/adam.hpp"
#include "overseg/metrics.hpp"
#include "overseg/nn/unet.hpp"
#include "overseg/synth.hpp"

namespace overseg {

struct TrainConfig {
    int epochs = 15;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t shuffle_seed = 0;
    double metric_threshold = 0.5;

    void validate() const;
    AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    MetricsReport val;
};

struct TrainOptions {
    int threads = 1;
    /// When set, `<prefix>.epochNN.unet` is written after every epoch.
    std::optional<std::filesystem::path> checkpoint_prefix;
    std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
    nn::UNetParams params;
    std::vector<EpochRecord> history;
};

struct BatchGradients {
    double loss_sum = 0.0;  // sum of per-sample mean BCE
    nn::UNetParams grads;   // summed over the batch (not yet averaged)
};

/// Forward + BCE + backward for `indices`, reduced in index order so the
/// result does not depend on `threads`.
BatchGradients batch_gradients(const nn::UNetParams& params, const nn::UNetConfig& config,
                               const Dataset& dataset, std::span<const std::size_t> indices, int threads);

/// Fisher-Yates permutation of [0, n) seeded by derive_seed(shuffle_seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed, int epoch);

TrainResult train(const Dataset& train_set, const Dataset& val_set, const nn::UNetConfig& unet_config,
                  const TrainConfig& train_config, std::uint64_t init_seed, const TrainOptions& options = {});

/// Pixel metrics and mean BCE of `params` over `dataset`.
MetricsReport evaluate_metrics(const nn::UNetParams& params, const nn::UNetConfig& config, const Dataset& dataset,
                               double threshold, int threads = 1);

std::filesystem::path checkpoint_path(const std::filesystem::path& prefix, int epoch);

/// `epoch,train_loss,val_loss,val_accuracy,val_precision,val_recall`
void write_history_csv(std::span<const EpochRecord> history, std::ostream& sink);

/// Network input geometry matching a dataset.
nn::UNetConfig unet_config_for(const Dataset& dataset, int base_filters = 16, int depth = 2);

}  // namespace overseg
