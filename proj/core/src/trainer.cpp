#include "overseg/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "overseg/errors.hpp"
#include "overseg/loss.hpp"
#include "overseg/nn/model_io.hpp"
#include "overseg/parallel.hpp"
#include "overseg/rng.hpp"

namespace overseg {

void TrainConfig::validate() const {
    if (epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning_rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ArgumentError("Adam betas must lie in [0,1)");
    if (!(epsilon > 0.0)) throw ArgumentError("Adam epsilon must be > 0");
    if (!(metric_threshold > 0.0 && metric_threshold < 1.0)) throw ArgumentError("metric_threshold must lie in (0,1)");
}

nn::UNetConfig unet_config_for(const Dataset& dataset, int base_filters, int depth) {
    nn::UNetConfig config;
    config.n_classes = dataset.n_classes();
    config.height = dataset.config.height;
    config.width = dataset.config.width;
    config.base_filters = base_filters;
    config.depth = depth;
    config.validate();
    return config;
}

namespace {

void check_compatible(const Dataset& dataset, const nn::UNetConfig& config, const char* role) {
    if (dataset.samples.empty()) throw ArgumentError(std::string(role) + " dataset is empty");
    if (dataset.config.height != config.height || dataset.config.width != config.width ||
        dataset.n_classes() != config.n_classes || config.in_channels != 1)
        throw ArgumentError(std::string(role) + " dataset geometry does not match the network config");
}

struct SampleResult {
    double loss = 0.0;
    PixelCounts counts;
};

}  // namespace

BatchGradients batch_gradients(const nn::UNetParams& params, const nn::UNetConfig& config, const Dataset& dataset,
                               std::span<const std::size_t> indices, int threads) {
    const std::size_t n = indices.size();
    auto one = [&](std::size_t i, double& loss) {
        const Sample& s = dataset.samples.at(indices[i]);
        nn::UNetCache<float> cache;
        const auto probs = nn::unet_forward(params, config, nn::image_tensor<float>(s.input), &cache);
        auto bce = bce_loss(probs, mask_tensor<float>(s.masks));
        if (!std::isfinite(bce.loss)) throw NumericError("non-finite loss for sample " + std::to_string(indices[i]));
        loss = bce.loss;
        return nn::unet_backward(params, config, cache, bce.grad);
    };

    BatchGradients out{0.0, params.zeros_like()};
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            double loss = 0.0;
            out.grads.accumulate(one(i, loss));
            out.loss_sum += loss;
        }
        return out;
    }
    std::vector<nn::UNetParams> per_sample(n);
    std::vector<double> losses(n);
    parallel_for(n, threads, [&](std::size_t i) { per_sample[i] = one(i, losses[i]); });
    for (std::size_t i = 0; i < n; ++i) {
        out.grads.accumulate(per_sample[i]);
        out.loss_sum += losses[i];
    }
    return out;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed, int epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Xoshiro256 rng(derive_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

MetricsReport evaluate_metrics(const nn::UNetParams& params, const nn::UNetConfig& config, const Dataset& dataset,
                               double threshold, int threads) {
    check_compatible(dataset, config, "evaluation");
    std::vector<SampleResult> results(dataset.size());
    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        const Sample& s = dataset.samples[i];
        const auto probs = nn::unet_forward(params, config, nn::image_tensor<float>(s.input));
        results[i].loss = bce_loss(probs, mask_tensor<float>(s.masks)).loss;
        results[i].counts = count_pixels(probs.data(), s.masks, threshold);
    });
    PixelCounts counts;
    double loss = 0.0;
    for (const auto& r : results) {
        counts += r.counts;
        loss += r.loss;
    }
    return finalize_metrics(counts, loss / static_cast<double>(results.size()));
}

std::filesystem::path checkpoint_path(const std::filesystem::path& prefix, int epoch) {
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, ".epoch%02d.unet", epoch);
    return std::filesystem::path(prefix.string() + suffix);
}

TrainResult train(const Dataset& train_set, const Dataset& val_set, const nn::UNetConfig& unet_config,
                  const TrainConfig& train_config, std::uint64_t init_seed, const TrainOptions& options) {
    train_config.validate();
    unet_config.validate();
    check_compatible(train_set, unet_config, "training");
    check_compatible(val_set, unet_config, "validation");

    TrainResult result{nn::init_params(unet_config, init_seed), {}};
    auto state = AdamState<float>::zeros_like(result.params);
    const AdamConfig adam = train_config.adam();
    const std::size_t n = train_set.size();
    const auto batch = static_cast<std::size_t>(train_config.batch_size);

    for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
        const auto order = epoch_order(n, train_config.shuffle_seed, epoch);
        double loss_sum = 0.0;
        for (std::size_t start = 0, b = 0; start < n; start += batch, ++b) {
            const std::size_t len = std::min(batch, n - start);
            auto bg = batch_gradients(result.params, unet_config, train_set,
                                      std::span<const std::size_t>(order).subspan(start, len), options.threads);
            if (!std::isfinite(bg.loss_sum) || !bg.grads.all_finite())
                throw NumericError("non-finite loss or gradient at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(b + 1));
            bg.grads.scale(1.0f / static_cast<float>(len));
            adam_step(result.params, bg.grads, state, adam);
            loss_sum += bg.loss_sum;
        }
        EpochRecord record{epoch, loss_sum / static_cast<double>(n),
                           evaluate_metrics(result.params, unet_config, val_set, train_config.metric_threshold,
                                            options.threads)};
        if (options.checkpoint_prefix)
            nn::save_model_file(result.params, unet_config, checkpoint_path(*options.checkpoint_prefix, epoch));
        if (options.on_epoch) options.on_epoch(record);
        result.history.push_back(record);
    }
    return result;
}

void write_history_csv(std::span<const EpochRecord> history, std::ostream& sink) {
    sink << "epoch,train_loss,val_loss,val_accuracy,val_precision,val_recall\n";
    char line[256];
    for (const auto& r : history) {
        std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.epoch, r.train_loss, r.val.loss,
                      r.val.accuracy, r.val.precision, r.val.recall);
        sink << line;
    }
    if (!sink) throw IoError("failed writing training history");
}

}  // namespace overseg
