#include "overseg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "overseg/errors.hpp"
#include "overseg/loss.hpp"
#include "overseg/parallel.hpp"

namespace overseg {

void EvalConfig::validate() const {
    if (!(noise_threshold > 0.0 && noise_threshold <= detect_threshold && detect_threshold < 1.0))
        throw ArgumentError("eval thresholds must satisfy 0 < noise <= detect < 1");
    if (histogram_bins < 2) throw ArgumentError("histogram_bins must be >= 2");
    if (render_scale < 1) throw ArgumentError("render_scale must be >= 1");
    if (!(metric_threshold > 0.0 && metric_threshold < 1.0)) throw ArgumentError("metric_threshold must lie in (0,1)");
}

const char* outcome_name(Outcome outcome) noexcept {
    switch (outcome) {
        case Outcome::correct: return "CORRECT";
        case Outcome::correct_with_residuals: return "CORRECT_WITH_RESIDUALS";
        case Outcome::confused: return "CONFUSED";
        case Outcome::spurious: return "SPURIOUS";
        case Outcome::missed: return "MISSED";
    }
    return "?";
}

ProbabilityMasks predict(const nn::UNetParams& params, const nn::UNetConfig& config, const GrayImage& image) {
    if (image.height() != config.height || image.width() != config.width)
        throw ArgumentError("predict: image is " + std::to_string(image.height()) + "x" +
                            std::to_string(image.width()) + ", model expects " + std::to_string(config.height) +
                            "x" + std::to_string(config.width));
    auto probs = nn::unet_forward(params, config, nn::image_tensor<float>(image));
    return {config.n_classes, config.height, config.width, std::move(probs.storage())};
}

ProbabilityMasks masks_as_probabilities(const MaskSet& masks) {
    if (masks.empty()) throw ArgumentError("empty mask set");
    ProbabilityMasks out{static_cast<int>(masks.size()), masks.front().height(), masks.front().width(), {}};
    for (const Mask& m : masks) out.values.insert(out.values.end(), m.bits().begin(), m.bits().end());
    return out;
}

std::vector<double> mask_max_fluxes(const ProbabilityMasks& masks) {
    if (masks.n_classes < 1 || masks.values.empty()) throw ArgumentError("mask_max_fluxes: empty masks");
    std::vector<double> out(static_cast<std::size_t>(masks.n_classes));
    for (int c = 0; c < masks.n_classes; ++c) {
        auto plane = masks.plane(c);
        out[static_cast<std::size_t>(c)] = *std::max_element(plane.begin(), plane.end());
    }
    return out;
}

Outcome classify_outcome(std::span<const double> max_fluxes, std::span<const int> truth_set,
                         const EvalConfig& config) {
    if (truth_set.empty()) throw ArgumentError("classify_outcome: empty truth set");
    const auto n = max_fluxes.size();
    std::vector<bool> truth(n, false), detected(n, false);
    for (int c : truth_set) {
        if (c < 0 || static_cast<std::size_t>(c) >= n) throw ArgumentError("classify_outcome: truth class out of range");
        truth[static_cast<std::size_t>(c)] = true;
    }
    std::size_t n_truth = 0, n_detected = 0;
    bool detected_covers_truth = true;
    double residual = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        detected[c] = max_fluxes[c] >= config.detect_threshold;
        n_truth += truth[c];
        n_detected += detected[c];
        if (truth[c] && !detected[c]) detected_covers_truth = false;
        if (!truth[c]) residual = std::max(residual, max_fluxes[c]);
    }
    const bool same = detected == truth;
    if (same && residual < config.noise_threshold) return Outcome::correct;
    if (same) return Outcome::correct_with_residuals;
    if (n_detected == n_truth) return Outcome::confused;
    const bool strict_superset = detected_covers_truth && n_detected > n_truth;
    if (strict_superset || residual >= config.detect_threshold) return Outcome::spurious;
    return Outcome::missed;
}

std::vector<double> minmax_scale(std::span<const float> plane) {
    std::vector<double> out(plane.size(), 0.0);
    if (plane.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(plane.begin(), plane.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) return out;
    for (std::size_t i = 0; i < plane.size(); ++i) out[i] = (plane[i] - lo) / (hi - lo);
    return out;
}

std::vector<HistogramBin> flux_histogram(std::span<const double> values, int bins) {
    if (bins < 2) throw ArgumentError("flux_histogram: need at least 2 bins");
    std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        out[static_cast<std::size_t>(b)].lo = static_cast<double>(b) / bins;
        out[static_cast<std::size_t>(b)].hi = static_cast<double>(b + 1) / bins;
    }
    for (double v : values) {
        const double clamped = std::clamp(v, 0.0, 1.0);
        const auto b = std::min(static_cast<int>(std::floor(clamped * bins)), bins - 1);
        ++out[static_cast<std::size_t>(b)].count;
    }
    return out;
}

namespace {

struct SampleEval {
    PixelCounts counts;
    double loss = 0.0;
    OutcomeRecord record;
};

}  // namespace

EvalReport test_report(const Dataset& dataset, const EvalConfig& config, const Predictor& predictor, int threads) {
    config.validate();
    if (dataset.samples.empty()) throw ArgumentError("test_report: empty dataset");
    std::vector<SampleEval> evals(dataset.size());
    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        const Sample& s = dataset.samples[i];
        const ProbabilityMasks predicted = predictor(s);
        auto& e = evals[i];
        e.counts = count_pixels(predicted.values, s.masks, config.metric_threshold);
        nn::Tensor<float> probs({predicted.n_classes, predicted.height, predicted.width}, predicted.values);
        e.loss = bce_loss(probs, mask_tensor<float>(s.masks)).loss;
        e.record.index = i;
        e.record.truth = s.truth_set();
        e.record.max_fluxes = mask_max_fluxes(predicted);
        e.record.category = classify_outcome(e.record.max_fluxes, e.record.truth, config);
    });

    EvalReport report;
    report.n_samples = dataset.size();
    report.config = config;
    PixelCounts counts;
    double loss = 0.0;
    std::vector<double> all_fluxes;
    all_fluxes.reserve(dataset.size() * static_cast<std::size_t>(dataset.n_classes()));
    for (auto& e : evals) {
        counts += e.counts;
        loss += e.loss;
        ++report.outcome_counts[static_cast<std::size_t>(e.record.category)];
        all_fluxes.insert(all_fluxes.end(), e.record.max_fluxes.begin(), e.record.max_fluxes.end());
        report.records.push_back(std::move(e.record));
    }
    report.metrics = finalize_metrics(counts, loss / static_cast<double>(dataset.size()));
    const auto n = static_cast<double>(dataset.size());
    for (std::size_t k = 0; k < kOutcomeCount; ++k)
        report.outcome_fractions[k] = static_cast<double>(report.outcome_counts[k]) / n;
    report.success_rate = static_cast<double>(report.outcome_counts[0] + report.outcome_counts[1]) / n;
    report.histogram = flux_histogram(all_fluxes, config.histogram_bins);
    report.background_fraction = background_fraction(dataset);
    return report;
}

EvalReport test_report(const nn::UNetParams& params, const nn::UNetConfig& unet_config, const Dataset& dataset,
                       const EvalConfig& config, int threads) {
    nn::check_params(params, unet_config);
    if (dataset.n_classes() != unet_config.n_classes)
        throw ArgumentError("dataset class count does not match the model");
    return test_report(
        dataset, config, [&](const Sample& s) { return predict(params, unet_config, s.input); }, threads);
}

std::string report_json(const EvalReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["n_samples"] = report.n_samples;
    const auto& m = report.metrics;
    j["metrics"] = ordered_json{{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
                                {"tp", m.counts.tp},      {"fp", m.counts.fp},        {"tn", m.counts.tn},
                                {"fn", m.counts.fn},      {"loss", m.loss}};
    ordered_json outcomes = ordered_json::object();
    for (std::size_t k = 0; k < kOutcomeCount; ++k)
        outcomes[outcome_name(static_cast<Outcome>(k))] =
            ordered_json{{"count", report.outcome_counts[k]}, {"fraction", report.outcome_fractions[k]}};
    j["outcomes"] = outcomes;
    j["success_rate"] = report.success_rate;
    ordered_json hist = ordered_json::array();
    for (const auto& b : report.histogram) hist.push_back({{"bin_lo", b.lo}, {"bin_hi", b.hi}, {"count", b.count}});
    j["histogram"] = hist;
    const auto& c = report.config;
    j["config"] = ordered_json{{"detect_threshold", c.detect_threshold},
                               {"noise_threshold", c.noise_threshold},
                               {"histogram_bins", c.histogram_bins},
                               {"render_scale", c.render_scale},
                               {"metric_threshold", c.metric_threshold}};
    j["background_fraction"] = report.background_fraction;
    ordered_json samples = ordered_json::array();
    for (const auto& r : report.records)
        samples.push_back({{"index", r.index},
                           {"truth", r.truth},
                           {"max_fluxes", r.max_fluxes},
                           {"category", outcome_name(r.category)}});
    j["samples"] = samples;
    return j.dump(2) + "\n";
}

void write_histogram_csv(std::span<const HistogramBin> histogram, std::ostream& sink) {
    sink << "bin_lo,bin_hi,count\n";
    for (const auto& b : histogram) sink << b.lo << ',' << b.hi << ',' << b.count << '\n';
    if (!sink) throw IoError("failed writing histogram");
}

PanelLayout panel_layout(int height, int width, int n_classes, int scale) {
    if (height < 1 || width < 1 || n_classes < 1 || scale < 1) throw ArgumentError("panel_layout: bad dimensions");
    PanelLayout l;
    l.tile_height = height * scale;
    l.tile_width = width * scale;
    l.rows = 3;
    l.columns = n_classes;
    l.height = l.rows * (l.tile_height + kPanelSeparator) + kPanelSeparator;
    l.width = l.columns * (l.tile_width + kPanelSeparator) + kPanelSeparator;
    return l;
}

namespace {

void blit(Gray8Image& panel, const PanelLayout& l, int row, int col, const std::vector<std::uint8_t>& tile, int w,
          int scale) {
    const int top = kPanelSeparator + row * (l.tile_height + kPanelSeparator);
    const int left = kPanelSeparator + col * (l.tile_width + kPanelSeparator);
    for (int y = 0; y < l.tile_height; ++y)
        for (int x = 0; x < l.tile_width; ++x)
            panel.pixels[static_cast<std::size_t>(top + y) * panel.width + left + x] =
                tile[static_cast<std::size_t>(y / scale) * w + x / scale];
}

void fill_tile(Gray8Image& panel, const PanelLayout& l, int row, int col, std::uint8_t shade) {
    const int top = kPanelSeparator + row * (l.tile_height + kPanelSeparator);
    const int left = kPanelSeparator + col * (l.tile_width + kPanelSeparator);
    for (int y = 0; y < l.tile_height; ++y)
        std::fill_n(panel.pixels.begin() + static_cast<std::ptrdiff_t>(top + y) * panel.width + left, l.tile_width,
                    shade);
}

}  // namespace

Gray8Image render_flux_plane(std::span<const float> plane, int height, int width) {
    const auto scaled = minmax_scale(plane);
    Gray8Image out{height, width, std::vector<std::uint8_t>(scaled.size())};
    for (std::size_t i = 0; i < scaled.size(); ++i)
        out.pixels[i] = static_cast<std::uint8_t>(255 - std::lround(scaled[i] * 255.0));
    return out;
}

Gray8Image render_panel(const Sample& sample, const ProbabilityMasks& predicted, const EvalConfig& config) {
    const int h = sample.input.height(), w = sample.input.width();
    const int k = static_cast<int>(sample.masks.size());
    if (predicted.n_classes != k || predicted.height != h || predicted.width != w)
        throw ArgumentError("render_panel: prediction does not match the sample");
    const int s = config.render_scale;
    const PanelLayout l = panel_layout(h, w, k, s);
    Gray8Image panel{l.height, l.width,
                     std::vector<std::uint8_t>(static_cast<std::size_t>(l.height) * l.width, kSeparatorShade)};

    blit(panel, l, 0, 0, to_display(sample.input).pixels, w, s);
    for (int c = 1; c < k; ++c) fill_tile(panel, l, 0, c, 255);
    for (int c = 0; c < k; ++c) {
        std::vector<std::uint8_t> truth(sample.masks[c].size());
        auto bits = sample.masks[c].bits();
        for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = bits[i] ? 0 : 255;
        blit(panel, l, 1, c, truth, w, s);
        blit(panel, l, 2, c, render_flux_plane(predicted.plane(c), h, w).pixels, w, s);
    }
    return panel;
}

std::string panel_filename(std::size_t index, std::span<const int> truth, std::span<const int> class_set,
                           Outcome outcome) {
    std::string letters;
    for (int c : truth)
        letters += c >= 0 && static_cast<std::size_t>(c) < class_set.size() ? class_letter(class_set[c]) : '?';
    return "panel_" + std::to_string(index) + "_" + letters + "_" + outcome_name(outcome) + ".pgm";
}

}  // namespace overseg
