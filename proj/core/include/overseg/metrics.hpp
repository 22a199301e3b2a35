#pragma once

#include <cstdint>
#include <span>

#include "overseg/image.hpp"
#include "overseg/synth.hpp"

namespace overseg {

/// Micro-averaged confusion counts over (sample, class, pixel) slots.
struct PixelCounts {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    PixelCounts& operator+=(const PixelCounts& o) noexcept {
        tp += o.tp, fp += o.fp, tn += o.tn, fn += o.fn;
        return *this;
    }
    friend bool operator==(const PixelCounts&, const PixelCounts&) = default;
};

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    PixelCounts counts;
    double loss = 0.0;
    // False when the denominator was zero; the ratio is then reported as 0.
    bool precision_defined = false;
    bool recall_defined = false;
};

/// Counts thresholded predictions (p >= threshold is positive) against the
/// masks. `probabilities` is [n_classes, H, W] row-major.
PixelCounts count_pixels(std::span<const float> probabilities, const MaskSet& targets, double threshold);

MetricsReport finalize_metrics(const PixelCounts& counts, double mean_loss);

/// Fraction of (sample, class, pixel) slots whose ground truth is 0.
double background_fraction(const Dataset& dataset);

}  // namespace overseg
