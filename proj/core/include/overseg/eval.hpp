#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "overseg/metrics.hpp"
#include "overseg/nn/unet.hpp"
#include "overseg/pgm.hpp"
#include "overseg/synth.hpp"

namespace overseg {

struct EvalConfig {
    double detect_threshold = 0.5;  // class counts as present at max flux >= this
    double noise_threshold = 0.1;   // tolerable flux in a wrong class
    int histogram_bins = 20;
    int render_scale = 4;
    double metric_threshold = 0.5;

    void validate() const;
};

enum class Outcome : std::uint8_t { correct, correct_with_residuals, confused, spurious, missed };
inline constexpr std::size_t kOutcomeCount = 5;

const char* outcome_name(Outcome outcome) noexcept;

/// Predicted per-class flux planes, [n_classes, H, W] row-major, values in (0,1).
struct ProbabilityMasks {
    int n_classes = 0;
    int height = 0;
    int width = 0;
    std::vector<float> values;

    std::span<const float> plane(int c) const {
        const auto n = static_cast<std::size_t>(height) * width;
        return std::span<const float>(values).subspan(static_cast<std::size_t>(c) * n, n);
    }
};

ProbabilityMasks predict(const nn::UNetParams& params, const nn::UNetConfig& config, const GrayImage& image);

/// Ground truth as a probability plane set (values exactly 0 or 1).
ProbabilityMasks masks_as_probabilities(const MaskSet& masks);

/// Maximum value of each class plane.
std::vector<double> mask_max_fluxes(const ProbabilityMasks& masks);

Outcome classify_outcome(std::span<const double> max_fluxes, std::span<const int> truth_set,
                         const EvalConfig& config);

/// (x - min) / (max - min); all zeros when the plane is constant.
std::vector<double> minmax_scale(std::span<const float> plane);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

/// Uniform bins over [0,1]; right-open except the last, which includes 1.
std::vector<HistogramBin> flux_histogram(std::span<const double> values, int bins);

struct OutcomeRecord {
    std::size_t index = 0;
    std::vector<int> truth;
    std::vector<double> max_fluxes;
    Outcome category = Outcome::missed;
};

struct EvalReport {
    std::size_t n_samples = 0;
    MetricsReport metrics;
    std::array<std::size_t, kOutcomeCount> outcome_counts{};
    std::array<double, kOutcomeCount> outcome_fractions{};
    double success_rate = 0.0;
    std::vector<HistogramBin> histogram;
    std::vector<OutcomeRecord> records;
    double background_fraction = 0.0;
    EvalConfig config;
};

using Predictor = std::function<ProbabilityMasks(const Sample&)>;

/// Runs `predictor` over every sample and aggregates metrics, outcomes, and
/// the max-flux histogram. Result does not depend on `threads`.
EvalReport test_report(const Dataset& dataset, const EvalConfig& config, const Predictor& predictor,
                       int threads = 1);
EvalReport test_report(const nn::UNetParams& params, const nn::UNetConfig& unet_config, const Dataset& dataset,
                       const EvalConfig& config, int threads = 1);

/// Keys in fixed order: n_samples, metrics, outcomes, success_rate,
/// histogram, config, background_fraction, samples.
std::string report_json(const EvalReport& report);
void write_histogram_csv(std::span<const HistogramBin> histogram, std::ostream& sink);

struct PanelLayout {
    int tile_height = 0;
    int tile_width = 0;
    int rows = 3;
    int columns = 0;
    int height = 0;
    int width = 0;
};

inline constexpr int kPanelSeparator = 2;
inline constexpr std::uint8_t kSeparatorShade = 128;

/// Three rows of tiles: input (row 0, column 0), ground-truth masks, and
/// min-max scaled predictions; 2-pixel separators around every tile.
PanelLayout panel_layout(int height, int width, int n_classes, int scale);

Gray8Image render_panel(const Sample& sample, const ProbabilityMasks& predicted, const EvalConfig& config);

/// `panel_<index>_<letters>_<CATEGORY>.pgm`, e.g. panel_7_AC_CORRECT.pgm.
std::string panel_filename(std::size_t index, std::span<const int> truth, std::span<const int> class_set,
                           Outcome outcome);

/// Min-max scaled, inverted display image of one probability plane.
Gray8Image render_flux_plane(std::span<const float> plane, int height, int width);

}  // namespace overseg
