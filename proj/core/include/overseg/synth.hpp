#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "overseg/corpus.hpp"
#include "overseg/image.hpp"
#include "overseg/rng.hpp"

namespace overseg {

/// Knobs for overlap synthesis. Defaults reproduce the clean setting.
struct SynthConfig {
    std::vector<int> class_set{0, 1, 2, 3, 4};
    int height = kGlyphSide;
    int width = kGlyphSide;
    double p_single = 0.1;
    int offset_max = 4;
    double contrast_min = 0.5;
    double contrast_max = 1.0;
    double noise_sigma = 0.0;
    double mask_threshold = kDefaultMaskThreshold;
    int min_ink_pixels = 10;

    /// Throws ArgumentError on any out-of-range field.
    void validate() const;
    int n_classes() const noexcept { return static_cast<int>(class_set.size()); }

    friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

inline constexpr int kMaxPlacementAttempts = 100;

/// One synthesized example. `class_a` / `class_b` are channel indices into the
/// class set; `class_a` is the under-letter, scaled by `contrast`.
struct Sample {
    GrayImage input;
    MaskSet masks;
    std::uint8_t class_a = 0;
    std::optional<std::uint8_t> class_b;
    double contrast = 1.0;
    double noise_sigma = 0.0;
    std::uint64_t sample_seed = 0;

    bool is_pair() const noexcept { return class_b.has_value(); }
    /// Channel indices of the letters present, ascending.
    std::vector<int> truth_set() const;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
    SynthConfig config;
    std::vector<Sample> samples;
    std::optional<Split> split;
    std::uint64_t global_seed = 0;

    std::size_t size() const noexcept { return samples.size(); }
    int n_classes() const noexcept { return config.n_classes(); }
};

/// Shift by (dx, dy); vacated pixels become 0, pixels pushed off-canvas drop.
GrayImage translate(const GrayImage& image, int dx, int dy);
Mask translate(const Mask& mask, int dx, int dy);

/// Pixel-wise max(contrast * under, upper).
GrayImage composite(const GrayImage& under, const GrayImage& upper, double contrast);

GrayImage scale_intensity(const GrayImage& image, double factor);

/// Adds N(0, sigma^2) per pixel then clips to [0,1]. sigma == 0 is a no-op
/// and consumes no draws.
GrayImage add_gaussian_noise(const GrayImage& image, double sigma, Xoshiro256& rng);

/// Builds one sample from `pool` (per-class glyph lists aligned with
/// config.class_set). `sample_index` only labels GenerationError.
Sample make_sample(const ClassPool& pool, const SynthConfig& config, std::uint64_t sample_seed,
                   std::uint64_t sample_index = 0);

/// samples[i] = make_sample(pool, config, derive_seed(global_seed, i)). The
/// result is identical for every `threads` value.
Dataset generate_dataset(const ClassPool& pool, const SynthConfig& config, std::size_t count,
                         std::uint64_t global_seed, int threads = 1);

}  // namespace overseg
