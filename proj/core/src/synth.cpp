#include "overseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "overseg/errors.hpp"
#include "overseg/parallel.hpp"

namespace overseg {

void SynthConfig::validate() const {
    if (class_set.empty()) throw ArgumentError("class_set is empty");
    if (class_set.size() >= 0xFF) throw ArgumentError("too many classes");
    if (class_set.size() < 2 && p_single < 1.0) throw ArgumentError("pairs need at least two classes");
    if (height < 1 || width < 1) throw ArgumentError("canvas dimensions must be positive");
    if (!(p_single >= 0.0 && p_single <= 1.0)) throw ArgumentError("p_single must lie in [0,1]");
    if (offset_max < 0) throw ArgumentError("offset_max must be >= 0");
    if (offset_max > std::min(height, width)) throw ArgumentError("offset_max exceeds the canvas");
    if (!(contrast_min > 0.0 && contrast_min <= contrast_max && contrast_max <= 1.0))
        throw ArgumentError("contrast range must satisfy 0 < min <= max <= 1");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ArgumentError("noise_sigma must be >= 0");
    if (!(mask_threshold > 0.0 && mask_threshold < 1.0)) throw ArgumentError("mask_threshold must lie in (0,1)");
    if (min_ink_pixels < 0) throw ArgumentError("min_ink_pixels must be >= 0");
}

std::vector<int> Sample::truth_set() const {
    std::vector<int> out{class_a};
    if (class_b) out.push_back(*class_b);
    std::sort(out.begin(), out.end());
    return out;
}

GrayImage translate(const GrayImage& image, int dx, int dy) {
    const int h = image.height(), w = image.width();
    GrayImage out(h, w);
    for (int y = std::max(0, dy); y < std::min(h, h + dy); ++y)
        for (int x = std::max(0, dx); x < std::min(w, w + dx); ++x) out.at(y, x) = image.at(y - dy, x - dx);
    return out;
}

Mask translate(const Mask& mask, int dx, int dy) {
    const int h = mask.height(), w = mask.width();
    Mask out(h, w);
    for (int y = std::max(0, dy); y < std::min(h, h + dy); ++y)
        for (int x = std::max(0, dx); x < std::min(w, w + dx); ++x) out.set(y, x, mask.at(y - dy, x - dx) != 0);
    return out;
}

GrayImage composite(const GrayImage& under, const GrayImage& upper, double contrast) {
    if (!under.same_shape(upper)) throw ArgumentError("composite: image dimensions differ");
    if (!(contrast > 0.0 && contrast <= 1.0)) throw ArgumentError("composite: contrast must lie in (0,1]");
    const auto c = static_cast<float>(contrast);
    GrayImage out(under.height(), under.width());
    auto a = under.pixels(), b = upper.pixels();
    auto o = out.pixels();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::max(c * a[i], b[i]);
    return out;
}

GrayImage scale_intensity(const GrayImage& image, double factor) {
    if (!(factor >= 0.0 && factor <= 1.0)) throw ArgumentError("intensity factor must lie in [0,1]");
    const auto c = static_cast<float>(factor);
    GrayImage out = image;
    for (float& p : out.pixels()) p *= c;
    return out;
}

GrayImage add_gaussian_noise(const GrayImage& image, double sigma, Xoshiro256& rng) {
    if (!(sigma >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
    if (sigma == 0.0) return image;
    GrayImage out = image;
    for (float& p : out.pixels()) {
        const double v = static_cast<double>(p) + sigma * rng.normal();
        p = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

namespace {

struct Placement {
    GrayImage image;
    Mask mask;
};

Placement place(const LetterInstance& letter, int dx, int dy) {
    return {translate(letter.image, dx, dy), translate(letter.mask, dx, dy)};
}

int draw_offset(Xoshiro256& rng, int offset_max) {
    return static_cast<int>(rng.uniform_int(-offset_max, offset_max));
}

const LetterInstance& draw_instance(Xoshiro256& rng, const std::vector<LetterInstance>& list) {
    return list[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(list.size()) - 1))];
}

}  // namespace

Sample make_sample(const ClassPool& pool, const SynthConfig& config, std::uint64_t sample_seed,
                   std::uint64_t sample_index) {
    const int k = config.n_classes();
    if (static_cast<int>(pool.size()) != k) throw ArgumentError("pool does not match the class set");
    for (const auto& list : pool)
        if (list.empty()) throw ArgumentError("empty class pool");
    const int h = config.height, w = config.width;

    Xoshiro256 rng(sample_seed);
    Sample sample;
    sample.sample_seed = sample_seed;
    sample.noise_sigma = config.noise_sigma;

    // (1) singleton or distinct pair
    const bool single = rng.bernoulli(config.p_single);
    const int class_a = static_cast<int>(rng.uniform_int(0, k - 1));
    int class_b = -1;
    if (!single) {
        class_b = static_cast<int>(rng.uniform_int(0, k - 2));
        if (class_b >= class_a) ++class_b;
    }
    // (2) glyph instances
    const LetterInstance& under = draw_instance(rng, pool[class_a]);
    const LetterInstance* upper = single ? nullptr : &draw_instance(rng, pool[class_b]);
    for (const LetterInstance* letter : {&under, upper})
        if (letter && (letter->image.height() != h || letter->image.width() != w))
            throw ArgumentError("glyph dimensions do not match the canvas");
    // (3) offsets
    int offsets[4] = {draw_offset(rng, config.offset_max), draw_offset(rng, config.offset_max), 0, 0};
    if (!single) {
        offsets[2] = draw_offset(rng, config.offset_max);
        offsets[3] = draw_offset(rng, config.offset_max);
    }
    // (4) contrast
    const double contrast = rng.uniform(config.contrast_min, config.contrast_max);
    sample.contrast = contrast;

    Placement a = place(under, offsets[0], offsets[1]);
    sample.class_a = static_cast<std::uint8_t>(class_a);
    sample.masks.assign(static_cast<std::size_t>(k), Mask(h, w));

    if (single) {
        sample.input = scale_intensity(a.image, contrast);
        sample.masks[class_a] = std::move(a.mask);
    } else {
        // (5) rejection on ink survival and bounding-box overlap
        const auto min_ink = static_cast<std::size_t>(config.min_ink_pixels);
        Placement b = place(*upper, offsets[2], offsets[3]);
        int attempt = 1;
        while (!(a.mask.ink_count() >= min_ink && b.mask.ink_count() >= min_ink &&
                 ink_bounds(a.mask).intersects(ink_bounds(b.mask)))) {
            if (attempt == kMaxPlacementAttempts)
                throw GenerationError("sample " + std::to_string(sample_index) + ": no valid placement after " +
                                          std::to_string(kMaxPlacementAttempts) + " attempts",
                                      sample_index);
            ++attempt;
            for (int& o : offsets) o = draw_offset(rng, config.offset_max);
            a = place(under, offsets[0], offsets[1]);
            b = place(*upper, offsets[2], offsets[3]);
        }
        // (6)-(7) masks are the translated glyph masks; input is the composite
        sample.input = composite(a.image, b.image, contrast);
        sample.masks[class_a] = std::move(a.mask);
        sample.masks[class_b] = std::move(b.mask);
        sample.class_b = static_cast<std::uint8_t>(class_b);
    }
    // (8)
    sample.input = add_gaussian_noise(sample.input, config.noise_sigma, rng);
    return sample;
}

Dataset generate_dataset(const ClassPool& pool, const SynthConfig& config, std::size_t count,
                         std::uint64_t global_seed, int threads) {
    config.validate();
    if (count == 0) throw ArgumentError("dataset count must be >= 1");
    Dataset dataset;
    dataset.config = config;
    dataset.global_seed = global_seed;
    dataset.samples.resize(count);
    parallel_for(count, threads, [&](std::size_t i) {
        dataset.samples[i] = make_sample(pool, config, derive_seed(global_seed, i), i);
    });
    return dataset;
}

}  // namespace overseg
