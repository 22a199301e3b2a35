#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "overseg/image.hpp"
#include "overseg/nn/layers.hpp"
#include "overseg/nn/tensor.hpp"

namespace overseg::nn {

struct UNetConfig {
    int in_channels = 1;
    int n_classes = 5;
    int base_filters = 16;
    int depth = 2;
    int kernel_size = 3;
    int height = kGlyphSide;
    int width = kGlyphSide;

    void validate() const;
    /// Feature channels at pyramid level `level` (0 = full resolution).
    int channels_at(int level) const noexcept { return base_filters << level; }

    friend bool operator==(const UNetConfig&, const UNetConfig&) = default;
};

template <typename T>
struct NamedTensor {
    std::string name;
    Tensor<T> value;

    friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Ordered, uniquely named parameter (or gradient) tensors.
template <typename T>
struct ParamSet {
    std::vector<NamedTensor<T>> tensors;

    std::size_t size() const noexcept { return tensors.size(); }
    std::size_t element_count() const noexcept {
        std::size_t n = 0;
        for (const auto& t : tensors) n += t.value.size();
        return n;
    }
    const Tensor<T>& operator[](std::size_t i) const { return tensors[i].value; }
    Tensor<T>& operator[](std::size_t i) { return tensors[i].value; }
    const Tensor<T>& find(const std::string& name) const;

    ParamSet zeros_like() const {
        ParamSet out;
        for (const auto& t : tensors) out.tensors.push_back({t.name, Tensor<T>(t.value.shape())});
        return out;
    }
    template <typename U>
    ParamSet<U> cast() const {
        ParamSet<U> out;
        for (const auto& t : tensors) out.tensors.push_back({t.name, t.value.template cast<U>()});
        return out;
    }
    /// this += other, element-wise, shapes must align.
    void accumulate(const ParamSet& other);
    void scale(T factor);
    bool all_finite() const noexcept;

    friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

using UNetParams = ParamSet<float>;

struct ParamSpec {
    std::string name;
    std::vector<int> shape;
};

/// Names and shapes of every parameter, in canonical order: encoder levels,
/// bottleneck, decoder levels from deepest to shallowest, then the 1x1 head.
std::vector<ParamSpec> param_layout(const UNetConfig& config);

/// He-normal kernels (std = sqrt(2 / (in_ch * k * k))), zero biases.
UNetParams init_params(const UNetConfig& config, std::uint64_t seed);

/// Throws ArgumentError unless `params` matches param_layout(config).
template <typename T>
void check_params(const ParamSet<T>& params, const UNetConfig& config);

/// Activations kept by unet_forward for the backward pass.
template <typename T>
struct UNetCache {
    std::vector<Tensor<T>> conv_inputs;  // one per conv, canonical order
    std::vector<Tensor<T>> activations;  // relu outputs, one per non-head conv
    std::vector<PoolIndices> pools;      // one per encoder level
    Tensor<T> probabilities;
};

/// [in_channels, H, W] tensor holding the image pixels.
template <typename T>
Tensor<T> image_tensor(const GrayImage& image);

/// Returns per-class probabilities [n_classes, H, W]. Fills `cache` when
/// non-null. Throws NumericError naming the layer on non-finite activations.
template <typename T>
Tensor<T> unet_forward(const ParamSet<T>& params, const UNetConfig& config, const Tensor<T>& input,
                       UNetCache<T>* cache = nullptr);

/// Reverse-mode gradients of sum(grad_probabilities * probabilities) with
/// respect to every parameter, aligned with `params`.
template <typename T>
ParamSet<T> unet_backward(const ParamSet<T>& params, const UNetConfig& config, const UNetCache<T>& cache,
                          const Tensor<T>& grad_probabilities);

}  // namespace overseg::nn
