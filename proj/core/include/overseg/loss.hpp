#pragma once

#include "overseg/image.hpp"
#include "overseg/nn/tensor.hpp"

namespace overseg {

inline constexpr double kBceEpsilon = 1e-7;

template <typename T>
struct BceResult {
    double loss = 0.0;
    nn::Tensor<T> grad;  // d loss / d probabilities
};

/// loss = -mean[t ln(p + eps) + (1 - t) ln(1 - p + eps)], eps = 1e-7, with
/// the exact gradient of that clipped expression.
template <typename T>
BceResult<T> bce_loss(const nn::Tensor<T>& probabilities, const nn::Tensor<T>& targets);

/// Masks as a [n_classes, H, W] tensor of 0/1 values.
template <typename T>
nn::Tensor<T> mask_tensor(const MaskSet& masks);

}  // namespace overseg
