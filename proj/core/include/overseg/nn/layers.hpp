#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "overseg/nn/tensor.hpp"

// Forward/backward kernels for the U-Net building blocks. Feature maps are
// [C,H,W]; conv kernels are [C_out,C_in,k,k] with odd k, stride 1, zero
// "same" padding, cross-correlation (no kernel flip). All functions throw
// ArgumentError on inconsistent shapes.
namespace overseg::nn {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias);

template <typename T>
struct Conv2dGrads {
    Tensor<T> input;  // empty when not requested
    Tensor<T> kernel;
    Tensor<T> bias;
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& grad_out,
                               bool want_input_grad = true);

/// Winning flat input index per pooled output, plus the input shape.
struct PoolIndices {
    std::vector<int> input_shape;
    std::vector<std::uint32_t> argmax;
};

template <typename T>
struct PoolResult {
    Tensor<T> output;
    PoolIndices indices;
};

/// 2x2 / stride 2 max pooling. Ties go to the first element in row-major
/// order within the block. H and W must be even.
template <typename T>
PoolResult<T> maxpool2_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool2_backward(const PoolIndices& indices, const Tensor<T>& grad_out);

template <typename T>
Tensor<T> upsample2_nearest_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> upsample2_nearest_backward(const Tensor<T>& grad_out);

/// Channels of `a` followed by channels of `b`. An empty tensor acts as the
/// identity on either side.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

/// Inverse of concat_channels: first `channels_a` channels, then the rest.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& grad, int channels_a);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);

/// `activated` may be the relu input or output; both agree on x > 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& activated, const Tensor<T>& grad_out);

/// Numerically stable logistic. Results are clamped into the open interval
/// (0,1) so saturated logits never report exactly 0 or 1.
template <typename T>
Tensor<T> sigmoid_forward(const Tensor<T>& logits);

template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& probabilities, const Tensor<T>& grad_out);

template <typename T>
T sigmoid(T x) noexcept;

}  // namespace overseg::nn
