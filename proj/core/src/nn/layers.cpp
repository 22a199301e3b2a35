#include "overseg/nn/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace overseg::nn {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

template <typename T>
void require_rank(const Tensor<T>& t, int rank, const char* what) {
    if (t.rank() != rank)
        throw ArgumentError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                            t.shape_string());
}

struct ConvGeometry {
    int in_channels, out_channels, height, width, k, pad;
    long patch() const { return static_cast<long>(in_channels) * k * k; }
    long pixels() const { return static_cast<long>(height) * width; }
};

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& input, const Tensor<T>& kernel) {
    require_rank(input, 3, "conv2d input");
    require_rank(kernel, 4, "conv2d kernel");
    const int k = kernel.dim(2);
    if (kernel.dim(3) != k || k % 2 == 0) throw ArgumentError("conv2d: kernel must be square with odd size");
    if (kernel.dim(1) != input.dim(0))
        throw ArgumentError("conv2d: kernel " + kernel.shape_string() + " does not match input " +
                            input.shape_string());
    return {input.dim(0), kernel.dim(0), input.dim(1), input.dim(2), k, k / 2};
}

// Patch matrix [C_in*k*k, H*W]; row (c*k + i)*k + j holds input[c, y+i-p, x+j-p].
template <typename T>
void im2col(const Tensor<T>& input, const ConvGeometry& g, std::vector<T>& col) {
    const int h = g.height, w = g.width;
    col.assign(static_cast<std::size_t>(g.patch() * g.pixels()), T{0});
    const T* src = input.ptr();
    T* dst = col.data();
    for (int c = 0; c < g.in_channels; ++c)
        for (int i = 0; i < g.k; ++i)
            for (int j = 0; j < g.k; ++j) {
                const int sx = j - g.pad;
                const int x_lo = std::max(0, -sx), x_hi = std::min(w, w - sx);
                for (int y = 0; y < h; ++y, dst += w) {
                    const int yy = y + i - g.pad;
                    if (yy < 0 || yy >= h || x_lo >= x_hi) continue;
                    const T* row = src + (static_cast<std::size_t>(c) * h + yy) * w;
                    std::copy(row + x_lo + sx, row + x_hi + sx, dst + x_lo);
                }
            }
}

template <typename T>
void col2im(const std::vector<T>& col, const ConvGeometry& g, Tensor<T>& grad_input) {
    const int h = g.height, w = g.width;
    T* dst = grad_input.ptr();
    const T* src = col.data();
    for (int c = 0; c < g.in_channels; ++c)
        for (int i = 0; i < g.k; ++i)
            for (int j = 0; j < g.k; ++j) {
                const int sx = j - g.pad;
                const int x_lo = std::max(0, -sx), x_hi = std::min(w, w - sx);
                for (int y = 0; y < h; ++y, src += w) {
                    const int yy = y + i - g.pad;
                    if (yy < 0 || yy >= h) continue;
                    T* row = dst + (static_cast<std::size_t>(c) * h + yy) * w;
                    for (int x = x_lo; x < x_hi; ++x) row[x + sx] += src[x];
                }
            }
}

template <typename T>
std::vector<T>& scratch() {
    thread_local std::vector<T> buffer;
    return buffer;
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias) {
    const ConvGeometry g = conv_geometry(input, kernel);
    require_rank(bias, 1, "conv2d bias");
    if (bias.dim(0) != g.out_channels) throw ArgumentError("conv2d: bias length does not match kernel");

    Tensor<T> out({g.out_channels, g.height, g.width});
    ConstMatrixMap<T> weights(kernel.ptr(), g.out_channels, g.patch());
    MatrixMap<T> result(out.ptr(), g.out_channels, g.pixels());
    if (g.k == 1) {
        result.noalias() = weights * ConstMatrixMap<T>(input.ptr(), g.in_channels, g.pixels());
    } else {
        auto& col = scratch<T>();
        im2col(input, g, col);
        result.noalias() = weights * ConstMatrixMap<T>(col.data(), g.patch(), g.pixels());
    }
    for (int o = 0; o < g.out_channels; ++o) result.row(o).array() += bias[static_cast<std::size_t>(o)];
    return out;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& grad_out,
                               bool want_input_grad) {
    const ConvGeometry g = conv_geometry(input, kernel);
    if (grad_out.shape() != std::vector<int>{g.out_channels, g.height, g.width})
        throw ArgumentError("conv2d_backward: grad_out shape " + grad_out.shape_string() + " does not match");

    Conv2dGrads<T> grads{{}, Tensor<T>(kernel.shape()), Tensor<T>({g.out_channels})};
    ConstMatrixMap<T> upstream(grad_out.ptr(), g.out_channels, g.pixels());
    ConstMatrixMap<T> weights(kernel.ptr(), g.out_channels, g.patch());
    MatrixMap<T> grad_w(grads.kernel.ptr(), g.out_channels, g.patch());
    // fixed-order sum, independent of buffer alignment
    for (int o = 0; o < g.out_channels; ++o) {
        const T* row = grad_out.ptr() + static_cast<std::size_t>(o) * g.pixels();
        T acc{0};
        for (long i = 0; i < g.pixels(); ++i) acc += row[i];
        grads.bias[static_cast<std::size_t>(o)] = acc;
    }

    if (g.k == 1) {
        ConstMatrixMap<T> in(input.ptr(), g.in_channels, g.pixels());
        grad_w.noalias() = upstream * in.transpose();
        if (want_input_grad) {
            grads.input = Tensor<T>(input.shape());
            MatrixMap<T>(grads.input.ptr(), g.in_channels, g.pixels()).noalias() = weights.transpose() * upstream;
        }
        return grads;
    }
    auto& col = scratch<T>();
    im2col(input, g, col);
    grad_w.noalias() = upstream * ConstMatrixMap<T>(col.data(), g.patch(), g.pixels()).transpose();
    if (want_input_grad) {
        MatrixMap<T>(col.data(), g.patch(), g.pixels()).noalias() = weights.transpose() * upstream;
        grads.input = Tensor<T>(input.shape());
        col2im(col, g, grads.input);
    }
    return grads;
}

template <typename T>
PoolResult<T> maxpool2_forward(const Tensor<T>& input) {
    require_rank(input, 3, "maxpool2 input");
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    if (h % 2 || w % 2) throw ArgumentError("maxpool2: spatial dims must be even, got " + input.shape_string());
    const int oh = h / 2, ow = w / 2;
    PoolResult<T> r{Tensor<T>({c, oh, ow}), {input.shape(), {}}};
    r.indices.argmax.resize(r.output.size());
    std::size_t o = 0;
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x, ++o) {
                const std::size_t base = (static_cast<std::size_t>(ch) * h + 2 * y) * w + 2 * x;
                const std::size_t cand[4] = {base, base + 1, base + w, base + w + 1};
                std::size_t best = cand[0];
                for (int q = 1; q < 4; ++q)
                    if (input[cand[q]] > input[best]) best = cand[q];
                r.output[o] = input[best];
                r.indices.argmax[o] = static_cast<std::uint32_t>(best);
            }
    return r;
}

template <typename T>
Tensor<T> maxpool2_backward(const PoolIndices& indices, const Tensor<T>& grad_out) {
    if (indices.input_shape.size() != 3) throw ArgumentError("maxpool2_backward: bad recorded input shape");
    const std::vector<int> expect{indices.input_shape[0], indices.input_shape[1] / 2, indices.input_shape[2] / 2};
    if (grad_out.shape() != expect || indices.argmax.size() != grad_out.size())
        throw ArgumentError("maxpool2_backward: grad " + grad_out.shape_string() + " does not match argmax");
    Tensor<T> grad_in(indices.input_shape);
    for (std::size_t o = 0; o < grad_out.size(); ++o) {
        const auto at = indices.argmax[o];
        if (at >= grad_in.size()) throw ArgumentError("maxpool2_backward: argmax index out of range");
        grad_in[at] += grad_out[o];
    }
    return grad_in;
}

template <typename T>
Tensor<T> upsample2_nearest_forward(const Tensor<T>& input) {
    require_rank(input, 3, "upsample2 input");
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    Tensor<T> out({c, 2 * h, 2 * w});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < 2 * h; ++y)
            for (int x = 0; x < 2 * w; ++x) out.at(ch, y, x) = input.at(ch, y / 2, x / 2);
    return out;
}

template <typename T>
Tensor<T> upsample2_nearest_backward(const Tensor<T>& grad_out) {
    require_rank(grad_out, 3, "upsample2 grad");
    const int c = grad_out.dim(0), h = grad_out.dim(1), w = grad_out.dim(2);
    if (h % 2 || w % 2) throw ArgumentError("upsample2_backward: odd gradient dims");
    Tensor<T> grad_in({c, h / 2, w / 2});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) grad_in.at(ch, y / 2, x / 2) += grad_out.at(ch, y, x);
    return grad_in;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    require_rank(a, 3, "concat lhs");
    require_rank(b, 3, "concat rhs");
    if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2))
        throw ArgumentError("concat: spatial mismatch " + a.shape_string() + " vs " + b.shape_string());
    std::vector<T> data;
    data.reserve(a.size() + b.size());
    data.insert(data.end(), a.storage().begin(), a.storage().end());
    data.insert(data.end(), b.storage().begin(), b.storage().end());
    return Tensor<T>({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)}, std::move(data));
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& grad, int channels_a) {
    require_rank(grad, 3, "split_channels");
    if (channels_a < 0 || channels_a > grad.dim(0)) throw ArgumentError("split_channels: bad channel count");
    const std::size_t cut = static_cast<std::size_t>(channels_a) * grad.dim(1) * grad.dim(2);
    const auto& s = grad.storage();
    Tensor<T> a({channels_a, grad.dim(1), grad.dim(2)}, std::vector<T>(s.begin(), s.begin() + cut));
    Tensor<T> b({grad.dim(0) - channels_a, grad.dim(1), grad.dim(2)}, std::vector<T>(s.begin() + cut, s.end()));
    return {std::move(a), std::move(b)};
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
    Tensor<T> out = x;
    for (T& v : out.data()) v = v > T{0} ? v : T{0};
    return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& activated, const Tensor<T>& grad_out) {
    if (activated.shape() != grad_out.shape()) throw ArgumentError("relu_backward: shape mismatch");
    Tensor<T> grad(grad_out.shape());
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = activated[i] > T{0} ? grad_out[i] : T{0};
    return grad;
}

template <typename T>
T sigmoid(T x) noexcept {
    constexpr T lo = std::numeric_limits<T>::min();
    constexpr T hi = T{1} - std::numeric_limits<T>::epsilon() / 2;
    T s;
    if (x >= T{0}) {
        s = T{1} / (T{1} + std::exp(-x));
    } else {
        const T e = std::exp(x);
        s = e / (T{1} + e);
    }
    return std::clamp(s, lo, hi);
}

template <typename T>
Tensor<T> sigmoid_forward(const Tensor<T>& logits) {
    Tensor<T> out = logits;
    for (T& v : out.data()) v = sigmoid(v);
    return out;
}

template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& probabilities, const Tensor<T>& grad_out) {
    if (probabilities.shape() != grad_out.shape()) throw ArgumentError("sigmoid_backward: shape mismatch");
    Tensor<T> grad(grad_out.shape());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const T p = probabilities[i];
        grad[i] = grad_out[i] * p * (T{1} - p);
    }
    return grad;
}

#define OVERSEG_INSTANTIATE_LAYERS(T)                                                                      \
    template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);             \
    template Conv2dGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, bool); \
    template PoolResult<T> maxpool2_forward(const Tensor<T>&);                                           \
    template Tensor<T> maxpool2_backward(const PoolIndices&, const Tensor<T>&);                          \
    template Tensor<T> upsample2_nearest_forward(const Tensor<T>&);                                      \
    template Tensor<T> upsample2_nearest_backward(const Tensor<T>&);                                     \
    template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);                              \
    template std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>&, int);                      \
    template Tensor<T> relu_forward(const Tensor<T>&);                                                   \
    template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                \
    template Tensor<T> sigmoid_forward(const Tensor<T>&);                                                \
    template Tensor<T> sigmoid_backward(const Tensor<T>&, const Tensor<T>&);                             \
    template T sigmoid(T) noexcept;

OVERSEG_INSTANTIATE_LAYERS(float)
OVERSEG_INSTANTIATE_LAYERS(double)

#undef OVERSEG_INSTANTIATE_LAYERS

}  // namespace overseg::nn
