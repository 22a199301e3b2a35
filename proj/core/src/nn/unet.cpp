#include "overseg/nn/unet.hpp"

#include <cmath>
#include <set>
#include <string>

#include "overseg/errors.hpp"
#include "overseg/rng.hpp"

namespace overseg::nn {

void UNetConfig::validate() const {
    if (in_channels < 1) throw ArgumentError("in_channels must be >= 1");
    if (n_classes < 1) throw ArgumentError("n_classes must be >= 1");
    if (base_filters < 1) throw ArgumentError("base_filters must be >= 1");
    if (depth < 0 || depth > 8) throw ArgumentError("depth must lie in [0,8]");
    if (kernel_size < 1 || kernel_size % 2 == 0) throw ArgumentError("kernel_size must be odd");
    if (height < 1 || width < 1) throw ArgumentError("input dims must be positive");
    const int step = 1 << depth;
    if (height % step || width % step)
        throw ArgumentError("input " + std::to_string(height) + "x" + std::to_string(width) +
                            " is not divisible by 2^depth = " + std::to_string(step));
}

template <typename T>
const Tensor<T>& ParamSet<T>::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return t.value;
    throw ArgumentError("no parameter named " + name);
}

template <typename T>
void ParamSet<T>::accumulate(const ParamSet& other) {
    if (other.size() != size()) throw ArgumentError("parameter sets differ in length");
    for (std::size_t i = 0; i < size(); ++i) {
        auto& dst = tensors[i].value;
        const auto& src = other.tensors[i].value;
        if (dst.shape() != src.shape()) throw ArgumentError("parameter " + tensors[i].name + " shape mismatch");
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
}

template <typename T>
void ParamSet<T>::scale(T factor) {
    for (auto& t : tensors)
        for (T& v : t.value.data()) v *= factor;
}

template <typename T>
bool ParamSet<T>::all_finite() const noexcept {
    for (const auto& t : tensors)
        if (!t.value.all_finite()) return false;
    return true;
}

namespace {

struct ConvSpec {
    std::string name;
    int in, out, k;
    bool relu;
};

// Canonical conv order; forward and backward both walk this list.
std::vector<ConvSpec> conv_plan(const UNetConfig& c) {
    std::vector<ConvSpec> plan;
    const int k = c.kernel_size;
    int in = c.in_channels;
    for (int l = 0; l < c.depth; ++l) {
        const std::string p = "enc" + std::to_string(l);
        plan.push_back({p + ".conv0", in, c.channels_at(l), k, true});
        plan.push_back({p + ".conv1", c.channels_at(l), c.channels_at(l), k, true});
        in = c.channels_at(l);
    }
    plan.push_back({"bottleneck.conv0", in, c.channels_at(c.depth), k, true});
    plan.push_back({"bottleneck.conv1", c.channels_at(c.depth), c.channels_at(c.depth), k, true});
    for (int l = c.depth - 1; l >= 0; --l) {
        const std::string p = "dec" + std::to_string(l);
        plan.push_back({p + ".up_conv", c.channels_at(l + 1), c.channels_at(l), k, true});
        plan.push_back({p + ".merge_conv", 2 * c.channels_at(l), c.channels_at(l), k, true});
    }
    plan.push_back({"head", c.channels_at(0), c.n_classes, 1, false});
    return plan;
}

template <typename T>
void check_finite(const Tensor<T>& t, const std::string& layer) {
    if (!t.all_finite()) throw NumericError("non-finite activation in layer " + layer);
}

}  // namespace

std::vector<ParamSpec> param_layout(const UNetConfig& config) {
    config.validate();
    std::vector<ParamSpec> specs;
    for (const auto& conv : conv_plan(config)) {
        specs.push_back({conv.name + ".weight", {conv.out, conv.in, conv.k, conv.k}});
        specs.push_back({conv.name + ".bias", {conv.out}});
    }
    return specs;
}

UNetParams init_params(const UNetConfig& config, std::uint64_t seed) {
    UNetParams params;
    const auto specs = param_layout(config);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        Tensor<float> value(specs[i].shape);
        if (specs[i].shape.size() == 4) {
            const int fan_in = specs[i].shape[1] * specs[i].shape[2] * specs[i].shape[3];
            const double stddev = std::sqrt(2.0 / fan_in);
            Xoshiro256 rng(derive_seed(seed, i));
            for (float& v : value.data()) v = static_cast<float>(stddev * rng.normal());
        }
        params.tensors.push_back({specs[i].name, std::move(value)});
    }
    return params;
}

template <typename T>
void check_params(const ParamSet<T>& params, const UNetConfig& config) {
    const auto specs = param_layout(config);
    if (params.size() != specs.size())
        throw ArgumentError("expected " + std::to_string(specs.size()) + " parameter tensors, got " +
                            std::to_string(params.size()));
    for (std::size_t i = 0; i < specs.size(); ++i)
        if (params.tensors[i].name != specs[i].name || params.tensors[i].value.shape() != specs[i].shape)
            throw ArgumentError("parameter " + std::to_string(i) + " (" + params.tensors[i].name +
                                ") does not match layout entry " + specs[i].name);
}

template <typename T>
Tensor<T> image_tensor(const GrayImage& image) {
    auto px = image.pixels();
    return Tensor<T>({1, image.height(), image.width()}, std::vector<T>(px.begin(), px.end()));
}

template <typename T>
Tensor<T> unet_forward(const ParamSet<T>& params, const UNetConfig& config, const Tensor<T>& input,
                       UNetCache<T>* cache) {
    const auto plan = conv_plan(config);
    if (params.size() != 2 * plan.size()) check_params(params, config);
    if (input.shape() != std::vector<int>{config.in_channels, config.height, config.width})
        throw ArgumentError("unet input " + input.shape_string() + " does not match config");

    UNetCache<T> local;
    UNetCache<T>& c = cache ? *cache : local;
    c.conv_inputs.clear();
    c.activations.clear();
    c.pools.clear();

    std::size_t next = 0;
    auto conv = [&](const Tensor<T>& x) {
        const ConvSpec& spec = plan[next];
        Tensor<T> y = conv2d_forward(x, params[2 * next], params[2 * next + 1]);
        ++next;
        if (spec.relu) y = relu_forward(y);
        check_finite(y, spec.name);
        if (cache) {
            c.conv_inputs.push_back(x);
            if (spec.relu) c.activations.push_back(y);
        }
        return y;
    };

    std::vector<Tensor<T>> skips;
    Tensor<T> x = input;
    for (int l = 0; l < config.depth; ++l) {
        x = conv(conv(x));
        skips.push_back(x);
        auto pooled = maxpool2_forward(x);
        x = std::move(pooled.output);
        if (cache) c.pools.push_back(std::move(pooled.indices));
    }
    x = conv(conv(x));
    for (int l = config.depth - 1; l >= 0; --l) {
        x = conv(upsample2_nearest_forward(x));
        x = conv(concat_channels(x, skips[static_cast<std::size_t>(l)]));
    }
    Tensor<T> probabilities = sigmoid_forward(conv(x));
    if (cache) c.probabilities = probabilities;
    return probabilities;
}

template <typename T>
ParamSet<T> unet_backward(const ParamSet<T>& params, const UNetConfig& config, const UNetCache<T>& cache,
                          const Tensor<T>& grad_probabilities) {
    const auto plan = conv_plan(config);
    if (cache.conv_inputs.size() != plan.size() || cache.activations.size() != plan.size() - 1 ||
        cache.pools.size() != static_cast<std::size_t>(config.depth))
        throw ArgumentError("unet_backward: cache does not come from a forward pass with this config");
    if (grad_probabilities.shape() != cache.probabilities.shape())
        throw ArgumentError("unet_backward: gradient shape " + grad_probabilities.shape_string() +
                            " does not match output " + cache.probabilities.shape_string());

    ParamSet<T> grads = params.zeros_like();
    std::size_t next = plan.size();
    // Walks the conv plan in reverse; returns d loss / d conv input.
    auto conv_back = [&](Tensor<T> g, bool want_input = true) {
        --next;
        if (plan[next].relu) g = relu_backward(cache.activations[next], g);
        auto r = conv2d_backward(cache.conv_inputs[next], params[2 * next], g, want_input);
        grads[2 * next] = std::move(r.kernel);
        grads[2 * next + 1] = std::move(r.bias);
        return std::move(r.input);
    };

    Tensor<T> g = conv_back(sigmoid_backward(cache.probabilities, grad_probabilities));
    std::vector<Tensor<T>> skip_grads(static_cast<std::size_t>(config.depth));
    for (int l = 0; l < config.depth; ++l) {
        auto [g_up, g_skip] = split_channels(conv_back(std::move(g)), config.channels_at(l));
        skip_grads[static_cast<std::size_t>(l)] = std::move(g_skip);
        g = upsample2_nearest_backward(conv_back(std::move(g_up)));
    }
    g = conv_back(conv_back(std::move(g)));
    for (int l = config.depth - 1; l >= 0; --l) {
        g = maxpool2_backward(cache.pools[static_cast<std::size_t>(l)], g);
        const auto& skip = skip_grads[static_cast<std::size_t>(l)];
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += skip[i];
        g = conv_back(std::move(g));
        g = conv_back(std::move(g), l > 0);
    }
    return grads;
}

template struct ParamSet<float>;
template struct ParamSet<double>;

#define OVERSEG_INSTANTIATE_UNET(T)                                                                          \
    template void check_params(const ParamSet<T>&, const UNetConfig&);                                       \
    template Tensor<T> image_tensor(const GrayImage&);                                                       \
    template Tensor<T> unet_forward(const ParamSet<T>&, const UNetConfig&, const Tensor<T>&, UNetCache<T>*); \
    template ParamSet<T> unet_backward(const ParamSet<T>&, const UNetConfig&, const UNetCache<T>&,           \
                                       const Tensor<T>&);

OVERSEG_INSTANTIATE_UNET(float)
OVERSEG_INSTANTIATE_UNET(double)

#undef OVERSEG_INSTANTIATE_UNET

}  // namespace overseg::nn
