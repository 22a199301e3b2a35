#pragma once

#include <cstdint>

#include "overseg/nn/unet.hpp"

namespace overseg {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
    nn::ParamSet<T> first_moment;
    nn::ParamSet<T> second_moment;
    std::int64_t step = 0;

    static AdamState zeros_like(const nn::ParamSet<T>& params) {
        return {params.zeros_like(), params.zeros_like(), 0};
    }
};

/// One bias-corrected Adam update. Throws NumericError on a non-finite
/// gradient before touching any parameter.
template <typename T>
void adam_step(nn::ParamSet<T>& params, const nn::ParamSet<T>& grads, AdamState<T>& state,
               const AdamConfig& config);

}  // namespace overseg
