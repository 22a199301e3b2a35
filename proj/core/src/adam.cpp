#include "overseg/adam.hpp"

#include <cmath>

#include "overseg/errors.hpp"

namespace overseg {

template <typename T>
void adam_step(nn::ParamSet<T>& params, const nn::ParamSet<T>& grads, AdamState<T>& state,
               const AdamConfig& config) {
    if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
        state.second_moment.size() != params.size())
        throw ArgumentError("adam_step: parameter, gradient, and state sets are not aligned");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].shape() != params[i].shape() || state.first_moment[i].shape() != params[i].shape() ||
            state.second_moment[i].shape() != params[i].shape())
            throw ArgumentError("adam_step: shape mismatch for " + params.tensors[i].name);
        if (!grads[i].all_finite()) throw NumericError("adam_step: non-finite gradient for " + params.tensors[i].name);
    }

    ++state.step;
    const double b1 = config.beta1, b2 = config.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto theta = params[i].data();
        auto g = grads[i].data();
        auto m = state.first_moment[i].data();
        auto v = state.second_moment[i].data();
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double gj = g[j];
            const double mj = b1 * m[j] + (1.0 - b1) * gj;
            const double vj = b2 * v[j] + (1.0 - b2) * gj * gj;
            m[j] = static_cast<T>(mj);
            v[j] = static_cast<T>(vj);
            const double m_hat = mj / correction1;
            const double v_hat = vj / correction2;
            theta[j] = static_cast<T>(theta[j] - config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon));
        }
    }
}

template void adam_step(nn::ParamSet<float>&, const nn::ParamSet<float>&, AdamState<float>&, const AdamConfig&);
template void adam_step(nn::ParamSet<double>&, const nn::ParamSet<double>&, AdamState<double>&, const AdamConfig&);

}  // namespace overseg
