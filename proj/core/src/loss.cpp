#include "overseg/loss.hpp"

#include <cmath>

#include "overseg/errors.hpp"

namespace overseg {

template <typename T>
BceResult<T> bce_loss(const nn::Tensor<T>& probabilities, const nn::Tensor<T>& targets) {
    if (probabilities.shape() != targets.shape())
        throw ArgumentError("bce_loss: probabilities " + probabilities.shape_string() + " vs targets " +
                            targets.shape_string());
    if (probabilities.empty()) throw ArgumentError("bce_loss: empty input");
    const double n = static_cast<double>(probabilities.size());
    BceResult<T> r{0.0, nn::Tensor<T>(probabilities.shape())};
    double sum = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = probabilities[i];
        const double t = targets[i];
        const double on = p + kBceEpsilon;
        const double off = 1.0 - p + kBceEpsilon;
        sum += t * std::log(on) + (1.0 - t) * std::log(off);
        r.grad[i] = static_cast<T>(-(t / on - (1.0 - t) / off) / n);
    }
    r.loss = -sum / n;
    return r;
}

template <typename T>
nn::Tensor<T> mask_tensor(const MaskSet& masks) {
    if (masks.empty()) throw ArgumentError("mask_tensor: empty mask set");
    const int h = masks.front().height(), w = masks.front().width();
    std::vector<T> data;
    data.reserve(masks.size() * masks.front().size());
    for (const Mask& m : masks) {
        if (m.height() != h || m.width() != w) throw ArgumentError("mask_tensor: masks differ in shape");
        data.insert(data.end(), m.bits().begin(), m.bits().end());
    }
    return nn::Tensor<T>({static_cast<int>(masks.size()), h, w}, std::move(data));
}

template BceResult<float> bce_loss(const nn::Tensor<float>&, const nn::Tensor<float>&);
template BceResult<double> bce_loss(const nn::Tensor<double>&, const nn::Tensor<double>&);
template nn::Tensor<float> mask_tensor(const MaskSet&);
template nn::Tensor<double> mask_tensor(const MaskSet&);

}  // namespace overseg
