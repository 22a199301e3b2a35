#include "overseg/metrics.hpp"

#include "overseg/errors.hpp"

namespace overseg {

PixelCounts count_pixels(std::span<const float> probabilities, const MaskSet& targets, double threshold) {
    std::size_t expected = 0;
    for (const Mask& m : targets) expected += m.size();
    if (probabilities.size() != expected) throw ArgumentError("count_pixels: prediction size does not match masks");
    PixelCounts counts;
    std::size_t i = 0;
    for (const Mask& m : targets)
        for (std::uint8_t truth : m.bits()) {
            const bool predicted = static_cast<double>(probabilities[i++]) >= threshold;
            if (predicted)
                truth ? ++counts.tp : ++counts.fp;
            else
                truth ? ++counts.fn : ++counts.tn;
        }
    return counts;
}

MetricsReport finalize_metrics(const PixelCounts& counts, double mean_loss) {
    MetricsReport r;
    r.counts = counts;
    r.loss = mean_loss;
    const auto total = counts.total();
    r.accuracy = total ? static_cast<double>(counts.tp + counts.tn) / static_cast<double>(total) : 0.0;
    r.precision_defined = counts.tp + counts.fp > 0;
    r.recall_defined = counts.tp + counts.fn > 0;
    r.precision = r.precision_defined ? static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp) : 0.0;
    r.recall = r.recall_defined ? static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn) : 0.0;
    return r;
}

double background_fraction(const Dataset& dataset) {
    std::uint64_t zero = 0, total = 0;
    for (const Sample& s : dataset.samples)
        for (const Mask& m : s.masks) {
            total += m.size();
            zero += m.size() - m.ink_count();
        }
    return total ? static_cast<double>(zero) / static_cast<double>(total) : 0.0;
}

}  // namespace overseg
