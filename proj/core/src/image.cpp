#include "overseg/image.hpp"

#include <algorithm>
#include <string>

#include "overseg/errors.hpp"

namespace overseg {

namespace {

void check_dims(int height, int width) {
    if (height < 1 || width < 1)
        throw ArgumentError("image dimensions must be positive, got " + std::to_string(height) + "x" +
                            std::to_string(width));
}

}  // namespace

GrayImage::GrayImage(int height, int width) : height_(height), width_(width) {
    check_dims(height, width);
    pixels_.assign(static_cast<std::size_t>(height) * width, 0.0f);
}

GrayImage::GrayImage(int height, int width, std::vector<float> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
    check_dims(height, width);
    if (pixels_.size() != static_cast<std::size_t>(height) * width)
        throw ArgumentError("pixel count does not match image dimensions");
    for (float p : pixels_)
        if (!(p >= 0.0f && p <= 1.0f)) throw ArgumentError("pixel value outside [0,1]");
}

Mask::Mask(int height, int width) : height_(height), width_(width) {
    check_dims(height, width);
    bits_.assign(static_cast<std::size_t>(height) * width, 0);
}

Mask::Mask(int height, int width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
    check_dims(height, width);
    if (bits_.size() != static_cast<std::size_t>(height) * width)
        throw ArgumentError("mask length does not match dimensions");
    for (auto b : bits_)
        if (b > 1) throw ArgumentError("mask value other than 0/1");
}

std::size_t Mask::ink_count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool BoundingBox::intersects(const BoundingBox& other) const noexcept {
    if (empty() || other.empty()) return false;
    return top <= other.bottom && other.top <= bottom && left <= other.right && other.left <= right;
}

BoundingBox ink_bounds(const Mask& mask) {
    BoundingBox box{mask.height(), mask.width(), -1, -1};
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(y, x)) {
                box.top = std::min(box.top, y);
                box.bottom = std::max(box.bottom, y);
                box.left = std::min(box.left, x);
                box.right = std::max(box.right, x);
            }
    if (box.bottom < 0) return BoundingBox{};
    return box;
}

Mask binarize_mask(const GrayImage& image, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ArgumentError("binarization threshold must lie in (0,1), got " + std::to_string(threshold));
    std::vector<std::uint8_t> bits(image.size());
    auto px = image.pixels();
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<double>(px[i]) >= threshold ? 1 : 0;
    return Mask(image.height(), image.width(), std::move(bits));
}

GrayImage mask_to_image(const Mask& mask) {
    std::vector<float> px(mask.bits().begin(), mask.bits().end());
    return GrayImage(mask.height(), mask.width(), std::move(px));
}

}  // namespace overseg
