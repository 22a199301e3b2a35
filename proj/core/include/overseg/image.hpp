#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace overseg {

inline constexpr int kGlyphSide = 28;

/// Row-major grayscale image, ink-positive: 1 is full ink, 0 is blank support.
class GrayImage {
public:
    GrayImage() = default;
    /// Blank (all-zero) image.
    GrayImage(int height, int width);
    /// Validates dimensions and that every value lies in [0,1].
    GrayImage(int height, int width, std::vector<float> pixels);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    float at(int y, int x) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    float& at(int y, int x) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<const float> pixels() const noexcept { return pixels_; }
    std::span<float> pixels() noexcept { return pixels_; }

    bool same_shape(const GrayImage& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<float> pixels_;
};

/// Row-major binary mask; every value is exactly 0 or 1.
class Mask {
public:
    Mask() = default;
    Mask(int height, int width);
    Mask(int height, int width, std::vector<std::uint8_t> bits);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return bits_.size(); }

    std::uint8_t at(int y, int x) const { return bits_[static_cast<std::size_t>(y) * width_ + x]; }
    void set(int y, int x, bool on) { bits_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0; }

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    std::size_t ink_count() const noexcept;
    bool empty_ink() const noexcept { return ink_count() == 0; }

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Ground-truth masks, one plane per class channel.
using MaskSet = std::vector<Mask>;

/// Inclusive pixel bounding box of a mask's ink. `empty` when there is none.
struct BoundingBox {
    int top = 0, left = 0, bottom = -1, right = -1;
    bool empty() const noexcept { return bottom < top || right < left; }
    bool intersects(const BoundingBox& other) const noexcept;
};

BoundingBox ink_bounds(const Mask& mask);

/// Bit is 1 exactly where pixel >= threshold. Throws ArgumentError unless
/// 0 < threshold < 1.
Mask binarize_mask(const GrayImage& image, double threshold);

/// Mask reinterpreted as an image with values {0,1}.
GrayImage mask_to_image(const Mask& mask);

}  // namespace overseg
