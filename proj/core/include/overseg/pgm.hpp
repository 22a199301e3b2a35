#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

#include "overseg/image.hpp"

namespace overseg {

/// 8-bit display image (PGM maxval 255).
struct Gray8Image {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    friend bool operator==(const Gray8Image&, const Gray8Image&) = default;
};

void write_pgm(const Gray8Image& image, std::ostream& sink);
void write_pgm_file(const Gray8Image& image, const std::filesystem::path& path);
/// Binary P5 with maxval 255 only; '#' comments in the header are skipped.
Gray8Image read_pgm(std::istream& source);
Gray8Image read_pgm_file(const std::filesystem::path& path);

/// Ink-positive [0,1] image to dark-on-light display bytes: 255 - round(255 p).
Gray8Image to_display(const GrayImage& image);
/// Display bytes back to an ink-positive image.
GrayImage from_display(const Gray8Image& image);

}  // namespace overseg
