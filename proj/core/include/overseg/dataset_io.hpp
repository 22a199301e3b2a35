#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>

#include "overseg/synth.hpp"

namespace overseg {

// OVLS layout, little-endian.
//   header (26 bytes): "OVLS", u16 version=1, u32 n_samples, u16 height,
//     u16 width, u8 n_classes, u8 flags (bit0 = packed masks), u64 global_seed,
//     2 reserved zero bytes
//   per sample: u8 class_a, u8 class_b (0xFF = none), u16 contrast,
//     u16 noise_sigma (both round(x * 65535)), u64 sample_seed,
//     height*width input bytes (round(p * 255)),
//     n_classes masks of ceil(height*width / 8) bytes, row-major, MSB first.
inline constexpr char kDatasetMagic[4] = {'O', 'V', 'L', 'S'};
inline constexpr std::uint16_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 26;
inline constexpr std::size_t kSampleMetaBytes = 14;
inline constexpr std::uint8_t kAbsentClass = 0xFF;

std::size_t dataset_file_size(std::size_t n_samples, int height, int width, int n_classes);

/// Returns bytes written.
std::size_t write_dataset(const Dataset& dataset, std::ostream& sink);
/// Throws FormatError carrying the byte offset of the first bad field.
Dataset read_dataset(std::istream& source);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// The dataset as it will look after a write/read cycle: pixels rounded to
/// 1/255, contrast and noise_sigma to 1/65535.
Dataset quantize(const Dataset& dataset);

}  // namespace overseg
