#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "overseg/nn/unet.hpp"

namespace overseg::nn {

// UNET layout, little-endian: "UNET", u16 version=1, u32 length + UTF-8 JSON
// config {in_channels, n_classes, base_filters, depth, kernel_size, height,
// width}, u16 tensor count, then per tensor: u16 name length, name, u8 ndims,
// u32 dims, raw f32 values.
inline constexpr char kModelMagic[4] = {'U', 'N', 'E', 'T'};
inline constexpr std::uint16_t kModelVersion = 1;

struct Model {
    UNetConfig config;
    UNetParams params;
};

std::size_t save_model(const UNetParams& params, const UNetConfig& config, std::ostream& sink);
/// Throws FormatError at the offending byte offset on bad magic, version,
/// config, or tensor shapes that disagree with the config.
Model load_model(std::istream& source);

void save_model_file(const UNetParams& params, const UNetConfig& config, const std::filesystem::path& path);
Model load_model_file(const std::filesystem::path& path);

std::string config_json(const UNetConfig& config);

}  // namespace overseg::nn
