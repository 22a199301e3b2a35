#include "overseg/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "byte_io.hpp"
#include "overseg/errors.hpp"

namespace overseg {

namespace {

constexpr std::uint8_t kFlagPackedMasks = 0x01;

std::size_t packed_mask_bytes(int height, int width) {
    return (static_cast<std::size_t>(height) * width + 7) / 8;
}

std::uint8_t pixel_byte(float p) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(static_cast<double>(p), 0.0, 1.0) * 255.0));
}

float byte_pixel(std::uint8_t b) { return static_cast<float>(b) / 255.0f; }

std::uint16_t fixed16(double v) {
    return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

double unfixed16(std::uint16_t v) { return static_cast<double>(v) / 65535.0; }

}  // namespace

std::size_t dataset_file_size(std::size_t n_samples, int height, int width, int n_classes) {
    const std::size_t per_sample = kSampleMetaBytes + static_cast<std::size_t>(height) * width +
                                   static_cast<std::size_t>(n_classes) * packed_mask_bytes(height, width);
    return kDatasetHeaderBytes + n_samples * per_sample;
}

std::size_t write_dataset(const Dataset& dataset, std::ostream& sink) {
    const auto& cfg = dataset.config;
    const int n_classes = cfg.n_classes();
    if (n_classes < 1 || n_classes >= kAbsentClass) throw ArgumentError("unsupported class count");
    if (dataset.samples.size() > 0xFFFFFFFFull) throw ArgumentError("too many samples for OVLS");
    if (cfg.height > 0xFFFF || cfg.width > 0xFFFF) throw ArgumentError("canvas too large for OVLS");

    detail::LeWriter out(sink);
    out.bytes(kDatasetMagic, 4);
    out.u16(kDatasetVersion);
    out.u32(static_cast<std::uint32_t>(dataset.samples.size()));
    out.u16(static_cast<std::uint16_t>(cfg.height));
    out.u16(static_cast<std::uint16_t>(cfg.width));
    out.u8(static_cast<std::uint8_t>(n_classes));
    out.u8(kFlagPackedMasks);
    out.u64(dataset.global_seed);
    out.u16(0);

    const std::size_t n_pixels = static_cast<std::size_t>(cfg.height) * cfg.width;
    std::vector<std::uint8_t> buffer(n_pixels);
    std::vector<std::uint8_t> packed(packed_mask_bytes(cfg.height, cfg.width));
    for (const Sample& s : dataset.samples) {
        if (s.input.height() != cfg.height || s.input.width() != cfg.width ||
            s.masks.size() != static_cast<std::size_t>(n_classes))
            throw ArgumentError("sample shape does not match dataset config");
        out.u8(s.class_a);
        out.u8(s.class_b ? *s.class_b : kAbsentClass);
        out.u16(fixed16(s.contrast));
        out.u16(fixed16(s.noise_sigma));
        out.u64(s.sample_seed);
        auto px = s.input.pixels();
        std::transform(px.begin(), px.end(), buffer.begin(), pixel_byte);
        out.bytes(buffer.data(), buffer.size());
        for (const Mask& m : s.masks) {
            if (m.height() != cfg.height || m.width() != cfg.width) throw ArgumentError("mask shape mismatch");
            std::fill(packed.begin(), packed.end(), 0);
            auto bits = m.bits();
            for (std::size_t i = 0; i < n_pixels; ++i)
                if (bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
            out.bytes(packed.data(), packed.size());
        }
    }
    return out.written();
}

Dataset read_dataset(std::istream& source) {
    detail::LeReader in(source, "OVLS");
    char magic[4];
    in.bytes(magic, 4, "magic");
    if (!std::equal(magic, magic + 4, kDatasetMagic)) in.fail("bad magic", 0);
    const auto version = in.u16("version");
    if (version != kDatasetVersion) in.fail("unsupported version " + std::to_string(version), 4);
    const auto n_samples = in.u32("sample count");
    const auto height = in.u16("height");
    const auto width = in.u16("width");
    if (height == 0 || width == 0) in.fail("zero canvas dimension", 10);
    const auto n_classes = in.u8("class count");
    if (n_classes == 0 || n_classes == kAbsentClass) in.fail("invalid class count", 14);
    const auto flags = in.u8("flags");
    if (flags != kFlagPackedMasks) in.fail("unsupported flags", 15);
    const auto global_seed = in.u64("global seed");
    if (in.u16("reserved") != 0) in.fail("reserved bytes are not zero", 24);

    Dataset dataset;
    dataset.global_seed = global_seed;
    dataset.config.height = height;
    dataset.config.width = width;
    dataset.config.class_set.resize(n_classes);
    std::iota(dataset.config.class_set.begin(), dataset.config.class_set.end(), 0);

    const std::size_t n_pixels = static_cast<std::size_t>(height) * width;
    std::vector<std::uint8_t> buffer(n_pixels);
    std::vector<std::uint8_t> packed(packed_mask_bytes(height, width));
    dataset.samples.reserve(std::min<std::size_t>(n_samples, 1u << 20));
    for (std::uint32_t i = 0; i < n_samples; ++i) {
        Sample s;
        const auto meta_at = in.offset();
        s.class_a = in.u8("class_a");
        const auto class_b = in.u8("class_b");
        if (s.class_a >= n_classes) in.fail("class_a out of range", meta_at);
        if (class_b != kAbsentClass) {
            if (class_b >= n_classes || class_b == s.class_a) in.fail("invalid class_b", meta_at + 1);
            s.class_b = class_b;
        }
        s.contrast = unfixed16(in.u16("contrast"));
        s.noise_sigma = unfixed16(in.u16("noise_sigma"));
        s.sample_seed = in.u64("sample_seed");

        in.bytes(buffer.data(), buffer.size(), "input image");
        std::vector<float> px(n_pixels);
        std::transform(buffer.begin(), buffer.end(), px.begin(), byte_pixel);
        s.input = GrayImage(height, width, std::move(px));

        s.masks.reserve(n_classes);
        for (int c = 0; c < n_classes; ++c) {
            const auto mask_at = in.offset();
            in.bytes(packed.data(), packed.size(), "mask");
            std::vector<std::uint8_t> bits(n_pixels);
            for (std::size_t p = 0; p < n_pixels; ++p) bits[p] = (packed[p / 8] >> (7 - p % 8)) & 1u;
            for (std::size_t p = n_pixels; p < packed.size() * 8; ++p)
                if ((packed[p / 8] >> (7 - p % 8)) & 1u) in.fail("nonzero mask padding", mask_at + p / 8);
            s.masks.emplace_back(height, width, std::move(bits));
        }
        if (i == 0) dataset.config.noise_sigma = s.noise_sigma;
        dataset.samples.push_back(std::move(s));
    }
    if (!in.at_end()) in.fail("trailing bytes after last sample", in.offset());
    return dataset;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_dataset(dataset, out);
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_dataset(in);
}

Dataset quantize(const Dataset& dataset) {
    Dataset out = dataset;
    for (Sample& s : out.samples) {
        for (float& p : s.input.pixels()) p = byte_pixel(pixel_byte(p));
        s.contrast = unfixed16(fixed16(s.contrast));
        s.noise_sigma = unfixed16(fixed16(s.noise_sigma));
    }
    out.config.noise_sigma = unfixed16(fixed16(out.config.noise_sigma));
    return out;
}

}  // namespace overseg
