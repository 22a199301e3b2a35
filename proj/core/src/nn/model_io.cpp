#include "overseg/nn/model_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "../byte_io.hpp"
#include "overseg/errors.hpp"

namespace overseg::nn {

namespace {

constexpr const char* kConfigKeys[] = {"in_channels", "n_classes", "base_filters", "depth",
                                       "kernel_size", "height",    "width"};

int* config_field(UNetConfig& c, const std::string& key) {
    if (key == "in_channels") return &c.in_channels;
    if (key == "n_classes") return &c.n_classes;
    if (key == "base_filters") return &c.base_filters;
    if (key == "depth") return &c.depth;
    if (key == "kernel_size") return &c.kernel_size;
    if (key == "height") return &c.height;
    if (key == "width") return &c.width;
    return nullptr;
}

}  // namespace

std::string config_json(const UNetConfig& config) {
    nlohmann::ordered_json j;
    UNetConfig copy = config;
    for (const char* key : kConfigKeys) j[key] = *config_field(copy, key);
    return j.dump();
}

std::size_t save_model(const UNetParams& params, const UNetConfig& config, std::ostream& sink) {
    check_params(params, config);
    detail::LeWriter out(sink);
    out.bytes(kModelMagic, 4);
    out.u16(kModelVersion);
    const std::string json = config_json(config);
    out.u32(static_cast<std::uint32_t>(json.size()));
    out.bytes(json.data(), json.size());
    out.u16(static_cast<std::uint16_t>(params.size()));
    for (const auto& t : params.tensors) {
        out.u16(static_cast<std::uint16_t>(t.name.size()));
        out.bytes(t.name.data(), t.name.size());
        out.u8(static_cast<std::uint8_t>(t.value.rank()));
        for (int d : t.value.shape()) out.u32(static_cast<std::uint32_t>(d));
        for (float v : t.value.data()) out.f32(v);
    }
    return out.written();
}

Model load_model(std::istream& source) {
    detail::LeReader in(source, "UNET");
    char magic[4];
    in.bytes(magic, 4, "magic");
    if (!std::equal(magic, magic + 4, kModelMagic)) in.fail("bad magic", 0);
    const auto version = in.u16("version");
    if (version != kModelVersion) in.fail("unsupported version " + std::to_string(version), 4);

    const auto json_at = in.offset();
    const auto json_len = in.u32("config length");
    if (json_len > (1u << 20)) in.fail("implausible config length", json_at);
    std::string json(json_len, '\0');
    in.bytes(json.data(), json.size(), "config");

    Model model;
    try {
        const auto j = nlohmann::json::parse(json);
        if (!j.is_object()) in.fail("config is not a JSON object", json_at + 4);
        for (const char* key : kConfigKeys)
            if (!j.contains(key)) in.fail(std::string("config lacks key ") + key, json_at + 4);
        for (const auto& [key, value] : j.items()) {
            int* field = config_field(model.config, key);
            if (!field) in.fail("unknown config key " + key, json_at + 4);
            if (!value.is_number_integer()) in.fail("config key " + key + " is not an integer", json_at + 4);
            *field = value.get<int>();
        }
        model.config.validate();
    } catch (const nlohmann::json::exception& e) {
        in.fail(std::string("config JSON: ") + e.what(), json_at + 4);
    } catch (const ArgumentError& e) {
        in.fail(std::string("config: ") + e.what(), json_at + 4);
    }

    const auto specs = param_layout(model.config);
    const auto count_at = in.offset();
    const auto count = in.u16("tensor count");
    if (count != specs.size())
        in.fail("tensor count " + std::to_string(count) + " does not match config (" + std::to_string(specs.size()) +
                    ")",
                count_at);
    for (const auto& spec : specs) {
        const auto name_at = in.offset();
        std::string name(in.u16("name length"), '\0');
        in.bytes(name.data(), name.size(), "tensor name");
        if (name != spec.name) in.fail("expected tensor " + spec.name + ", found " + name, name_at);
        const auto dims_at = in.offset();
        const auto ndims = in.u8("ndims");
        std::vector<int> shape(ndims);
        for (int& d : shape) d = static_cast<int>(in.u32("dim"));
        if (shape != spec.shape) in.fail("tensor " + name + " has the wrong shape", dims_at);
        Tensor<float> value(shape);
        for (float& v : value.data()) v = in.f32("tensor data");
        model.params.tensors.push_back({std::move(name), std::move(value)});
    }
    if (!in.at_end()) in.fail("trailing bytes after last tensor", in.offset());
    return model;
}

void save_model_file(const UNetParams& params, const UNetConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    save_model(params, config, out);
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

Model load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load_model(in);
}

}  // namespace overseg::nn
