#include "cli_config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "overseg/errors.hpp"

namespace overseg::cli {

std::vector<int> parse_class_letters(const std::string& letters) {
    if (letters.empty()) throw ArgumentError("class set is empty");
    std::vector<int> out;
    std::set<int> seen;
    for (char ch : letters) {
        if (ch < 'A' || ch > 'Z') throw ArgumentError(std::string("class letters must be A-Z, got '") + ch + "'");
        if (!seen.insert(ch - 'A').second) throw ArgumentError(std::string("duplicate class letter '") + ch + "'");
        out.push_back(ch - 'A');
    }
    return out;
}

namespace {

using nlohmann::json;

// Reads the keys of one section, rejecting anything not listed.
class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (!doc.is_object()) throw ArgumentError("config section '" + name_ + "' must be an object");
        for (const auto& [key, value] : doc.items()) pending_.emplace(key, value);
    }

    template <typename T>
    void read(const char* key, T& target) {
        auto it = pending_.find(key);
        if (it == pending_.end()) return;
        try {
            target = it->second.get<T>();
        } catch (const json::exception&) {
            throw ArgumentError("config key " + name_ + "." + key + " has the wrong type");
        }
        pending_.erase(it);
    }

    void finish() const {
        if (!pending_.empty())
            throw ArgumentError("unknown config key " + name_ + "." + pending_.begin()->first);
    }

private:
    std::string name_;
    std::map<std::string, json> pending_;
};

}  // namespace

void apply_json(CliConfig& c, const json& doc) {
    if (!doc.is_object()) throw ArgumentError("config file must hold a JSON object");
    for (const auto& [name, body] : doc.items()) {
        Section s(body, name);
        if (name == "corpus") {
            s.read("classes", c.corpus.classes);
            s.read("split_seed", c.corpus.split_seed);
            s.read("split_fractions", c.corpus.split_fractions);
        } else if (name == "synth") {
            s.read("p_single", c.synth.p_single);
            s.read("offset_max", c.synth.offset_max);
            s.read("contrast_min", c.synth.contrast_min);
            s.read("contrast_max", c.synth.contrast_max);
            s.read("noise_sigma", c.synth.noise_sigma);
            s.read("mask_threshold", c.synth.mask_threshold);
            s.read("min_ink_pixels", c.synth.min_ink_pixels);
        } else if (name == "unet") {
            s.read("base_filters", c.unet.base_filters);
            s.read("depth", c.unet.depth);
            s.read("kernel_size", c.unet.kernel_size);
        } else if (name == "train") {
            s.read("epochs", c.train.epochs);
            s.read("batch_size", c.train.batch_size);
            s.read("learning_rate", c.train.learning_rate);
            s.read("beta1", c.train.beta1);
            s.read("beta2", c.train.beta2);
            s.read("epsilon", c.train.epsilon);
            s.read("shuffle_seed", c.train.shuffle_seed);
            s.read("init_seed", c.init_seed);
            s.read("metric_threshold", c.train.metric_threshold);
        } else if (name == "eval") {
            s.read("detect_threshold", c.eval.detect_threshold);
            s.read("noise_threshold", c.eval.noise_threshold);
            s.read("histogram_bins", c.eval.histogram_bins);
            s.read("render_scale", c.eval.render_scale);
            s.read("metric_threshold", c.eval.metric_threshold);
        } else {
            throw ArgumentError("unknown config section '" + name + "'");
        }
        s.finish();
    }
}

void apply_file(CliConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("config file " + path.string() + " is not valid JSON: " + e.what(), e.byte);
    }
    apply_json(config, doc);
}

nlohmann::ordered_json to_json(const CliConfig& c) {
    nlohmann::ordered_json j;
    j["corpus"] = {{"classes", c.corpus.classes},
                   {"split_seed", c.corpus.split_seed},
                   {"split_fractions", c.corpus.split_fractions}};
    j["synth"] = {{"p_single", c.synth.p_single},
                  {"offset_max", c.synth.offset_max},
                  {"contrast_min", c.synth.contrast_min},
                  {"contrast_max", c.synth.contrast_max},
                  {"noise_sigma", c.synth.noise_sigma},
                  {"mask_threshold", c.synth.mask_threshold},
                  {"min_ink_pixels", c.synth.min_ink_pixels}};
    j["unet"] = {{"base_filters", c.unet.base_filters}, {"depth", c.unet.depth}, {"kernel_size", c.unet.kernel_size}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"learning_rate", c.train.learning_rate},
                  {"beta1", c.train.beta1},
                  {"beta2", c.train.beta2},
                  {"epsilon", c.train.epsilon},
                  {"shuffle_seed", c.train.shuffle_seed},
                  {"init_seed", c.init_seed},
                  {"metric_threshold", c.train.metric_threshold}};
    j["eval"] = {{"detect_threshold", c.eval.detect_threshold},
                 {"noise_threshold", c.eval.noise_threshold},
                 {"histogram_bins", c.eval.histogram_bins},
                 {"render_scale", c.eval.render_scale},
                 {"metric_threshold", c.eval.metric_threshold}};
    return j;
}

void finalize(CliConfig& config) {
    config.synth.class_set = parse_class_letters(config.corpus.classes);
    config.synth.validate();
    config.train.validate();
    config.eval.validate();
    nn::UNetConfig probe;
    probe.base_filters = config.unet.base_filters;
    probe.depth = config.unet.depth;
    probe.kernel_size = config.unet.kernel_size;
    probe.n_classes = config.synth.n_classes();
    probe.validate();
    double total = 0;
    for (double f : config.corpus.split_fractions) {
        if (!(f >= 0.0)) throw ArgumentError("split fractions must be non-negative");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("split fractions must sum to 1");
}

}  // namespace overseg::cli
