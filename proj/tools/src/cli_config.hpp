#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "overseg/corpus.hpp"
#include "overseg/eval.hpp"
#include "overseg/nn/unet.hpp"
#include "overseg/synth.hpp"
#include "overseg/trainer.hpp"

namespace overseg::cli {

struct CorpusSection {
    std::string classes = "ABCDE";
    std::uint64_t split_seed = 0;
    SplitFractions split_fractions = kDefaultSplitFractions;
};

struct UNetSection {
    int base_filters = 16;
    int depth = 2;
    int kernel_size = 3;
};

/// Everything a subcommand can be configured with. Defaults are the module
/// defaults; a JSON file overrides them and command-line flags override both.
struct CliConfig {
    CorpusSection corpus;
    SynthConfig synth;
    UNetSection unet;
    TrainConfig train;
    std::uint64_t init_seed = 0;
    EvalConfig eval;
};

/// "ABCDE" -> {0,1,2,3,4}. Throws ArgumentError on anything but distinct A-Z.
std::vector<int> parse_class_letters(const std::string& letters);

/// Applies a JSON object on top of `config`. Unknown sections or keys and
/// mistyped values throw ArgumentError naming the offending key.
void apply_json(CliConfig& config, const nlohmann::json& doc);

/// Reads and applies a config file: IoError if unreadable, FormatError if it
/// is not JSON.
void apply_file(CliConfig& config, const std::filesystem::path& path);

nlohmann::ordered_json to_json(const CliConfig& config);

/// Validates every section and derives synth.class_set from corpus.classes.
void finalize(CliConfig& config);

}  // namespace overseg::cli
