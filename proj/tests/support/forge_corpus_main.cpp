// Writes a procedurally forged glyph CSV in the A-Z corpus layout, for trying
// the pipeline without the real handwriting data.
#include <cstdio>

#include <CLI11.hpp>

#include "glyph_forge.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Forge a synthetic A-E glyph corpus CSV"};
    std::string out;
    overseg::testing::ForgeOptions options;
    app.add_option("--out", out, "output CSV")->required();
    app.add_option("--per-label", options.per_label, "glyphs per letter")->capture_default_str();
    app.add_option("--seed", options.seed, "forge seed")->capture_default_str();
    app.add_option("--labels", options.labels, "labels to emit (0 = A)")->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        overseg::testing::write_corpus_csv(out, options);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    std::printf("wrote %zu glyphs to %s\n", options.labels.size() * static_cast<std::size_t>(options.per_label),
                out.c_str());
    return 0;
}
