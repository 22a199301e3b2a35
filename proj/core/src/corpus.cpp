#include "overseg/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string_view>

#include "overseg/errors.hpp"
#include "overseg/rng.hpp"

namespace overseg {

namespace {

constexpr int kMaxLabel = 25;
constexpr int kPixelsPerGlyph = kGlyphSide * kGlyphSide;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

bool parse_int(std::string_view field, int& out) {
    field = trim(field);
    if (field.empty()) return false;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

[[noreturn]] void malformed(std::uint64_t line, const std::string& what) {
    throw FormatError("corpus line " + std::to_string(line) + ": " + what, line);
}

}  // namespace

const char* split_name(Split split) noexcept {
    switch (split) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

Split parse_split(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    throw ArgumentError("unknown split '" + name + "' (expected train, val, or test)");
}

char class_letter(int class_id) noexcept {
    return class_id >= 0 && class_id <= kMaxLabel ? static_cast<char>('A' + class_id) : '?';
}

std::size_t LetterCorpus::total_instances() const noexcept {
    std::size_t n = 0;
    for (const auto& list : instances) n += list.size();
    return n;
}

ClassPool LetterCorpus::pool(Split split) const {
    if (!has_splits()) throw ArgumentError("corpus has no split assignment");
    ClassPool out(instances.size());
    for (std::size_t k = 0; k < instances.size(); ++k)
        for (std::size_t i = 0; i < instances[k].size(); ++i)
            if (split_tags[k][i] == split) out[k].push_back(instances[k][i]);
    return out;
}

LetterCorpus parse_corpus_csv(std::istream& source, std::span<const int> class_set, double threshold) {
    if (class_set.empty()) throw ArgumentError("class set is empty");
    std::vector<int> slot_of(kMaxLabel + 1, -1);
    for (std::size_t k = 0; k < class_set.size(); ++k) {
        const int id = class_set[k];
        if (id < 0 || id > kMaxLabel) throw ArgumentError("class id out of range: " + std::to_string(id));
        if (slot_of[id] >= 0) throw ArgumentError("duplicate class id: " + std::to_string(id));
        slot_of[id] = static_cast<int>(k);
    }
    if (!(threshold > 0.0 && threshold < 1.0)) throw ArgumentError("threshold must lie in (0,1)");

    LetterCorpus corpus;
    corpus.classes.assign(class_set.begin(), class_set.end());
    corpus.instances.resize(class_set.size());
    corpus.threshold = threshold;

    std::string line;
    std::uint64_t line_no = 0;
    std::vector<float> pixels;
    while (std::getline(source, line)) {
        ++line_no;
        std::string_view rest = trim(line);
        if (rest.empty()) continue;

        auto comma = rest.find(',');
        std::string_view label_field = rest.substr(0, comma);
        int label = 0;
        if (!parse_int(label_field, label)) {
            if (line_no == 1) continue;  // header
            malformed(line_no, "label is not an integer");
        }
        if (label < 0 || label > kMaxLabel) malformed(line_no, "label " + std::to_string(label) + " outside [0,25]");
        const int slot = slot_of[label];

        // Field count is validated even for skipped classes.
        pixels.clear();
        std::size_t fields = 1;
        while (comma != std::string_view::npos) {
            rest.remove_prefix(comma + 1);
            comma = rest.find(',');
            ++fields;
            if (fields > kPixelsPerGlyph + 1) break;
            if (slot < 0) continue;
            int value = 0;
            if (!parse_int(rest.substr(0, comma), value)) malformed(line_no, "field " + std::to_string(fields) + " is not an integer");
            if (value < 0 || value > 255)
                malformed(line_no, "pixel value " + std::to_string(value) + " outside [0,255]");
            pixels.push_back(static_cast<float>(value) / 255.0f);
        }
        if (fields != kPixelsPerGlyph + 1)
            malformed(line_no, "expected 785 fields, found " + (fields > kPixelsPerGlyph + 1 ? std::string("more") : std::to_string(fields)));
        if (slot < 0) continue;

        GrayImage image(kGlyphSide, kGlyphSide, pixels);
        Mask mask = binarize_mask(image, threshold);
        corpus.instances[static_cast<std::size_t>(slot)].push_back({label, std::move(image), std::move(mask)});
    }
    if (source.bad()) throw IoError("read failure while parsing corpus");

    for (std::size_t k = 0; k < class_set.size(); ++k)
        if (corpus.instances[k].empty())
            throw ContentError(std::string("corpus has no glyphs for class ") + class_letter(class_set[k]));
    return corpus;
}

LetterCorpus assign_splits(const LetterCorpus& corpus, const SplitFractions& fractions, std::uint64_t seed) {
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0)) throw ArgumentError("split fractions must be non-negative");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("split fractions must sum to 1");

    LetterCorpus out = corpus;
    out.split_tags.assign(corpus.instances.size(), {});
    for (std::size_t k = 0; k < corpus.instances.size(); ++k) {
        const std::size_t n = corpus.instances[k].size();

        // Largest-remainder apportionment; ties resolve toward earlier splits.
        std::array<std::size_t, 3> counts{};
        std::array<double, 3> remainders{};
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double exact = fractions[s] * static_cast<double>(n);
            counts[s] = static_cast<std::size_t>(std::floor(exact + 1e-9));
            counts[s] = std::min(counts[s], n - assigned);
            remainders[s] = exact - static_cast<double>(counts[s]);
            assigned += counts[s];
        }
        while (assigned < n) {
            int best = 0;
            for (int s = 1; s < 3; ++s)
                if (remainders[s] > remainders[best]) best = s;
            ++counts[best];
            remainders[best] = -1.0;
            ++assigned;
        }
        if (n >= 3)
            for (int s = 0; s < 3; ++s)
                if (fractions[s] > 0.0 && counts[s] == 0)
                    throw ContentError(std::string("split '") + split_name(static_cast<Split>(s)) +
                                       "' would be empty for class " + class_letter(corpus.classes[k]));

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Xoshiro256 rng(derive_seed(seed, k));
        for (std::size_t i = n; i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
            std::swap(order[i - 1], order[j]);
        }
        auto& tags = out.split_tags[k];
        tags.assign(n, Split::train);
        for (std::size_t pos = 0; pos < n; ++pos) {
            Split tag = pos < counts[0] ? Split::train : pos < counts[0] + counts[1] ? Split::val : Split::test;
            tags[order[pos]] = tag;
        }
    }
    return out;
}

std::vector<std::array<std::size_t, 3>> split_sizes(const LetterCorpus& corpus) {
    std::vector<std::array<std::size_t, 3>> sizes(corpus.instances.size(), {0, 0, 0});
    if (!corpus.has_splits()) return sizes;
    for (std::size_t k = 0; k < corpus.split_tags.size(); ++k)
        for (Split tag : corpus.split_tags[k]) ++sizes[k][static_cast<int>(tag)];
    return sizes;
}

}  // namespace overseg
