#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "overseg/image.hpp"

namespace overseg {

inline constexpr double kDefaultMaskThreshold = 0.5;

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

const char* split_name(Split split) noexcept;
/// Parses "train" / "val" / "test"; throws ArgumentError otherwise.
Split parse_split(const std::string& name);

/// Display letter for a corpus label (0 -> 'A').
char class_letter(int class_id) noexcept;

struct LetterInstance {
    int class_id = 0;
    GrayImage image;
    Mask mask;
};

/// Per-class glyph lists for one split, indexed by position in the class set.
using ClassPool = std::vector<std::vector<LetterInstance>>;

/// Glyphs grouped by class, in source order, plus a split tag per glyph.
/// Immutable once built; safe to share across threads.
struct LetterCorpus {
    std::vector<int> classes;
    std::vector<std::vector<LetterInstance>> instances;
    std::vector<std::vector<Split>> split_tags;  // empty until assign_splits
    double threshold = kDefaultMaskThreshold;

    std::size_t total_instances() const noexcept;
    bool has_splits() const noexcept { return !split_tags.empty(); }
    /// Glyphs tagged `split`, per class. Requires assign_splits.
    ClassPool pool(Split split) const;
    /// Every glyph regardless of tag.
    ClassPool all() const { return instances; }
};

/// Reads `label,p0,...,p783` records. Labels outside `class_set` are skipped;
/// an optional header line (non-numeric first field) is ignored.
/// Throws FormatError (1-based line) on malformed records and ContentError
/// when a requested class ends up empty.
LetterCorpus parse_corpus_csv(std::istream& source, std::span<const int> class_set,
                              double threshold = kDefaultMaskThreshold);

using SplitFractions = std::array<double, 3>;
inline constexpr SplitFractions kDefaultSplitFractions{0.8, 0.1, 0.1};

/// Tags each glyph train/val/test. Per-class pool sizes follow `fractions`
/// by largest remainder; which glyph lands where is a seeded shuffle.
LetterCorpus assign_splits(const LetterCorpus& corpus, const SplitFractions& fractions,
                           std::uint64_t seed);

/// Per-class counts of glyphs per split tag.
std::vector<std::array<std::size_t, 3>> split_sizes(const LetterCorpus& corpus);

}  // namespace overseg
