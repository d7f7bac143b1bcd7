#pragma once

#include "toonforge/catalog.hpp"
#include "toonforge/image.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace toonforge {

/// Special lexicon targets. Anything else must be a catalog slot or attribute id.
inline constexpr std::string_view kTargetColor = "color";    // value: #rrggbb
inline constexpr std::string_view kTargetFiller = "filler";  // distractor phrase for the corpus generator
inline constexpr std::string_view kTargetIgnore = "ignore";  // recognised noun that absorbs colors, e.g. "background"
/// Attribute entry value meaning "anchor only": the attribute is set by a bound color.
inline constexpr std::string_view kAnchorValue = "*";

struct LexiconEntry {
    std::vector<std::string> tokens;
    std::string target;
    std::string value;
    int priority = 0;
    friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

struct ColorTerm {
    std::vector<std::string> tokens;
    std::string name;  // surface form, e.g. "light blue"
    Rgb rgb;
    friend bool operator==(const ColorTerm&, const ColorTerm&) = default;
};

class LexiconError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable after construction.
class Lexicon {
public:
    Lexicon() = default;
    Lexicon(std::vector<LexiconEntry> entries, std::vector<ColorTerm> colors, std::vector<std::string> distractors);

    const std::vector<LexiconEntry>& entries() const { return entries_; }
    const std::vector<ColorTerm>& color_terms() const { return colors_; }
    const std::vector<std::string>& distractor_pool() const { return distractors_; }

    /// Entry indices whose first token is `token`, longest first, then by
    /// priority (desc) and manifest order.
    const std::vector<std::size_t>& entries_starting_with(const std::string& token) const;
    const std::vector<std::size_t>& colors_starting_with(const std::string& token) const;

    /// Surface forms (manifest order) for a (target, value); the first is primary.
    std::vector<const LexiconEntry*> forms_for(std::string_view target, std::string_view value) const;
    const ColorTerm* find_color(std::string_view name) const;

private:
    std::vector<LexiconEntry> entries_;
    std::vector<ColorTerm> colors_;
    std::vector<std::string> distractors_;
    std::unordered_map<std::string, std::vector<std::size_t>> entry_index_;
    std::unordered_map<std::string, std::vector<std::size_t>> color_index_;
};

/// Lines "surface form | target | value | priority". Lines starting with '#'
/// are comments, as is anything after a '#' in the priority field.
Lexicon parse_lexicon(std::string_view text, const ComponentCatalog& catalog);
Lexicon load_lexicon(const std::filesystem::path& path, const ComponentCatalog& catalog);

/// Lowercased tokens; letters, digits, bytes >= 0x80 and inner '-' / '\'' form words.
std::vector<std::string> tokenize(std::string_view text);

struct ParsedDescription {
    std::map<std::string, std::string> selection;  // slot -> variant
    std::map<std::string, Rgb> colors;             // slot or attribute -> color
    std::map<std::string, std::string> attributes;
    std::vector<std::string> unmatched_tokens;

    /// Equality over selection, colors and attributes (unmatched tokens ignored).
    bool same_content(const ParsedDescription& other) const;
};

/// One-line canonical JSON of selection/colors/attributes (sorted keys).
std::string serialize_gold(const ParsedDescription& d);
ParsedDescription deserialize_gold(std::string_view line);

inline constexpr int kColorWindow = 3;

/// Total over any input. Colors are matched first (longest match); component
/// and attribute forms are then matched greedily, longest first, over the
/// remaining tokens so "long pink hair" still reads as "long hair".
ParsedDescription parse_description(std::string_view text, const Lexicon& lexicon, const ComponentCatalog& catalog);

struct CorpusPair {
    std::string text;
    ParsedDescription gold;
};

enum class Noise { off, on };

/// Deterministic for equal (n, seed). Throws std::invalid_argument for n == 0.
std::vector<CorpusPair> generate_corpus(const ComponentCatalog& catalog, const Lexicon& lexicon, std::size_t n,
                                        std::uint64_t seed, Noise noise);

/// Lines "text TAB gold".
std::string write_corpus(const std::vector<CorpusPair>& corpus);
std::vector<CorpusPair> read_corpus(std::string_view text);

struct AccuracyReport {
    std::map<std::string, double> per_slot_accuracy;
    std::map<std::string, double> per_attribute_accuracy;
    double exact_match = 0.0;
    std::size_t n = 0;
};

/// Throws std::invalid_argument for an empty corpus.
AccuracyReport evaluate_parser(const std::vector<CorpusPair>& corpus, const Lexicon& lexicon,
                               const ComponentCatalog& catalog);

}  // namespace toonforge
