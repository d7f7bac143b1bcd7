#pragma once

#include "toonforge/catalog.hpp"
#include "toonforge/paint.hpp"
#include "toonforge/rig.hpp"
#include "toonforge/textparse.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace toonforge {

/// Catalog and lexicon shared by every pipeline run; immutable.
struct Resources {
    ComponentCatalog catalog;
    Lexicon lexicon;
};

/// Compiled-in location of the shipped catalog, lexicon and fixtures.
std::filesystem::path default_data_dir();
Resources load_resources(const std::filesystem::path& catalog_dir, const std::filesystem::path& lexicon_path);

/// A failure inside one pipeline stage; what() starts with "stage '<name>': ".
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

/// Everything needed to regenerate a character; stored in model metadata.
struct Recipe {
    std::string text;
    std::uint64_t seed = 0;
    Selection selection;
    /// Fill color per style key: slot id for slot layers, layer name for base layers.
    std::map<std::string, Rgb> colors;

    std::map<std::string, std::string> to_metadata() const;
    /// Throws StageError("recipe") when keys are missing or malformed.
    static Recipe from_metadata(const std::map<std::string, std::string>& metadata);
    friend bool operator==(const Recipe&, const Recipe&) = default;
};

/// Unmentioned slots take the catalog defaults; hair slots without their own
/// color share the color of another mentioned hair slot, sleeves share the top's.
Recipe make_recipe(const ParsedDescription& parsed, std::string text, std::uint64_t seed, const Resources& res);

/// Fill per layer: the recipe color, and for clothing a seed-chosen pattern.
StyleSpec recipe_style(const Recipe& recipe, const ComponentCatalog& catalog);

/// compose -> paint -> per-layer extract/repair -> rig. Appends stage timings.
CharacterModel build_character(const Recipe& recipe, const Resources& res, std::vector<StageTiming>* timings = nullptr);

struct Generated {
    CharacterModel model;
    ParsedDescription parsed;
    Recipe recipe;
    std::vector<StageTiming> timings;
};

Generated generate_character(std::string_view text, std::uint64_t seed, const Resources& res);

/// Slot that owns a model layer, or empty for base layers.
std::string slot_of_layer(const ComponentCatalog& catalog, std::string_view layer);

// ---------------------------------------------------------------------------
// Edits

struct SwapOp {
    std::string slot;
    std::string variant;
};

/// `target` is a slot id or a base layer name (e.g. "eyes").
struct RecolorOp {
    std::string target;
    Rgb rgb;
};

/// Canvas-sized mask; every layer texel under it is recolored.
struct MaskRecolorOp {
    RasterImage mask;
    Rgb rgb;
};

using EditOp = std::variant<SwapOp, RecolorOp, MaskRecolorOp>;

/// An edit that cannot apply to this character (unknown slot/variant, bad mask size).
class EditError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Returns a new model; the input is untouched. A swap regenerates only the
/// layers of the swapped slot (and of slots it displaces); swapping to the
/// current variant changes nothing.
CharacterModel apply_edits(const CharacterModel& model, const std::vector<EditOp>& ops, const Resources& res);

/// Canvas-space origin of a generated layer's texture (its rest mesh bounds).
Point texture_origin(const ModelLayer& layer);

}  // namespace toonforge
