#pragma once

#include "toonforge/image.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace toonforge {

struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

/// One layer painted by a slot. `region` clips the variant mask for this layer
/// (used to split sleeves into left/right layers); `rig` names motion presets.
struct LayerBinding {
    std::string layer;
    std::optional<Rect> region;
    std::vector<std::string> rig;
    friend bool operator==(const LayerBinding&, const LayerBinding&) = default;
};

struct ComponentSlot {
    std::string id;
    std::vector<LayerBinding> layer_bindings;
    int z_band = 0;
    Rgb default_color;
    friend bool operator==(const ComponentSlot&, const ComponentSlot&) = default;
};

struct ComponentVariant {
    std::string id;
    std::string slot;
    RasterImage contour_mask;
    RasterImage line_art;
    Point anchor;
    std::optional<std::string> derived_from;
    friend bool operator==(const ComponentVariant&, const ComponentVariant&) = default;
};

/// Always-present layers (body, face, eyes, mouth). `color_attribute` names the
/// parse attribute whose color paints this layer, e.g. eyes <- eye_color.
struct BaseLayer {
    std::string name;
    int z = 0;
    RasterImage contour_mask;
    RasterImage line_art;
    std::vector<std::string> rig;
    Rgb default_color;
    std::optional<std::string> color_attribute;
    friend bool operator==(const BaseLayer&, const BaseLayer&) = default;
};

struct AttributeDomain {
    std::string id;
    std::vector<std::string> values;
    std::string default_value;
    friend bool operator==(const AttributeDomain&, const AttributeDomain&) = default;
};

class CatalogError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Slot -> variant choices plus parse-only attribute values.
struct Selection {
    std::map<std::string, std::string> variants;
    std::map<std::string, std::string> attributes;
    friend bool operator==(const Selection&, const Selection&) = default;
};

/// Immutable after load.
struct ComponentCatalog {
    Size canvas_size;
    std::vector<ComponentSlot> slots;
    std::map<std::string, std::vector<ComponentVariant>> variants;
    std::vector<BaseLayer> base_layers;
    std::vector<AttributeDomain> attribute_domains;
    std::vector<std::vector<std::string>> exclusive_groups;

    const ComponentSlot* find_slot(std::string_view id) const;
    const ComponentVariant* find_variant(std::string_view slot, std::string_view id) const;
    const AttributeDomain* find_attribute(std::string_view id) const;
    /// The exclusive group containing `slot`, if any.
    const std::vector<std::string>* exclusive_group_of(std::string_view slot) const;

    friend bool operator==(const ComponentCatalog&, const ComponentCatalog&) = default;
};

inline constexpr std::string_view kCatalogManifest = "catalog.json";

ComponentCatalog load_catalog(const std::filesystem::path& dir);

/// Checks every catalog invariant; throws CatalogError.
void validate_catalog(const ComponentCatalog& catalog);

std::vector<std::string> list_variants(const ComponentCatalog& catalog, std::string_view slot);

Selection default_selection(const ComponentCatalog& catalog, std::optional<std::uint64_t> seed = std::nullopt);

/// Uniform index in [0, n) from a 64-bit engine; portable across standard libraries.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

}  // namespace toonforge
