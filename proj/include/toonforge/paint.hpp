#pragma once

#include "toonforge/composer.hpp"
#include "toonforge/image.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toonforge {

enum class Pattern { flat, vertical_stripes, polka_dot, gradient };

std::string_view pattern_name(Pattern p);
std::optional<Pattern> parse_pattern(std::string_view s);

/// Interior fill for one layer. `secondary` is the alternate stripe color, the
/// dot color, or the bottom gradient endpoint (`base` is the top endpoint).
struct LayerStyle {
    Rgb base{200, 200, 200};
    Rgb secondary{255, 255, 255};
    Pattern pattern = Pattern::flat;
    int stripe_width = 8;
    int dot_radius = 6;
    friend bool operator==(const LayerStyle&, const LayerStyle&) = default;
};

/// Styles keyed by slot id (slot layers) or layer name (base layers).
struct StyleSpec {
    std::map<std::string, LayerStyle> layers;
    LayerStyle fallback;
    Rgb outline{48, 36, 44};

    const LayerStyle& for_layer(const TemplateLayer& layer) const;
};

class PaintError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Appearance {
    RasterImage flattened;
    std::vector<RasterImage> layers;  // parallel to TemplateSheet::layers
};

/// Throws PaintError when a style has non-positive pattern parameters.
void validate_style(const StyleSpec& style);

/// Fills each layer's contour interior with its pattern and composites the
/// outline-colored line art on top. Nothing is painted outside a layer's mask.
Appearance synthesize_appearance(const TemplateSheet& sheet, const StyleSpec& style, std::uint64_t seed);

/// Single-layer fill used by synthesize_appearance.
RasterImage paint_layer(const TemplateLayer& layer, const LayerStyle& style, Rgb outline, std::uint64_t seed);

RasterImage extract_component(const RasterImage& image, const RasterImage& mask);
RasterImage erase_region(const RasterImage& image, const RasterImage& mask);

struct RepairOptions {
    /// 3x3 box blur over in-mask neighbours, written to filled pixels only.
    bool smooth = false;
};

/// Fills component_mask & occluder_mask from the geodesically nearest visible
/// pixel (4-connected paths inside component_mask; ties go to the seed with the
/// smaller (y, x)). Occluded pixels with no connected visible pixel are left
/// unchanged. Throws PaintError when nothing is visible.
RasterImage repair_occlusion(const RasterImage& component, const RasterImage& component_mask,
                             const RasterImage& occluder_mask, RepairOptions options = {});

/// Replaces hue and saturation of masked pixels with the target's, keeping
/// max+min (HSL lightness) of every pixel exactly. Alpha unchanged.
RasterImage recolor_region(const RasterImage& image, const RasterImage& mask, Rgb target);

}  // namespace toonforge
