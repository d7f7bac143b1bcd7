#pragma once

#include "toonforge/catalog.hpp"
#include "toonforge/image.hpp"

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace toonforge {

struct TemplateLayer {
    std::string name;
    std::string slot;  // empty for base layers
    RasterImage contour_mask;
    RasterImage line_art;
    int z = 0;
    std::vector<std::string> rig;
    friend bool operator==(const TemplateLayer&, const TemplateLayer&) = default;
};

/// Per-layer control template. Layers are sorted ascending by z.
struct TemplateSheet {
    Size canvas_size;
    std::vector<TemplateLayer> layers;

    const TemplateLayer* find(std::string_view name) const;
    friend bool operator==(const TemplateSheet&, const TemplateSheet&) = default;
};

class ComposeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Places each selected variant at its anchor into the slot's bound layers and
/// adds the catalog base layers. Throws ComposeError on unknown slots/variants
/// or when an exclusive group has more than one member selected.
TemplateSheet compose_template(const Selection& selection, const ComponentCatalog& catalog);

/// Clips `parent` to `clip_mask`. The child keeps the parent's slot, anchor and
/// therefore its layer bindings; `derived_from` is set to the parent id.
ComponentVariant derive_variant(const ComponentVariant& parent, const RasterImage& clip_mask, std::string child_id = {});

/// Replaces each group of z-contiguous layers by one layer (union mask,
/// back-to-front line art, minimum z). Merged name is "merged:" + names joined by '+'.
TemplateSheet merge_layers(const TemplateSheet& sheet, const std::vector<std::set<std::string>>& groups);

}  // namespace toonforge
