#include "toonforge/composer.hpp"

#include <algorithm>
#include <map>

namespace toonforge {

const TemplateLayer* TemplateSheet::find(std::string_view name) const {
    for (const auto& l : layers)
        if (l.name == name) return &l;
    return nullptr;
}

namespace {

RasterImage clip_to_rect(const RasterImage& image, const Rect& r) {
    RasterImage out(image.width(), image.height());
    const int x0 = std::max(r.x0, 0), y0 = std::max(r.y0, 0);
    const int x1 = std::min(r.x1, image.width()), y1 = std::min(r.y1, image.height());
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) out.at(x, y) = image.at(x, y);
    return out;
}

RasterImage clip_to_mask(const RasterImage& image, const RasterImage& mask) {
    RasterImage out(image.width(), image.height());
    for (std::size_t i = 0; i < image.pixels().size(); ++i)
        if (mask_set(mask.pixels()[i])) out.pixels()[i] = image.pixels()[i];
    return out;
}

}  // namespace

TemplateSheet compose_template(const Selection& selection, const ComponentCatalog& catalog) {
    for (const auto& [slot, variant] : selection.variants) {
        if (!catalog.find_slot(slot)) throw ComposeError("unknown slot '" + slot + "'");
        if (!catalog.find_variant(slot, variant))
            throw ComposeError("unknown variant '" + variant + "' for slot '" + slot + "'");
    }
    for (const auto& group : catalog.exclusive_groups) {
        int n = 0;
        for (const auto& s : group) n += selection.variants.count(s) ? 1 : 0;
        if (n > 1) {
            std::string names;
            for (const auto& s : group) names += (names.empty() ? "" : ", ") + s;
            throw ComposeError("exclusive group violated: at most one of {" + names + "} may be selected");
        }
    }

    TemplateSheet sheet;
    sheet.canvas_size = catalog.canvas_size;
    for (const auto& slot : catalog.slots) {
        auto it = selection.variants.find(slot.id);
        if (it == selection.variants.end()) continue;
        const ComponentVariant& v = *catalog.find_variant(slot.id, it->second);
        const RasterImage mask = translate(v.contour_mask, v.anchor.x, v.anchor.y);
        const RasterImage line = translate(v.line_art, v.anchor.x, v.anchor.y);
        std::size_t emitted = 0;
        for (std::size_t i = 0; i < slot.layer_bindings.size(); ++i) {
            const LayerBinding& b = slot.layer_bindings[i];
            TemplateLayer layer;
            layer.name = b.layer;
            layer.slot = slot.id;
            layer.z = slot.z_band + static_cast<int>(i);
            layer.rig = b.rig;
            layer.contour_mask = b.region ? clip_to_rect(mask, *b.region) : mask;
            layer.line_art = b.region ? clip_to_rect(line, *b.region) : line;
            if (count_set(layer.contour_mask) == 0) continue;
            sheet.layers.push_back(std::move(layer));
            ++emitted;
        }
        if (emitted == 0)
            throw ComposeError("variant '" + v.id + "' leaves no pixels in any layer of slot '" + slot.id + "'");
    }
    for (const auto& base : catalog.base_layers)
        sheet.layers.push_back({base.name, {}, base.contour_mask, base.line_art, base.z, base.rig});

    std::stable_sort(sheet.layers.begin(), sheet.layers.end(),
                     [](const TemplateLayer& a, const TemplateLayer& b) { return a.z < b.z; });
    return sheet;
}

ComponentVariant derive_variant(const ComponentVariant& parent, const RasterImage& clip_mask, std::string child_id) {
    try {
        require_same_size(parent.contour_mask, clip_mask, "derive_variant");
    } catch (const ImageError& e) {
        throw ComposeError(e.what());
    }
    ComponentVariant child;
    child.id = child_id.empty() ? parent.id + "_derived" : std::move(child_id);
    child.slot = parent.slot;
    child.anchor = parent.anchor;
    child.derived_from = parent.id;
    child.contour_mask = mask_intersect(parent.contour_mask, clip_mask);
    if (count_set(child.contour_mask) == 0)
        throw ComposeError("derive_variant: clip leaves '" + parent.id + "' empty (degenerate component)");
    child.line_art = clip_to_mask(parent.line_art, clip_mask);
    return child;
}

TemplateSheet merge_layers(const TemplateSheet& sheet, const std::vector<std::set<std::string>>& groups) {
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < sheet.layers.size(); ++i) position[sheet.layers[i].name] = i;

    // group index per layer position, or -1
    std::vector<int> owner(sheet.layers.size(), -1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) throw ComposeError("merge_layers: empty group");
        std::size_t lo = sheet.layers.size(), hi = 0;
        for (const auto& name : groups[g]) {
            auto it = position.find(name);
            if (it == position.end()) throw ComposeError("merge_layers: unknown layer '" + name + "'");
            if (owner[it->second] != -1) throw ComposeError("merge_layers: layer '" + name + "' in two groups");
            owner[it->second] = static_cast<int>(g);
            lo = std::min(lo, it->second);
            hi = std::max(hi, it->second);
        }
        for (std::size_t i = lo; i <= hi; ++i)
            if (!groups[g].count(sheet.layers[i].name))
                throw ComposeError("merge_layers: group is not z-contiguous; layer '" + sheet.layers[i].name +
                                   "' (z " + std::to_string(sheet.layers[i].z) + ") lies between its members");
    }

    TemplateSheet out;
    out.canvas_size = sheet.canvas_size;
    for (std::size_t i = 0; i < sheet.layers.size(); ++i) {
        if (owner[i] == -1) {
            out.layers.push_back(sheet.layers[i]);
            continue;
        }
        // Members are contiguous, so the first member seen starts the merged layer.
        if (i > 0 && owner[i - 1] == owner[i]) continue;
        TemplateLayer merged = sheet.layers[i];
        std::string name = "merged:" + merged.name;
        for (std::size_t j = i + 1; j < sheet.layers.size() && owner[j] == owner[i]; ++j) {
            const TemplateLayer& next = sheet.layers[j];
            name += "+" + next.name;
            merged.contour_mask = mask_union(merged.contour_mask, next.contour_mask);
            for (std::size_t p = 0; p < merged.line_art.pixels().size(); ++p)
                merged.line_art.pixels()[p] = blend_over(merged.line_art.pixels()[p], next.line_art.pixels()[p]);
            for (const auto& r : next.rig)
                if (std::find(merged.rig.begin(), merged.rig.end(), r) == merged.rig.end()) merged.rig.push_back(r);
        }
        merged.name = std::move(name);
        out.layers.push_back(std::move(merged));
    }
    return out;
}

}  // namespace toonforge
