#include "toonforge/catalog.hpp"

#include "toonforge/composer.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace toonforge {

namespace fs = std::filesystem;
using nlohmann::json;

const ComponentSlot* ComponentCatalog::find_slot(std::string_view id) const {
    for (const auto& s : slots)
        if (s.id == id) return &s;
    return nullptr;
}

const ComponentVariant* ComponentCatalog::find_variant(std::string_view slot, std::string_view id) const {
    auto it = variants.find(std::string(slot));
    if (it == variants.end()) return nullptr;
    for (const auto& v : it->second)
        if (v.id == id) return &v;
    return nullptr;
}

const AttributeDomain* ComponentCatalog::find_attribute(std::string_view id) const {
    for (const auto& a : attribute_domains)
        if (a.id == id) return &a;
    return nullptr;
}

const std::vector<std::string>* ComponentCatalog::exclusive_group_of(std::string_view slot) const {
    for (const auto& g : exclusive_groups)
        if (std::find(g.begin(), g.end(), slot) != g.end()) return &g;
    return nullptr;
}

namespace {

json read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw CatalogError("manifest not found: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw CatalogError(path.string() + ": malformed manifest: " + e.what());
    }
}

RasterImage load_image(const fs::path& dir, const std::string& rel, const std::string& owner) {
    try {
        return read_png(dir / rel);
    } catch (const ImageError& e) {
        throw CatalogError(owner + ": " + e.what());
    }
}

Rgb color_field(const json& j, const char* key, const std::string& owner) {
    auto c = parse_hex(j.at(key).get<std::string>());
    if (!c) throw CatalogError(owner + ": bad color for '" + key + "'");
    return *c;
}

bool line_art_within_mask(const RasterImage& line_art, const RasterImage& mask) {
    for (int y = 0; y < line_art.height(); ++y)
        for (int x = 0; x < line_art.width(); ++x) {
            if (line_art.at(x, y).a == 0 || mask_set(mask, x, y)) continue;
            bool near = false;
            for (int dy = -1; dy <= 1 && !near; ++dy)
                for (int dx = -1; dx <= 1 && !near; ++dx)
                    near = mask.contains(x + dx, y + dy) && mask_set(mask, x + dx, y + dy);
            if (!near) return false;
        }
    return true;
}

void check_images(const RasterImage& mask, const RasterImage& line_art, Size canvas, const std::string& owner) {
    if (mask.size() != canvas)
        throw CatalogError(owner + ": contour mask is " + std::to_string(mask.width()) + "x" +
                           std::to_string(mask.height()) + ", catalog canvas is " + std::to_string(canvas.width) +
                           "x" + std::to_string(canvas.height));
    if (line_art.size() != canvas) throw CatalogError(owner + ": line art does not match canvas size");
    if (count_set(mask) == 0) throw CatalogError(owner + ": empty contour mask");
    if (!line_art_within_mask(line_art, mask)) throw CatalogError(owner + ": line art escapes contour mask");
}

}  // namespace

void validate_catalog(const ComponentCatalog& c) {
    if (c.canvas_size.width < 1 || c.canvas_size.height < 1) throw CatalogError("catalog: bad canvas size");
    std::set<std::string> slot_ids;
    std::set<int> zs;
    std::set<std::string> layer_names;
    auto claim_z = [&](int z, const std::string& owner) {
        if (!zs.insert(z).second) throw CatalogError(owner + ": z " + std::to_string(z) + " already used");
    };
    auto claim_layer = [&](const std::string& name, const std::string& owner) {
        if (!layer_names.insert(name).second) throw CatalogError(owner + ": duplicate layer name " + name);
    };
    for (const auto& s : c.slots) {
        if (!slot_ids.insert(s.id).second) throw CatalogError("slot " + s.id + ": duplicate slot id");
        if (s.layer_bindings.empty()) throw CatalogError("slot " + s.id + ": no layer bindings");
        for (std::size_t i = 0; i < s.layer_bindings.size(); ++i) {
            claim_z(s.z_band + static_cast<int>(i), "slot " + s.id);
            claim_layer(s.layer_bindings[i].layer, "slot " + s.id);
        }
    }
    for (const auto& b : c.base_layers) {
        claim_z(b.z, "base layer " + b.name);
        claim_layer(b.name, "base layer " + b.name);
        check_images(b.contour_mask, b.line_art, c.canvas_size, "base layer " + b.name);
    }
    // back_hair sits behind everything, front_hair in front of everything.
    if (const auto* back = c.find_slot("back_hair"); back && !zs.empty() && *zs.begin() != back->z_band)
        throw CatalogError("slot back_hair: must have the lowest z band");
    if (const auto* front = c.find_slot("front_hair");
        front && !zs.empty() && *zs.rbegin() != front->z_band + static_cast<int>(front->layer_bindings.size()) - 1)
        throw CatalogError("slot front_hair: must have the highest z band");
    for (const auto& [slot, list] : c.variants) {
        if (!slot_ids.count(slot)) throw CatalogError("variants reference unknown slot " + slot);
        std::set<std::string> ids;
        for (const auto& v : list) {
            if (v.slot != slot) throw CatalogError("variant " + v.id + ": slot mismatch");
            if (!ids.insert(v.id).second) throw CatalogError("variant " + v.id + ": duplicate id");
            check_images(v.contour_mask, v.line_art, c.canvas_size, "variant " + v.id);
        }
    }
    for (const auto& s : c.slots)
        if (!c.variants.count(s.id) || c.variants.at(s.id).empty())
            throw CatalogError("slot " + s.id + ": no variants");
    for (const auto& g : c.exclusive_groups)
        for (const auto& s : g)
            if (!slot_ids.count(s)) throw CatalogError("exclusive group references unknown slot " + s);
    for (const auto& a : c.attribute_domains)
        if (std::find(a.values.begin(), a.values.end(), a.default_value) == a.values.end())
            throw CatalogError("attribute " + a.id + ": default not in domain");
}

ComponentCatalog load_catalog(const fs::path& dir) {
    const fs::path manifest_path = dir / kCatalogManifest;
    if (!fs::exists(manifest_path)) throw CatalogError("manifest not found: " + manifest_path.string());
    const json m = read_manifest(manifest_path);
    ComponentCatalog c;
    try {
        if (m.at("format_version").get<int>() != 1)
            throw CatalogError(manifest_path.string() + ": unsupported format_version");
        c.canvas_size = {m.at("canvas").at(0).get<int>(), m.at("canvas").at(1).get<int>()};

        for (const auto& js : m.at("slots")) {
            ComponentSlot s;
            s.id = js.at("id").get<std::string>();
            s.z_band = js.at("z_band").get<int>();
            s.default_color = color_field(js, "default_color", "slot " + s.id);
            for (const auto& jl : js.at("layers")) {
                LayerBinding b;
                b.layer = jl.at("name").get<std::string>();
                if (jl.contains("region")) {
                    const auto& r = jl.at("region");
                    b.region = Rect{r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(), r.at(3).get<int>()};
                }
                b.rig = jl.value("rig", std::vector<std::string>{});
                s.layer_bindings.push_back(std::move(b));
            }
            c.slots.push_back(std::move(s));
        }

        for (const auto& jb : m.at("base_layers")) {
            BaseLayer b;
            b.name = jb.at("name").get<std::string>();
            const std::string owner = "base layer " + b.name;
            b.z = jb.at("z").get<int>();
            b.contour_mask = load_image(dir, jb.at("mask").get<std::string>(), owner);
            b.line_art = load_image(dir, jb.at("line_art").get<std::string>(), owner);
            b.rig = jb.value("rig", std::vector<std::string>{});
            b.default_color = color_field(jb, "color", owner);
            if (jb.contains("color_attribute")) b.color_attribute = jb.at("color_attribute").get<std::string>();
            c.base_layers.push_back(std::move(b));
        }

        for (const auto& jv : m.at("variants")) {
            const std::string id = jv.at("id").get<std::string>();
            const std::string slot = jv.at("slot").get<std::string>();
            const std::string owner = "variant " + id;
            if (!c.find_slot(slot)) throw CatalogError(owner + ": unknown slot '" + slot + "'");
            ComponentVariant v;
            if (jv.contains("derived_from")) {
                const std::string parent_id = jv.at("derived_from").get<std::string>();
                const ComponentVariant* parent = c.find_variant(slot, parent_id);
                if (!parent) throw CatalogError(owner + ": unknown parent variant '" + parent_id + "'");
                RasterImage clip = load_image(dir, jv.at("clip").get<std::string>(), owner);
                if (clip.size() != c.canvas_size) throw CatalogError(owner + ": clip mask does not match canvas size");
                try {
                    v = derive_variant(*parent, clip, id);
                } catch (const ComposeError& e) {
                    throw CatalogError(owner + ": " + e.what());
                }
            } else {
                v.id = id;
                v.slot = slot;
                v.contour_mask = load_image(dir, jv.at("mask").get<std::string>(), owner);
                v.line_art = load_image(dir, jv.at("line_art").get<std::string>(), owner);
                if (jv.contains("anchor")) v.anchor = {jv["anchor"].at(0).get<int>(), jv["anchor"].at(1).get<int>()};
            }
            check_images(v.contour_mask, v.line_art, c.canvas_size, owner);
            c.variants[slot].push_back(std::move(v));
        }

        for (const auto& ja : m.at("attributes")) {
            AttributeDomain a;
            a.id = ja.at("id").get<std::string>();
            a.values = ja.at("values").get<std::vector<std::string>>();
            a.default_value = ja.at("default").get<std::string>();
            c.attribute_domains.push_back(std::move(a));
        }
        c.exclusive_groups = m.value("exclusive_groups", std::vector<std::vector<std::string>>{});
    } catch (const json::exception& e) {
        throw CatalogError(manifest_path.string() + ": " + e.what());
    }
    validate_catalog(c);
    return c;
}

std::vector<std::string> list_variants(const ComponentCatalog& catalog, std::string_view slot) {
    if (!catalog.find_slot(slot)) throw CatalogError("unknown slot '" + std::string(slot) + "'");
    std::vector<std::string> ids;
    for (const auto& v : catalog.variants.at(std::string(slot))) ids.push_back(v.id);
    return ids;
}

Selection default_selection(const ComponentCatalog& catalog, std::optional<std::uint64_t> seed) {
    Selection sel;
    std::mt19937_64 rng(seed.value_or(0));
    std::set<std::string> excluded;
    for (const auto& g : catalog.exclusive_groups) {
        const std::size_t keep = seed ? uniform_index(rng, g.size()) : 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (i != keep) excluded.insert(g[i]);
    }
    for (const auto& s : catalog.slots) {
        if (excluded.count(s.id)) continue;
        const auto& list = catalog.variants.at(s.id);
        sel.variants[s.id] = list[seed ? uniform_index(rng, list.size()) : 0].id;
    }
    for (const auto& a : catalog.attribute_domains) sel.attributes[a.id] = a.default_value;
    return sel;
}

}  // namespace toonforge
