#include "toonforge/pipeline.hpp"

#include "toonforge/composer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <random>
#include <set>

namespace toonforge {

std::filesystem::path default_data_dir() { return TOONFORGE_DATA_DIR; }

Resources load_resources(const std::filesystem::path& catalog_dir, const std::filesystem::path& lexicon_path) {
    Resources r;
    r.catalog = load_catalog(catalog_dir);
    r.lexicon = load_lexicon(lexicon_path, r.catalog);
    return r;
}

StageError::StageError(std::string stage, const std::string& message)
    : std::runtime_error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}

namespace {

constexpr std::string_view kVariantPrefix = "variant.";
constexpr std::string_view kAttributePrefix = "attribute.";
constexpr std::string_view kColorPrefix = "color.";

std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Independent per-name seed, so regenerating one layer leaves the others alone.
std::uint64_t keyed_seed(std::uint64_t seed, std::string_view key) { return mix(seed ^ fnv1a(key)); }

std::uint8_t channel(double v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)); }

Rgb scale(Rgb c, double f) { return {channel(c.r * f), channel(c.g * f), channel(c.b * f)}; }

Rgb tint(Rgb c, double t) {
    return {channel(c.r + (255 - c.r) * t), channel(c.g + (255 - c.g) * t), channel(c.b + (255 - c.b) * t)};
}

bool is_hair(std::string_view slot) { return slot.ends_with("_hair"); }

template <class F>
auto timed(std::vector<StageTiming>* timings, const char* stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
        if (timings)
            timings->push_back(
                {stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    };
    try {
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            finish();
        } else {
            auto r = f();
            finish();
            return r;
        }
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

// ---------------------------------------------------------------------------
// Rig construction

struct LayerGeom {
    int z = 0;
    double cx = 0, cy = 0, hw = 1, hh = 1;  // bounds center and half extents
};

constexpr double kShoulderY = 490;
constexpr double kWaistY = 740;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Offset of one vertex for one rig preset at parameter displacement d = value - default.
Vec2 preset_offset(std::string_view preset, std::string_view param, double d, Vec2 p, const LayerGeom& g) {
    if (preset == "head") {
        const double parallax = 0.8 + (g.z - 10) / 250.0;  // front layers travel further
        if (param == "AngleX") return {0.6 * d * parallax, 0};
        if (param == "AngleY") return {0, -0.35 * d * parallax};
        if (param == "BodyAngleX") return {1.2 * d, 0};
    } else if (preset == "hair_sway") {
        const double lag = clamp01((p.y - 300) / 400);
        if (param == "AngleX") return {-0.25 * d * lag, 0};
        if (param == "BodyAngleX") return {-0.5 * d * lag, 0};
    } else if (preset == "body") {
        if (param == "BodyAngleX") return {1.2 * d * clamp01((kWaistY - p.y) / (kWaistY - kShoulderY)), 0};
    } else if (preset == "eyes") {
        if (param == "EyeOpen") return {0, -d * (g.cy - p.y) * 0.9};
    } else if (preset == "mouth") {
        const double rx = p.x - g.cx, ry = p.y - g.cy, u = rx / g.hw;
        if (param == kMouthOpenY) return {0, 1.8 * d * ry};
        if (param == kMouthForm) return {0, -6.0 * d * u * u};
        if (param == kMouthPucker) return {-0.4 * d * rx, 0};
        if (param == kMouthFunnel) return {-0.25 * d * rx, 0.8 * d * ry};
        if (param == kMouthPress) return {0, -0.6 * d * ry};
        if (param == kMouthX) return {8.0 * d, 0};
    }
    return {};
}

/// ARKit mouth shapes at full weight. "Left" is the character's left, i.e. +x on the canvas.
Vec2 arkit_offset(std::string_view name, Vec2 p, const LayerGeom& g) {
    const double rx = p.x - g.cx, ry = p.y - g.cy, u = rx / g.hw;
    const double left = std::max(0.0, u), right = std::max(0.0, -u);
    const double below = ry > 0 ? ry : 0, above = ry < 0 ? ry : 0;
    const std::string_view n = name;
    if (n == "jawOpen") return {0, 1.5 * ry};
    if (n == "jawForward") return {0, 2};
    if (n == "jawLeft") return {6, 0};
    if (n == "jawRight") return {-6, 0};
    if (n == "mouthClose") return {0, -0.5 * ry};
    if (n == "mouthFunnel") return {-0.25 * rx, 0.8 * ry};
    if (n == "mouthPucker") return {-0.4 * rx, 0};
    if (n == "mouthLeft") return {8, 0};
    if (n == "mouthRight") return {-8, 0};
    if (n == "mouthSmileLeft") return {0, -6 * left};
    if (n == "mouthSmileRight") return {0, -6 * right};
    if (n == "mouthFrownLeft") return {0, 6 * left};
    if (n == "mouthFrownRight") return {0, 6 * right};
    if (n == "mouthDimpleLeft") return {3 * left, 0};
    if (n == "mouthDimpleRight") return {-3 * right, 0};
    if (n == "mouthStretchLeft") return {6 * left, 0};
    if (n == "mouthStretchRight") return {-6 * right, 0};
    if (n == "mouthRollLower") return {0, -0.5 * below};
    if (n == "mouthRollUpper") return {0, -0.5 * above};
    if (n == "mouthShrugLower") return {0, below > 0 ? -3.0 : 0.0};
    if (n == "mouthShrugUpper") return {0, above < 0 ? -3.0 : 0.0};
    if (n == "mouthPressLeft") return {0, -0.5 * ry * left};
    if (n == "mouthPressRight") return {0, -0.5 * ry * right};
    if (n == "mouthLowerDownLeft") return {0, below > 0 ? 5 * left : 0.0};
    if (n == "mouthLowerDownRight") return {0, below > 0 ? 5 * right : 0.0};
    if (n == "mouthUpperUpLeft") return {0, above < 0 ? -5 * left : 0.0};
    if (n == "mouthUpperUpRight") return {0, above < 0 ? -5 * right : 0.0};
    return {};
}

int grid_step(const std::vector<std::string>& rig) {
    if (std::find(rig.begin(), rig.end(), "mouth") != rig.end()) return 4;
    if (std::find(rig.begin(), rig.end(), "eyes") != rig.end()) return 8;
    return 32;
}

/// Grid over the mask bounds keeping only cells that touch the mask.
Mesh grid_mesh(const RasterImage& mask, const Rect& box, int step) {
    std::vector<int> xs, ys;
    for (int x = box.x0; x < box.x1; x += step) xs.push_back(x);
    xs.push_back(box.x1);
    for (int y = box.y0; y < box.y1; y += step) ys.push_back(y);
    ys.push_back(box.y1);
    const std::size_t cols = xs.size() - 1, rows = ys.size() - 1;

    std::vector<char> used(cols * rows, 0);
    for (int y = box.y0; y < box.y1; ++y)
        for (int x = box.x0; x < box.x1; ++x)
            if (mask_set(mask, x, y))
                used[static_cast<std::size_t>((y - box.y0) / step) * cols + static_cast<std::size_t>((x - box.x0) / step)] = 1;

    Mesh mesh;
    const double w = box.x1 - box.x0, h = box.y1 - box.y0;
    std::vector<std::int64_t> index(xs.size() * ys.size(), -1);
    auto vertex = [&](std::size_t cx, std::size_t cy) {
        auto& slot = index[cy * xs.size() + cx];
        if (slot < 0) {
            slot = static_cast<std::int64_t>(mesh.vertices.size());
            mesh.vertices.push_back({static_cast<double>(xs[cx]), static_cast<double>(ys[cy])});
            mesh.uvs.push_back({(xs[cx] - box.x0) / w, (ys[cy] - box.y0) / h});
        }
        return static_cast<std::uint32_t>(slot);
    };
    for (std::size_t cy = 0; cy < rows; ++cy)
        for (std::size_t cx = 0; cx < cols; ++cx) {
            if (!used[cy * cols + cx]) continue;
            const auto a = vertex(cx, cy), b = vertex(cx + 1, cy), c = vertex(cx + 1, cy + 1), d = vertex(cx, cy + 1);
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({a, c, d});
        }
    return mesh;
}

RasterImage crop(const RasterImage& image, const Rect& box) {
    RasterImage out(box.x1 - box.x0, box.y1 - box.y0);
    for (int y = box.y0; y < box.y1; ++y)
        for (int x = box.x0; x < box.x1; ++x) out.at(x - box.x0, y - box.y0) = image.at(x, y);
    return out;
}

void add_rig(CharacterModel& model, const ModelLayer& layer, const std::vector<std::string>& presets, const Rect& box) {
    if (presets.empty()) return;
    LayerGeom g;
    g.z = layer.z;
    g.cx = (box.x0 + box.x1) / 2.0;
    g.cy = (box.y0 + box.y1) / 2.0;
    g.hw = std::max(1.0, (box.x1 - box.x0) / 2.0);
    g.hh = std::max(1.0, (box.y1 - box.y0) / 2.0);
    const auto& verts = layer.mesh.vertices;

    for (const Parameter& p : model.parameters) {
        std::vector<double> values{p.min, p.default_value, p.max};
        values.erase(std::unique(values.begin(), values.end()), values.end());
        Deformer d{layer.name, p.id, {}};
        bool moves = false;
        for (double v : values) {
            Keyform key{v, std::vector<Vec2>(verts.size())};
            if (v != p.default_value)
                for (std::size_t i = 0; i < verts.size(); ++i)
                    for (const auto& preset : presets) {
                        const Vec2 o = preset_offset(preset, p.id, v - p.default_value, verts[i], g);
                        key.offsets[i].x += o.x;
                        key.offsets[i].y += o.y;
                        moves = moves || o.x != 0.0 || o.y != 0.0;
                    }
            d.keys.push_back(std::move(key));
        }
        if (moves) model.deformers.push_back(std::move(d));
    }
    if (std::find(presets.begin(), presets.end(), "mouth") == presets.end()) return;
    for (auto name : arkit_mouth_names()) {
        Blendshape b{std::string(name), layer.name, std::vector<Vec2>(verts.size())};
        bool moves = false;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            b.offsets[i] = arkit_offset(name, verts[i], g);
            moves = moves || b.offsets[i].x != 0.0 || b.offsets[i].y != 0.0;
        }
        if (moves) model.blendshapes.push_back(std::move(b));
    }
}

std::string format_seed(std::uint64_t seed) { return std::to_string(seed); }

}  // namespace

// ---------------------------------------------------------------------------
// Recipe

std::map<std::string, std::string> Recipe::to_metadata() const {
    std::map<std::string, std::string> m;
    m["text"] = text;
    m["seed"] = format_seed(seed);
    for (const auto& [slot, v] : selection.variants) m[std::string(kVariantPrefix) + slot] = v;
    for (const auto& [a, v] : selection.attributes) m[std::string(kAttributePrefix) + a] = v;
    for (const auto& [k, c] : colors) m[std::string(kColorPrefix) + k] = to_hex(c);
    return m;
}

Recipe Recipe::from_metadata(const std::map<std::string, std::string>& m) {
    Recipe r;
    auto text = m.find("text");
    auto seed = m.find("seed");
    if (text == m.end() || seed == m.end()) throw StageError("recipe", "model carries no generation recipe");
    r.text = text->second;
    const std::string& s = seed->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), r.seed);
    if (ec != std::errc{} || p != s.data() + s.size()) throw StageError("recipe", "bad seed '" + s + "'");
    for (const auto& [k, v] : m) {
        const std::string_view key = k;
        if (key.starts_with(kVariantPrefix)) {
            r.selection.variants[std::string(key.substr(kVariantPrefix.size()))] = v;
        } else if (key.starts_with(kAttributePrefix)) {
            r.selection.attributes[std::string(key.substr(kAttributePrefix.size()))] = v;
        } else if (key.starts_with(kColorPrefix)) {
            auto c = parse_hex(v);
            if (!c) throw StageError("recipe", "bad color for '" + k + "'");
            r.colors[std::string(key.substr(kColorPrefix.size()))] = *c;
        }
    }
    return r;
}

Recipe make_recipe(const ParsedDescription& parsed, std::string text, std::uint64_t seed, const Resources& res) {
    const ComponentCatalog& cat = res.catalog;
    Recipe r;
    r.text = std::move(text);
    r.seed = seed;
    const Selection defaults = default_selection(cat);
    r.selection.variants = parsed.selection;
    for (const auto& slot : cat.slots) {
        if (r.selection.variants.count(slot.id)) continue;
        bool displaced = false;
        if (const auto* group = cat.exclusive_group_of(slot.id))
            for (const auto& other : *group) displaced = displaced || parsed.selection.count(other) > 0;
        auto d = defaults.variants.find(slot.id);
        if (!displaced && d != defaults.variants.end()) r.selection.variants[slot.id] = d->second;
    }
    r.selection.attributes = defaults.attributes;
    for (const auto& [k, v] : parsed.attributes) r.selection.attributes[k] = v;

    auto parsed_color = [&](const std::string& key) -> std::optional<Rgb> {
        auto it = parsed.colors.find(key);
        return it == parsed.colors.end() ? std::nullopt : std::optional<Rgb>(it->second);
    };
    std::optional<Rgb> hair;
    for (const char* h : {"back_hair", "front_hair", "mid_hair"})
        if (!hair) hair = parsed_color(h);
    for (const auto& slot : cat.slots) {
        if (!r.selection.variants.count(slot.id)) continue;
        std::optional<Rgb> c = parsed_color(slot.id);
        if (!c && is_hair(slot.id)) c = hair;
        if (!c && slot.id == "sleeves") c = parsed_color("top");
        r.colors[slot.id] = c.value_or(slot.default_color);
    }
    for (const auto& base : cat.base_layers) {
        std::optional<Rgb> c;
        if (base.color_attribute) {
            c = parsed_color(*base.color_attribute);
            auto value = r.selection.attributes.find(*base.color_attribute);
            if (!c && value != r.selection.attributes.end())
                if (const ColorTerm* term = res.lexicon.find_color(value->second)) c = term->rgb;
        }
        r.colors[base.name] = c.value_or(base.default_color);
    }
    return r;
}

StyleSpec recipe_style(const Recipe& recipe, const ComponentCatalog& cat) {
    StyleSpec style;
    auto clothing = [&](const std::string& slot, Rgb base) {
        std::mt19937_64 rng(keyed_seed(recipe.seed, slot));
        static constexpr Pattern kChoices[] = {Pattern::flat, Pattern::flat, Pattern::vertical_stripes,
                                               Pattern::polka_dot, Pattern::gradient};
        LayerStyle s;
        s.base = base;
        s.pattern = kChoices[uniform_index(rng, std::size(kChoices))];
        s.secondary = s.pattern == Pattern::gradient ? scale(base, 0.8) : tint(base, 0.45);
        s.stripe_width = 10 + static_cast<int>(uniform_index(rng, 8));
        s.dot_radius = 5 + static_cast<int>(uniform_index(rng, 4));
        return s;
    };
    auto color_of = [&](const std::string& key, Rgb fallback) {
        auto it = recipe.colors.find(key);
        return it == recipe.colors.end() ? fallback : it->second;
    };
    for (const auto& slot : cat.slots) {
        const Rgb base = color_of(slot.id, slot.default_color);
        LayerStyle s;
        s.base = base;
        if (is_hair(slot.id)) {
            s.pattern = Pattern::gradient;
            s.secondary = scale(base, 0.75);
        } else if (slot.id == "top" || slot.id == "pants" || slot.id == "skirt") {
            s = clothing(slot.id, base);
        } else if (slot.id == "sleeves") {
            // sleeves follow the top's pattern in their own color
            const ComponentSlot* top = cat.find_slot("top");
            s = clothing("top", color_of("top", top ? top->default_color : base));
            s.base = base;
            s.secondary = s.pattern == Pattern::gradient ? scale(base, 0.8) : tint(base, 0.45);
        }
        style.layers[slot.id] = s;
    }
    for (const auto& b : cat.base_layers) {
        LayerStyle s;
        s.base = color_of(b.name, b.default_color);
        style.layers[b.name] = s;
    }
    return style;
}

CharacterModel build_character(const Recipe& recipe, const Resources& res, std::vector<StageTiming>* timings) {
    const ComponentCatalog& cat = res.catalog;
    const TemplateSheet sheet = timed(timings, "compose", [&] { return compose_template(recipe.selection, cat); });

    struct Painted {
        std::vector<RasterImage> layers;
        RasterImage flattened;
    };
    const Painted painted = timed(timings, "paint", [&] {
        const StyleSpec style = recipe_style(recipe, cat);
        validate_style(style);
        Painted p;
        p.flattened = RasterImage(sheet.canvas_size.width, sheet.canvas_size.height);
        for (const auto& layer : sheet.layers) {
            RasterImage img = paint_layer(layer, style.for_layer(layer), style.outline, keyed_seed(recipe.seed, layer.name));
            for (std::size_t i = 0; i < img.pixels().size(); ++i)
                if (img.pixels()[i].a != 0) p.flattened.pixels()[i] = blend_over(p.flattened.pixels()[i], img.pixels()[i]);
            p.layers.push_back(std::move(img));
        }
        return p;
    });

    // De-layer the flattened sheet: each layer keeps its visible pixels and
    // regrows the parts hidden by layers in front of it.
    const std::vector<RasterImage> textures = timed(timings, "complete", [&] {
        const std::size_t n = sheet.layers.size();
        std::vector<RasterImage> in_front(n);
        RasterImage acc(sheet.canvas_size.width, sheet.canvas_size.height);
        for (std::size_t i = n; i-- > 0;) {
            in_front[i] = acc;
            acc = mask_union(acc, sheet.layers[i].contour_mask);
        }
        std::vector<RasterImage> out;
        for (std::size_t i = 0; i < n; ++i) {
            const TemplateLayer& layer = sheet.layers[i];
            const RasterImage visible = mask_subtract(layer.contour_mask, in_front[i]);
            if (count_set(visible) == 0) {
                out.push_back(painted.layers[i]);  // nothing to grow from
                continue;
            }
            const RasterImage component = erase_region(extract_component(painted.flattened, layer.contour_mask), in_front[i]);
            out.push_back(repair_occlusion(component, layer.contour_mask, in_front[i]));
        }
        return out;
    });

    return timed(timings, "rig", [&] {
        CharacterModel model;
        model.canvas_size = sheet.canvas_size;
        model.parameters = standard_parameters();
        for (std::size_t i = 0; i < sheet.layers.size(); ++i) {
            const TemplateLayer& t = sheet.layers[i];
            const Rect box = mask_bounds(t.contour_mask);
            ModelLayer layer;
            layer.name = t.name;
            layer.z = t.z;
            layer.mesh = grid_mesh(t.contour_mask, box, grid_step(t.rig));
            layer.texture = std::make_shared<const RasterImage>(crop(textures[i], box));
            model.layers.push_back(std::move(layer));
            add_rig(model, model.layers.back(), t.rig, box);
        }
        model.metadata = recipe.to_metadata();
        validate_model(model);
        return model;
    });
}

Generated generate_character(std::string_view text, std::uint64_t seed, const Resources& res) {
    Generated g;
    g.parsed = timed(&g.timings, "parse", [&] { return parse_description(text, res.lexicon, res.catalog); });
    g.recipe = timed(&g.timings, "defaults", [&] { return make_recipe(g.parsed, std::string(text), seed, res); });
    g.model = build_character(g.recipe, res, &g.timings);
    return g;
}

std::string slot_of_layer(const ComponentCatalog& catalog, std::string_view layer) {
    for (const auto& s : catalog.slots)
        for (const auto& b : s.layer_bindings)
            if (b.layer == layer) return s.id;
    return {};
}

Point texture_origin(const ModelLayer& layer) {
    double x = 0, y = 0;
    bool first = true;
    for (const auto& v : layer.mesh.vertices) {
        x = first ? v.x : std::min(x, v.x);
        y = first ? v.y : std::min(y, v.y);
        first = false;
    }
    return {static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))};
}

// ---------------------------------------------------------------------------
// Edits

namespace {

/// Assembles `layers` (ascending z) with each layer's deformers and blendshapes
/// taken from the model it came from.
CharacterModel assemble(const CharacterModel& base, const std::vector<std::pair<const CharacterModel*, std::string>>& layers) {
    CharacterModel out;
    out.canvas_size = base.canvas_size;
    out.parameters = base.parameters;
    out.metadata = base.metadata;
    for (const auto& [from, name] : layers) {
        out.layers.push_back(*from->find_layer(name));
        for (const auto& d : from->deformers)
            if (d.layer == name) out.deformers.push_back(d);
        for (const auto& b : from->blendshapes)
            if (b.layer == name) out.blendshapes.push_back(b);
    }
    return out;
}

void swap_slot(CharacterModel& model, const SwapOp& op, const Resources& res) {
    const ComponentCatalog& cat = res.catalog;
    if (!cat.find_slot(op.slot)) throw EditError("swap: unknown slot '" + op.slot + "'");
    if (!cat.find_variant(op.slot, op.variant))
        throw EditError("swap: unknown variant '" + op.variant + "' for slot '" + op.slot + "'");
    Recipe recipe;
    try {
        recipe = Recipe::from_metadata(model.metadata);
    } catch (const StageError& e) {
        throw EditError(std::string("swap: ") + e.what());
    }
    auto current = recipe.selection.variants.find(op.slot);
    if (current != recipe.selection.variants.end() && current->second == op.variant) return;

    std::set<std::string> affected{op.slot};
    if (const auto* group = cat.exclusive_group_of(op.slot))
        for (const auto& other : *group) {
            affected.insert(other);
            if (other != op.slot) recipe.selection.variants.erase(other);
        }
    recipe.selection.variants[op.slot] = op.variant;
    if (!recipe.colors.count(op.slot)) recipe.colors[op.slot] = cat.find_slot(op.slot)->default_color;
    for (auto it = recipe.colors.begin(); it != recipe.colors.end();) {
        const bool dropped = cat.find_slot(it->first) && !recipe.selection.variants.count(it->first);
        it = dropped ? recipe.colors.erase(it) : std::next(it);
    }

    const CharacterModel regen = build_character(recipe, res);
    std::vector<std::pair<const CharacterModel*, std::string>> layers;
    for (const auto& l : regen.layers) {
        const bool fresh = affected.count(slot_of_layer(cat, l.name)) || !model.find_layer(l.name);
        layers.emplace_back(fresh ? &regen : &model, l.name);
    }
    CharacterModel out = assemble(model, layers);
    out.metadata = recipe.to_metadata();
    model = std::move(out);
}

void recolor_layer(ModelLayer& layer, const RasterImage& mask, Rgb rgb) {
    layer.texture = std::make_shared<const RasterImage>(recolor_region(*layer.texture, mask, rgb));
}

void recolor_target(CharacterModel& model, const RecolorOp& op, const Resources& res) {
    const bool is_slot = res.catalog.find_slot(op.target) != nullptr;
    std::size_t hit = 0;
    for (auto& layer : model.layers) {
        const bool match = is_slot ? slot_of_layer(res.catalog, layer.name) == op.target
                                   : (layer.name == op.target && slot_of_layer(res.catalog, layer.name).empty());
        if (!match) continue;
        recolor_layer(layer, alpha_mask(*layer.texture), op.rgb);
        ++hit;
    }
    if (hit == 0) throw EditError("recolor: character has no layer for '" + op.target + "'");
    model.metadata[std::string(kColorPrefix) + op.target] = to_hex(op.rgb);
}

void recolor_mask(CharacterModel& model, const MaskRecolorOp& op) {
    if (op.mask.size() != model.canvas_size)
        throw EditError("mask_recolor: mask is " + std::to_string(op.mask.width()) + "x" +
                        std::to_string(op.mask.height()) + ", character canvas is " +
                        std::to_string(model.canvas_size.width) + "x" + std::to_string(model.canvas_size.height));
    for (auto& layer : model.layers) {
        const Point o = texture_origin(layer);
        const RasterImage& tex = *layer.texture;
        RasterImage local(tex.width(), tex.height());
        bool any = false;
        for (int y = 0; y < tex.height(); ++y)
            for (int x = 0; x < tex.width(); ++x)
                if (op.mask.contains(x + o.x, y + o.y) && mask_set(op.mask, x + o.x, y + o.y) && tex.at(x, y).a != 0) {
                    local.at(x, y) = kMaskOn;
                    any = true;
                }
        if (any) recolor_layer(layer, local, op.rgb);
    }
}

}  // namespace

CharacterModel apply_edits(const CharacterModel& model, const std::vector<EditOp>& ops, const Resources& res) {
    CharacterModel out = model;
    for (const auto& op : ops) {
        if (const auto* swap = std::get_if<SwapOp>(&op))
            swap_slot(out, *swap, res);
        else if (const auto* recolor = std::get_if<RecolorOp>(&op))
            recolor_target(out, *recolor, res);
        else
            recolor_mask(out, std::get<MaskRecolorOp>(op));
    }
    validate_model(out);
    return out;
}

}  // namespace toonforge
