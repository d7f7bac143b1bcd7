#include "toonforge/paint.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace toonforge {

std::string_view pattern_name(Pattern p) {
    switch (p) {
        case Pattern::flat: return "flat";
        case Pattern::vertical_stripes: return "vertical-stripes";
        case Pattern::polka_dot: return "polka-dot";
        case Pattern::gradient: return "gradient";
    }
    return "flat";
}

std::optional<Pattern> parse_pattern(std::string_view s) {
    for (Pattern p : {Pattern::flat, Pattern::vertical_stripes, Pattern::polka_dot, Pattern::gradient})
        if (pattern_name(p) == s) return p;
    return std::nullopt;
}

const LayerStyle& StyleSpec::for_layer(const TemplateLayer& layer) const {
    auto it = layers.find(layer.slot.empty() ? layer.name : layer.slot);
    return it == layers.end() ? fallback : it->second;
}

void validate_style(const StyleSpec& style) {
    auto check = [](const LayerStyle& s, const std::string& key) {
        if (s.stripe_width <= 0 || s.dot_radius <= 0)
            throw PaintError("style '" + key + "': pattern parameters must be positive");
    };
    check(style.fallback, "fallback");
    for (const auto& [k, s] : style.layers) check(s, k);
}

namespace {

std::uint8_t round_channel(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

Rgb lerp(Rgb a, Rgb b, double t) {
    return {round_channel(a.r + (b.r - a.r) * t), round_channel(a.g + (b.g - a.g) * t),
            round_channel(a.b + (b.b - a.b) * t)};
}

}  // namespace

RasterImage paint_layer(const TemplateLayer& layer, const LayerStyle& style, Rgb outline, std::uint64_t seed) {
    const RasterImage& mask = layer.contour_mask;
    RasterImage out(mask.width(), mask.height());
    const Rect box = mask_bounds(mask);
    if (box.empty()) return out;

    const int spacing = 4 * style.dot_radius;
    std::mt19937_64 rng(seed);
    const int phase_x = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(spacing)));
    const int phase_y = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(spacing)));
    const long r2 = static_cast<long>(style.dot_radius) * style.dot_radius;
    const int box_h = box.y1 - box.y0;

    for (int y = box.y0; y < box.y1; ++y) {
        const Rgb row_gradient =
            lerp(style.base, style.secondary, box_h > 1 ? static_cast<double>(y - box.y0) / (box_h - 1) : 0.0);
        for (int x = box.x0; x < box.x1; ++x) {
            if (!mask_set(mask, x, y)) continue;
            Rgb c = style.base;
            switch (style.pattern) {
                case Pattern::flat: break;
                case Pattern::vertical_stripes:
                    if (((x - box.x0) / style.stripe_width) % 2 == 1) c = style.secondary;
                    break;
                case Pattern::polka_dot: {
                    const long dx = ((x - box.x0 + phase_x) % spacing) - spacing / 2;
                    const long dy = ((y - box.y0 + phase_y) % spacing) - spacing / 2;
                    if (dx * dx + dy * dy <= r2) c = style.secondary;
                    break;
                }
                case Pattern::gradient: c = row_gradient; break;
            }
            out.at(x, y) = Rgba::opaque(c);
            const Rgba line = layer.line_art.at(x, y);
            if (line.a != 0) out.at(x, y) = blend_over(out.at(x, y), Rgba{outline.r, outline.g, outline.b, line.a});
        }
    }
    return out;
}

Appearance synthesize_appearance(const TemplateSheet& sheet, const StyleSpec& style, std::uint64_t seed) {
    validate_style(style);
    Appearance app;
    app.flattened = RasterImage(sheet.canvas_size.width, sheet.canvas_size.height);
    std::mt19937_64 rng(seed);
    for (const auto& layer : sheet.layers) {
        RasterImage painted = paint_layer(layer, style.for_layer(layer), style.outline, rng());
        for (std::size_t i = 0; i < painted.pixels().size(); ++i)
            if (painted.pixels()[i].a != 0)
                app.flattened.pixels()[i] = blend_over(app.flattened.pixels()[i], painted.pixels()[i]);
        app.layers.push_back(std::move(painted));
    }
    return app;
}

RasterImage extract_component(const RasterImage& image, const RasterImage& mask) {
    require_same_size(image, mask, "extract_component");
    RasterImage out(image.width(), image.height());
    for (std::size_t i = 0; i < image.pixels().size(); ++i)
        if (mask_set(mask.pixels()[i])) out.pixels()[i] = image.pixels()[i];
    return out;
}

RasterImage erase_region(const RasterImage& image, const RasterImage& mask) {
    require_same_size(image, mask, "erase_region");
    RasterImage out = image;
    for (std::size_t i = 0; i < image.pixels().size(); ++i)
        if (mask_set(mask.pixels()[i])) out.pixels()[i] = Rgba{};
    return out;
}

RasterImage repair_occlusion(const RasterImage& component, const RasterImage& component_mask,
                             const RasterImage& occluder_mask, RepairOptions options) {
    require_same_size(component, component_mask, "repair_occlusion");
    require_same_size(component, occluder_mask, "repair_occlusion");
    const int w = component.width(), h = component.height();
    const std::size_t n = component.pixels().size();

    // Seeds enter the queue in row-major order; FIFO order then keeps every
    // BFS level sorted by seed (y, x), so first discovery is the tie-break winner.
    std::vector<std::int32_t> source(n, -1);
    std::vector<char> filled(n, 0);
    std::deque<std::int32_t> queue;
    for (std::size_t i = 0; i < n; ++i)
        if (mask_set(component_mask.pixels()[i]) && !mask_set(occluder_mask.pixels()[i])) {
            source[i] = static_cast<std::int32_t>(i);
            queue.push_back(static_cast<std::int32_t>(i));
        }
    if (queue.empty()) throw PaintError("repair_occlusion: fully occluded component (no visible pixels)");

    while (!queue.empty()) {
        const std::int32_t cur = queue.front();
        queue.pop_front();
        const int x = cur % w, y = cur / w;
        const int nx[4] = {x, x - 1, x + 1, x};
        const int ny[4] = {y - 1, y, y, y + 1};
        for (int k = 0; k < 4; ++k) {
            if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
            const std::int32_t nb = ny[k] * w + nx[k];
            if (source[nb] != -1 || !mask_set(component_mask.pixels()[nb])) continue;
            source[nb] = source[cur];
            filled[nb] = 1;
            queue.push_back(nb);
        }
    }

    RasterImage out = component;
    for (std::size_t i = 0; i < n; ++i)
        if (filled[i]) out.pixels()[i] = component.pixels()[static_cast<std::size_t>(source[i])];

    if (options.smooth) {
        const RasterImage base = out;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!filled[static_cast<std::size_t>(y) * w + x]) continue;
                int sum[4] = {0, 0, 0, 0}, count = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (!base.contains(x + dx, y + dy) || !mask_set(component_mask, x + dx, y + dy)) continue;
                        const Rgba p = base.at(x + dx, y + dy);
                        sum[0] += p.r, sum[1] += p.g, sum[2] += p.b, sum[3] += p.a;
                        ++count;
                    }
                auto avg = [&](int s) { return static_cast<std::uint8_t>((2 * s + count) / (2 * count)); };
                out.at(x, y) = {avg(sum[0]), avg(sum[1]), avg(sum[2]), avg(sum[3])};
            }
    }
    return out;
}

namespace {

struct HueSat {
    double hue = 0.0;  // sector units in [0, 6)
    double sat = 0.0;
};

HueSat hue_sat(Rgb c) {
    const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double d = mx - mn;
    if (d == 0.0) return {};
    const double l = (mx + mn) / 2.0;
    HueSat hs;
    hs.sat = d / (1.0 - std::abs(2.0 * l - 1.0));
    if (mx == r)
        hs.hue = std::fmod((g - b) / d + 6.0, 6.0);
    else if (mx == g)
        hs.hue = (b - r) / d + 2.0;
    else
        hs.hue = (r - g) / d + 4.0;
    return hs;
}

Rgba with_hue_sat(Rgba p, const HueSat& hs) {
    const int sum = std::max({p.r, p.g, p.b}) + std::min({p.r, p.g, p.b});
    const double l = sum / 510.0;
    const double chroma = (1.0 - std::abs(2.0 * l - 1.0)) * hs.sat * 255.0;
    const double min_real = sum / 2.0 - chroma / 2.0;
    const double x = chroma * (1.0 - std::abs(std::fmod(hs.hue, 2.0) - 1.0));
    const int lo = std::min(static_cast<int>(std::floor(min_real + 0.5)), sum / 2);
    const int hi = sum - lo;
    const int mid = std::clamp(static_cast<int>(std::floor(min_real + x + 0.5)), lo, hi);
    const auto L = static_cast<std::uint8_t>(lo), M = static_cast<std::uint8_t>(mid), H = static_cast<std::uint8_t>(hi);
    switch (static_cast<int>(hs.hue) % 6) {
        case 0: return {H, M, L, p.a};
        case 1: return {M, H, L, p.a};
        case 2: return {L, H, M, p.a};
        case 3: return {L, M, H, p.a};
        case 4: return {M, L, H, p.a};
        default: return {H, L, M, p.a};
    }
}

}  // namespace

RasterImage recolor_region(const RasterImage& image, const RasterImage& mask, Rgb target) {
    require_same_size(image, mask, "recolor_region");
    const HueSat hs = hue_sat(target);
    RasterImage out = image;
    for (std::size_t i = 0; i < image.pixels().size(); ++i)
        if (mask_set(mask.pixels()[i])) out.pixels()[i] = with_hue_sat(image.pixels()[i], hs);
    return out;
}

}  // namespace toonforge
