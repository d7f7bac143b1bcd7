#include "toonforge/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace toonforge {

namespace {

struct FixedPoint {
    std::int64_t x = 0, y = 0;
};

// 26.6 fixed point
constexpr std::int64_t kSub = 64;

std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

std::int64_t orient(const FixedPoint& a, const FixedPoint& b, const FixedPoint& p) {
    return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

// With positive orientation in y-down space the interior lies below a
// rightward horizontal edge (top edge) and right of an upward edge (left edge).
bool top_left(const FixedPoint& a, const FixedPoint& b) {
    const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
    return (dy == 0 && dx > 0) || dy < 0;
}

Rgba sample_nearest(const RasterImage& tex, double u, double v) {
    const int tx = std::clamp(static_cast<int>(std::floor(u * tex.width())), 0, tex.width() - 1);
    const int ty = std::clamp(static_cast<int>(std::floor(v * tex.height())), 0, tex.height() - 1);
    return tex.at(tx, ty);
}

Rgba sample_bilinear(const RasterImage& tex, double u, double v) {
    const double fx = u * tex.width() - 0.5, fy = v * tex.height() - 0.5;
    const double x0f = std::floor(fx), y0f = std::floor(fy);
    const double ax = fx - x0f, ay = fy - y0f;
    auto fetch = [&](int x, int y) {
        return tex.at(std::clamp(x, 0, tex.width() - 1), std::clamp(y, 0, tex.height() - 1));
    };
    const int x0 = static_cast<int>(x0f), y0 = static_cast<int>(y0f);
    const Rgba p00 = fetch(x0, y0), p10 = fetch(x0 + 1, y0), p01 = fetch(x0, y0 + 1), p11 = fetch(x0 + 1, y0 + 1);
    auto mix = [&](std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
        const double top = a + ax * (b - a), bottom = c + ax * (d - c);
        return static_cast<std::uint8_t>(std::clamp(std::floor(top + ay * (bottom - top) + 0.5), 0.0, 255.0));
    };
    return {mix(p00.r, p10.r, p01.r, p11.r), mix(p00.g, p10.g, p01.g, p11.g), mix(p00.b, p10.b, p01.b, p11.b),
            mix(p00.a, p10.a, p01.a, p11.a)};
}

void draw_layer(RasterImage& frame, const PosedLayer& layer, double sx, double sy, Sampling sampling) {
    if (!layer.texture || layer.texture->empty() || layer.opacity <= 0.0) return;
    const RasterImage& tex = *layer.texture;
    for (const auto& tri : layer.triangles) {
        FixedPoint p[3];
        Vec2 uv[3];
        for (int i = 0; i < 3; ++i) {
            const Vec2 v = layer.vertices[tri[i]];
            p[i] = {std::llround(v.x * sx * kSub), std::llround(v.y * sy * kSub)};
            uv[i] = layer.uvs[tri[i]];
        }
        std::int64_t area = orient(p[0], p[1], p[2]);
        if (area == 0) continue;
        if (area < 0) {
            std::swap(p[1], p[2]);
            std::swap(uv[1], uv[2]);
            area = -area;
        }
        const bool tl0 = top_left(p[1], p[2]), tl1 = top_left(p[2], p[0]), tl2 = top_left(p[0], p[1]);

        const std::int64_t min_x = std::min({p[0].x, p[1].x, p[2].x}), max_x = std::max({p[0].x, p[1].x, p[2].x});
        const std::int64_t min_y = std::min({p[0].y, p[1].y, p[2].y}), max_y = std::max({p[0].y, p[1].y, p[2].y});
        // pixel px has its center at px*64+32
        const int x0 = static_cast<int>(std::max<std::int64_t>(ceil_div(min_x - kSub / 2, kSub), 0));
        const int x1 = static_cast<int>(std::min<std::int64_t>(floor_div(max_x - kSub / 2, kSub), frame.width() - 1));
        const int y0 = static_cast<int>(std::max<std::int64_t>(ceil_div(min_y - kSub / 2, kSub), 0));
        const int y1 = static_cast<int>(std::min<std::int64_t>(floor_div(max_y - kSub / 2, kSub), frame.height() - 1));
        const double inv_area = 1.0 / static_cast<double>(area);

        for (int py = y0; py <= y1; ++py) {
            const std::int64_t cy = static_cast<std::int64_t>(py) * kSub + kSub / 2;
            for (int px = x0; px <= x1; ++px) {
                const FixedPoint c{static_cast<std::int64_t>(px) * kSub + kSub / 2, cy};
                const std::int64_t w0 = orient(p[1], p[2], c);
                if (w0 < 0 || (w0 == 0 && !tl0)) continue;
                const std::int64_t w1 = orient(p[2], p[0], c);
                if (w1 < 0 || (w1 == 0 && !tl1)) continue;
                const std::int64_t w2 = orient(p[0], p[1], c);
                if (w2 < 0 || (w2 == 0 && !tl2)) continue;
                const double l0 = static_cast<double>(w0) * inv_area, l1 = static_cast<double>(w1) * inv_area,
                             l2 = static_cast<double>(w2) * inv_area;
                const double u = l0 * uv[0].x + l1 * uv[1].x + l2 * uv[2].x;
                const double v = l0 * uv[0].y + l1 * uv[1].y + l2 * uv[2].y;
                const Rgba texel = sampling == Sampling::nearest ? sample_nearest(tex, u, v) : sample_bilinear(tex, u, v);
                if (texel.a == 0) continue;
                frame.at(px, py) = blend_over(frame.at(px, py), texel, layer.opacity);
            }
        }
    }
}

}  // namespace

RasterImage rasterize(const PosedModel& posed, Size viewport, Rgba background, RasterOptions options) {
    if (viewport.width < 1 || viewport.height < 1) throw RenderError("rasterize: viewport must be at least 1x1");
    RasterImage frame(viewport.width, viewport.height, background);
    const double sx = posed.canvas_size.width > 0 ? static_cast<double>(viewport.width) / posed.canvas_size.width : 1.0;
    const double sy = posed.canvas_size.height > 0 ? static_cast<double>(viewport.height) / posed.canvas_size.height : 1.0;
    std::vector<std::size_t> order(posed.layers.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return posed.layers[a].z < posed.layers[b].z; });
    for (std::size_t i : order) draw_layer(frame, posed.layers[i], sx, sy, options.sampling);
    return frame;
}

std::size_t frame_count(double duration, double fps) {
    return static_cast<std::size_t>(std::floor(std::max(0.0, duration) * fps + 1e-9)) + 1;
}

RasterImage clip_frame(const CharacterModel& model, const AnimationClip& clip, double t, Size viewport,
                       Rgba background) {
    return rasterize(apply_parameters(model, sample_clip(clip, t)), viewport, background);
}

std::size_t render_clip(const CharacterModel& model, const AnimationClip& clip, double fps,
                        const std::filesystem::path& out, Size viewport, Rgba background) {
    if (!(fps > 0.0)) throw RenderError("render_clip: fps must be positive");
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec || !std::filesystem::is_directory(out)) throw RenderError("render_clip: cannot create " + out.string());
    const std::size_t n = frame_count(clip.duration, fps);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / fps;
        const RasterImage frame = clip_frame(model, clip, t, viewport, background);
        char name[32];
        std::snprintf(name, sizeof name, "frame_%05zu.png", k);
        try {
            write_png(frame, out / name);
        } catch (const ImageError& e) {
            throw RenderError(std::string("render_clip: ") + e.what());
        }
    }
    return n;
}

}  // namespace toonforge
