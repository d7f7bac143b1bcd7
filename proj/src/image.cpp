#include "toonforge/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace toonforge {

std::string to_hex(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

std::optional<Rgb> parse_hex(std::string_view s) {
    if (s.size() != 7 || s[0] != '#') return std::nullopt;
    auto nibble = [](char ch) -> int {
        if (ch >= '0' && ch <= '9') return ch - '0';
        if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
        if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
        return -1;
    };
    std::uint8_t v[3];
    for (int i = 0; i < 3; ++i) {
        int hi = nibble(s[1 + 2 * i]), lo = nibble(s[2 + 2 * i]);
        if (hi < 0 || lo < 0) return std::nullopt;
        v[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return Rgb{v[0], v[1], v[2]};
}

RasterImage::RasterImage(int width, int height, Rgba fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw ImageError("image dimensions must be >= 1");
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

std::size_t count_set(const RasterImage& mask) {
    return static_cast<std::size_t>(
        std::count_if(mask.pixels().begin(), mask.pixels().end(), [](const Rgba& p) { return mask_set(p); }));
}

Rect mask_bounds(const RasterImage& mask) {
    Rect r{mask.width(), mask.height(), 0, 0};
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask_set(mask, x, y)) {
                r.x0 = std::min(r.x0, x);
                r.y0 = std::min(r.y0, y);
                r.x1 = std::max(r.x1, x + 1);
                r.y1 = std::max(r.y1, y + 1);
            }
    if (r.x1 <= r.x0) return {};
    return r;
}

void require_same_size(const RasterImage& a, const RasterImage& b, std::string_view what) {
    if (a.size() != b.size())
        throw ImageError(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()) + ")");
}

namespace {

template <class Op>
RasterImage combine(const RasterImage& a, const RasterImage& b, std::string_view what, Op op) {
    require_same_size(a, b, what);
    RasterImage out(a.width(), a.height());
    for (std::size_t i = 0; i < a.pixels().size(); ++i)
        out.pixels()[i] = op(mask_set(a.pixels()[i]), mask_set(b.pixels()[i])) ? kMaskOn : kMaskOff;
    return out;
}

}  // namespace

RasterImage mask_union(const RasterImage& a, const RasterImage& b) {
    return combine(a, b, "mask_union", [](bool x, bool y) { return x || y; });
}
RasterImage mask_intersect(const RasterImage& a, const RasterImage& b) {
    return combine(a, b, "mask_intersect", [](bool x, bool y) { return x && y; });
}
RasterImage mask_subtract(const RasterImage& a, const RasterImage& b) {
    return combine(a, b, "mask_subtract", [](bool x, bool y) { return x && !y; });
}

RasterImage alpha_mask(const RasterImage& image) {
    RasterImage out(image.width(), image.height());
    for (std::size_t i = 0; i < image.pixels().size(); ++i)
        out.pixels()[i] = image.pixels()[i].a != 0 ? kMaskOn : kMaskOff;
    return out;
}

RasterImage translate(const RasterImage& image, int dx, int dy) {
    RasterImage out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (out.contains(x + dx, y + dy)) out.at(x + dx, y + dy) = image.at(x, y);
    return out;
}

Rgba blend_over(Rgba bottom, Rgba top, double opacity) {
    const double sa = top.a / 255.0 * opacity;
    if (sa <= 0.0) return bottom;
    const double da = bottom.a / 255.0;
    const double oa = sa + da * (1.0 - sa);
    auto q = [](double v) {
        double r = std::floor(v + 0.5);
        return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
    };
    auto channel = [&](std::uint8_t s, std::uint8_t d) { return q((s * sa + d * da * (1.0 - sa)) / oa); };
    return {channel(top.r, bottom.r), channel(top.g, bottom.g), channel(top.b, bottom.b), q(oa * 255.0)};
}

RasterImage decode_png(const std::vector<std::uint8_t>& bytes) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
        throw ImageError(std::string("png decode: ") + img.message);
    img.format = PNG_FORMAT_RGBA;
    if (img.width < 1 || img.height < 1) {
        png_image_free(&img);
        throw ImageError("png decode: empty image");
    }
    RasterImage out(static_cast<int>(img.width), static_cast<int>(img.height));
    if (!png_image_finish_read(&img, nullptr, out.pixels().data(), 0, nullptr)) {
        std::string msg = img.message;
        png_image_free(&img);
        throw ImageError("png decode: " + msg);
    }
    return out;
}

RasterImage read_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        return decode_png(bytes);
    } catch (const ImageError& e) {
        throw ImageError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
    if (image.empty()) throw ImageError("png encode: empty image");
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width());
    img.height = static_cast<png_uint_32>(image.height());
    img.format = PNG_FORMAT_RGBA;
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(img, size, 0, image.pixels().data(), 0, nullptr))
        throw ImageError(std::string("png encode: ") + img.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels().data(), 0, nullptr))
        throw ImageError(std::string("png encode: ") + img.message);
    out.resize(size);
    return out;
}

void write_png(const RasterImage& image, const std::filesystem::path& path) {
    auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ImageError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageError("cannot write " + path.string());
}

}  // namespace toonforge
