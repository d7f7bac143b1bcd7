#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toonforge {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Rgba {
    std::uint8_t r = 0, g = 0, b = 0, a = 0;
    friend bool operator==(const Rgba&, const Rgba&) = default;

    static constexpr Rgba opaque(Rgb c) { return {c.r, c.g, c.b, 255}; }
    constexpr Rgb rgb() const { return {r, g, b}; }
};

struct Size {
    int width = 0;
    int height = 0;
    friend bool operator==(const Size&, const Size&) = default;
};

/// "#rrggbb" <-> Rgb. Parsing accepts upper or lower case hex.
std::string to_hex(Rgb c);
std::optional<Rgb> parse_hex(std::string_view s);

/// Row-major RGBA8 image, sRGB, non-premultiplied.
///
/// Masks are ordinary images: a pixel is "set" when its alpha is >= 128.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, Rgba fill = {});

    int width() const { return width_; }
    int height() const { return height_; }
    Size size() const { return {width_, height_}; }
    bool empty() const { return pixels_.empty(); }

    Rgba& at(int x, int y) { return pixels_[index(x, y)]; }
    const Rgba& at(int x, int y) const { return pixels_[index(x, y)]; }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::vector<Rgba>& pixels() { return pixels_; }
    const std::vector<Rgba>& pixels() const { return pixels_; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Rgba> pixels_;
};

inline bool mask_set(const Rgba& p) { return p.a >= 128; }
inline bool mask_set(const RasterImage& m, int x, int y) { return mask_set(m.at(x, y)); }

inline constexpr Rgba kMaskOn{255, 255, 255, 255};
inline constexpr Rgba kMaskOff{0, 0, 0, 0};

/// Number of set mask pixels.
std::size_t count_set(const RasterImage& mask);

struct Rect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
    bool empty() const { return x1 <= x0 || y1 <= y0; }
    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Bounding box of set pixels; empty Rect when the mask is empty.
Rect mask_bounds(const RasterImage& mask);

RasterImage mask_union(const RasterImage& a, const RasterImage& b);
RasterImage mask_intersect(const RasterImage& a, const RasterImage& b);
RasterImage mask_subtract(const RasterImage& a, const RasterImage& b);

/// Mask of pixels with non-zero alpha.
RasterImage alpha_mask(const RasterImage& image);

/// Shift by an integer offset, cropping at the borders.
RasterImage translate(const RasterImage& image, int dx, int dy);

/// Source-over of `top` (scaled by `opacity`) onto `bottom`, straight alpha,
/// channels quantized with round-half-up.
Rgba blend_over(Rgba bottom, Rgba top, double opacity = 1.0);

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require_same_size(const RasterImage& a, const RasterImage& b, std::string_view what);

// PNG I/O (8-bit RGBA, non-interlaced).
RasterImage read_png(const std::filesystem::path& path);
RasterImage decode_png(const std::vector<std::uint8_t>& bytes);
void write_png(const RasterImage& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const RasterImage& image);

}  // namespace toonforge
