// Regenerates the placeholder art of the default component catalog.
//
//   make_catalog <out_dir>
//
// Every mask is a union of simple filled shapes on a 1024x1024 canvas; line
// art is the 3 px inner band of the mask. The output is checked in under
// data/catalog and only needs regenerating when the shapes below change.

#include "toonforge/image.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

using namespace toonforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kCanvas = 1024;

// A shape is a predicate over pixel centers.
using Shape = std::function<bool(double, double)>;

Shape ellipse(double cx, double cy, double rx, double ry) {
    return [=](double x, double y) {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        return dx * dx + dy * dy <= 1.0;
    };
}

Shape rect(double x0, double y0, double x1, double y1) {
    return [=](double x, double y) { return x >= x0 && x < x1 && y >= y0 && y < y1; };
}

Shape polygon(std::vector<std::pair<double, double>> pts) {
    return [pts = std::move(pts)](double x, double y) {
        bool inside = false;
        for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
            const auto [xi, yi] = pts[i];
            const auto [xj, yj] = pts[j];
            if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
        }
        return inside;
    };
}

Shape any_of(std::vector<Shape> parts) {
    return [parts = std::move(parts)](double x, double y) {
        for (const auto& p : parts)
            if (p(x, y)) return true;
        return false;
    };
}

Shape minus(Shape a, Shape b) {
    return [=](double x, double y) { return a(x, y) && !b(x, y); };
}

// Mirror a shape drawn on the left half onto the right half as well.
Shape mirrored(Shape s) {
    return [=](double x, double y) { return s(x, y) || s(kCanvas - x, y); };
}

RasterImage draw(const Shape& s) {
    RasterImage m(kCanvas, kCanvas);
    for (int y = 0; y < kCanvas; ++y)
        for (int x = 0; x < kCanvas; ++x)
            if (s(x + 0.5, y + 0.5)) m.at(x, y) = kMaskOn;
    return m;
}

RasterImage outline(const RasterImage& mask, int width = 3) {
    RasterImage line(kCanvas, kCanvas);
    for (int y = 0; y < kCanvas; ++y)
        for (int x = 0; x < kCanvas; ++x) {
            if (!mask_set(mask, x, y)) continue;
            bool edge = false;
            for (int dy = -width + 1; dy < width && !edge; ++dy)
                for (int dx = -width + 1; dx < width && !edge; ++dx)
                    if (std::abs(dx) + std::abs(dy) < width)
                        edge = !mask.contains(x + dx, y + dy) || !mask_set(mask, x + dx, y + dy);
            if (edge) line.at(x, y) = {0, 0, 0, 255};
        }
    return line;
}

struct Writer {
    fs::path dir;
    json variants = json::array();
    json base_layers = json::array();

    std::pair<std::string, std::string> save(const std::string& stem, const RasterImage& mask) {
        const std::string m = "masks/" + stem + ".png";
        const std::string l = "lines/" + stem + ".png";
        write_png(mask, dir / m);
        write_png(outline(mask), dir / l);
        return {m, l};
    }

    void variant(const std::string& slot, const std::string& id, const Shape& s) {
        const auto [m, l] = save(id, draw(s));
        variants.push_back({{"id", id}, {"slot", slot}, {"mask", m}, {"line_art", l}, {"anchor", {0, 0}}});
    }

    void derived(const std::string& slot, const std::string& id, const std::string& parent, const Shape& clip) {
        const std::string c = "clips/" + id + ".png";
        write_png(draw(clip), dir / c);
        variants.push_back({{"id", id}, {"slot", slot}, {"derived_from", parent}, {"clip", c}});
    }

    void base(const std::string& name, int z, const Shape& s, const std::string& color, std::vector<std::string> rig,
              const std::string& color_attribute = {}) {
        const auto [m, l] = save("base_" + name, draw(s));
        json b = {{"name", name}, {"z", z}, {"mask", m}, {"line_art", l}, {"color", color}, {"rig", rig}};
        if (!color_attribute.empty()) b["color_attribute"] = color_attribute;
        base_layers.push_back(b);
    }
};

// Figure landmarks (canvas px).
constexpr double kCx = 512;         // vertical axis
constexpr double kHeadY = 300;      // head center
constexpr double kWaistY = 730;
constexpr double kFeetY = 990;

Shape above(double y) { return rect(0, 0, kCanvas, y); }

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_catalog <out_dir>\n";
        return 2;
    }
    Writer w{argv[1]};
    for (const char* sub : {"masks", "lines", "clips"}) fs::create_directories(w.dir / sub);

    const Shape head_outer = ellipse(kCx, kHeadY - 10, 175, 175);

    // base layers
    const Shape arms = mirrored(any_of({polygon({{392, 505}, {432, 505}, {428, 720}, {384, 720}}), ellipse(404, 735, 24, 22)}));
    const Shape legs = mirrored(rect(446, 720, 504, 965));
    w.base("body", 20,
           any_of({rect(488, 430, 536, 510), polygon({{430, 495}, {594, 495}, {604, 740}, {420, 740}}), arms, legs}),
           "#f5d7c0", {"body"});
    w.base("face", 30, any_of({ellipse(kCx, kHeadY + 10, 140, 158), mirrored(ellipse(376, 320, 16, 28))}), "#f8dcc8",
           {"head"});
    w.base("eyes", 31, mirrored(ellipse(458, 330, 24, 32)), "#7a4a2a", {"head", "eyes"}, "eye_color");
    w.base("mouth", 32, ellipse(kCx, 410, 26, 9), "#c8505a", {"head", "mouth"});

    // back hair
    const Shape bh_long = any_of({head_outer, rect(340, kHeadY, 684, 820), ellipse(kCx, 820, 172, 40)});
    w.variant("back_hair", "bh_long", bh_long);
    w.derived("back_hair", "bh_short", "bh_long", above(480));
    w.variant("back_hair", "bh_pony",
              any_of({head_outer, polygon({{600, 200}, {700, 230}, {720, 520}, {680, 700}, {630, 520}})}));
    w.variant("back_hair", "bh_twin",
              any_of({head_outer, mirrored(polygon({{360, 220}, {300, 300}, {270, 560}, {300, 760}, {350, 560}}))}));
    w.derived("back_hair", "bh_bob", "bh_long", above(600));

    // mid hair: side locks framing the face
    const Shape mh_long = mirrored(polygon({{352, 240}, {396, 240}, {392, 700}, {356, 700}}));
    w.variant("mid_hair", "mh_long", mh_long);
    w.derived("mid_hair", "mh_short", "mh_long", above(470));
    w.variant("mid_hair", "mh_braid",
              mirrored(any_of({rect(362, 240, 388, 420), ellipse(375, 450, 20, 26), ellipse(375, 500, 18, 24),
                               ellipse(375, 548, 16, 22), ellipse(375, 592, 14, 20)})));

    // front hair: bangs over the forehead, always inside the head outline
    const Shape crown = ellipse(kCx, kHeadY - 10, 168, 168);
    w.variant("front_hair", "fh_blunt", minus(crown, rect(0, 262, kCanvas, kCanvas)));
    w.variant("front_hair", "fh_swept",
              minus(crown, polygon({{300, 300}, {420, 230}, {700, 175}, {760, 330}, {760, 1024}, {300, 1024}})));
    w.variant("front_hair", "fh_parted",
              minus(crown, any_of({polygon({{512, 170}, {380, 290}, {640, 290}}), rect(0, 290, kCanvas, kCanvas)})));

    // tops
    const Shape torso = polygon({{428, 488}, {596, 488}, {606, kWaistY + 10}, {418, kWaistY + 10}});
    w.variant("top", "top_hoodie", any_of({torso, ellipse(kCx, 490, 96, 34), rect(418, 700, 606, 770)}));
    w.variant("top", "top_shirt", minus(torso, polygon({{488, 488}, {536, 488}, {512, 540}})));
    w.variant("top", "top_tshirt", minus(torso, ellipse(kCx, 488, 30, 20)));
    w.variant("top", "top_jacket", any_of({torso, polygon({{418, 740}, {606, 740}, {616, 800}, {408, 800}})}));
    w.variant("top", "top_sweater", any_of({minus(torso, ellipse(kCx, 488, 22, 12)), rect(418, 730, 606, 760)}));

    // sleeves; the slot splits them into left/right layers
    const Shape sl_long = mirrored(polygon({{386, 492}, {438, 492}, {434, 712}, {378, 712}}));
    w.variant("sleeves", "sl_long", sl_long);
    w.derived("sleeves", "sl_short", "sl_long", above(590));
    w.variant("sleeves", "sl_none", mirrored(ellipse(418, 508, 26, 18)));
    w.variant("sleeves", "sl_puff", mirrored(ellipse(408, 540, 42, 50)));
    w.derived("sleeves", "sl_rolled", "sl_long", above(650));
    w.variant("sleeves", "sl_wide", mirrored(polygon({{392, 492}, {438, 492}, {440, 700}, {352, 720}})));

    // pants
    const Shape pt_jeans = any_of({rect(436, 715, 588, 790), mirrored(rect(440, 720, 510, 950))});
    w.variant("pants", "pt_jeans", pt_jeans);
    w.derived("pants", "pt_shorts", "pt_jeans", above(820));
    w.variant("pants", "pt_trousers", any_of({rect(432, 715, 592, 790), mirrored(polygon({{432, 720}, {510, 720}, {510, 955}, {426, 955}}))}));
    w.variant("pants", "pt_leggings", any_of({rect(440, 715, 584, 770), mirrored(rect(444, 720, 506, 940))}));
    w.variant("pants", "pt_cargo",
              any_of({rect(432, 715, 592, 790), mirrored(any_of({rect(436, 720, 510, 950), rect(424, 800, 446, 860)}))}));

    // skirts
    w.variant("skirt", "sk_pleated", polygon({{436, 715}, {588, 715}, {624, 840}, {400, 840}}));
    w.variant("skirt", "sk_long", polygon({{436, 715}, {588, 715}, {630, 930}, {394, 930}}));
    w.derived("skirt", "sk_mini", "sk_long", above(790));
    w.variant("skirt", "sk_aline", polygon({{440, 715}, {584, 715}, {640, 880}, {384, 880}}));
    w.variant("skirt", "sk_ruffled",
              any_of({polygon({{436, 715}, {588, 715}, {612, 820}, {412, 820}}), rect(404, 820, 620, 850)}));

    // shoes
    w.variant("shoes", "sh_sneakers", mirrored(any_of({rect(440, 935, 508, kFeetY - 8), ellipse(466, kFeetY - 14, 40, 14)})));
    w.variant("shoes", "sh_boots", mirrored(any_of({rect(440, 880, 508, kFeetY - 10), ellipse(466, kFeetY - 12, 40, 12)})));
    w.variant("shoes", "sh_loafers", mirrored(ellipse(468, kFeetY - 20, 42, 20)));
    w.variant("shoes", "sh_sandals", mirrored(any_of({rect(430, kFeetY - 14, 508, kFeetY - 4), rect(468, 950, 478, kFeetY - 4)})));
    w.variant("shoes", "sh_maryjanes", mirrored(any_of({ellipse(468, kFeetY - 16, 40, 16), rect(446, 950, 500, 958)})));
    w.variant("shoes", "sh_heels", mirrored(any_of({polygon({{440, 945}, {508, 945}, {508, kFeetY - 6}, {440, 975}}), rect(444, 975, 452, kFeetY - 2)})));

    auto slot = [](const std::string& id, int z, const std::string& color, json layers) {
        return json{{"id", id}, {"z_band", z}, {"default_color", color}, {"layers", layers}};
    };
    auto layer = [](const std::string& name, std::vector<std::string> rig) { return json{{"name", name}, {"rig", rig}}; };

    json manifest;
    manifest["format_version"] = 1;
    manifest["canvas"] = {kCanvas, kCanvas};
    manifest["slots"] = {
        slot("back_hair", 10, "#6b4a3a", {layer("back_hair", {"head", "hair_sway"})}),
        slot("mid_hair", 80, "#6b4a3a", {layer("mid_hair", {"head", "hair_sway"})}),
        slot("front_hair", 90, "#6b4a3a", {layer("front_hair", {"head", "hair_sway"})}),
        slot("top", 60, "#e8e4dc", {layer("top", {"body"})}),
        slot("sleeves", 70, "#e8e4dc",
             {json{{"name", "sleeve_left"}, {"region", {0, 0, 512, kCanvas}}, {"rig", {"body"}}},
              json{{"name", "sleeve_right"}, {"region", {512, 0, kCanvas, kCanvas}}, {"rig", {"body"}}}}),
        slot("pants", 50, "#4a6fa5", {layer("pants", {"body"})}),
        slot("skirt", 51, "#b8607a", {layer("skirt", {"body"})}),
        slot("shoes", 40, "#5a4a44", {layer("shoes", {})}),
    };
    manifest["base_layers"] = w.base_layers;
    manifest["variants"] = w.variants;
    manifest["attributes"] = {
        {{"id", "eye_color"}, {"values", {"blue", "green", "brown", "red", "purple", "amber"}}, {"default", "brown"}},
        {{"id", "eyebrows"}, {"values", {"thin", "thick", "arched"}}, {"default", "thin"}},
        {{"id", "face_shape"}, {"values", {"round", "oval", "heart"}}, {"default", "oval"}},
    };
    manifest["exclusive_groups"] = json::array({json::array({"pants", "skirt"})});

    std::ofstream out(w.dir / "catalog.json", std::ios::binary);
    out << manifest.dump(1) << "\n";
    std::cout << "wrote " << w.variants.size() << " variants to " << w.dir.string() << "\n";
}
