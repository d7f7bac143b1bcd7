#include "support.hpp"
#include "oracles.hpp"

#include "toonforge/composer.hpp"
#include "toonforge/paint.hpp"

#include <doctest.h>

#include <algorithm>

using namespace toonforge;

namespace {

TemplateLayer rect_layer(int w, int h, Rect r, std::string name = "top") {
    TemplateLayer l;
    l.name = std::move(name);
    l.slot = l.name;
    l.contour_mask = RasterImage(w, h);
    l.line_art = RasterImage(w, h);
    for (int y = r.y0; y < r.y1; ++y)
        for (int x = r.x0; x < r.x1; ++x) l.contour_mask.at(x, y) = kMaskOn;
    return l;
}

int lightness2(Rgba p) { return std::max({p.r, p.g, p.b}) + std::min({p.r, p.g, p.b}); }

}  // namespace

TEST_CASE("flat fill paints exactly the interior with the base color") {
    const TemplateLayer l = rect_layer(32, 32, {4, 6, 20, 30});
    LayerStyle st;
    st.base = {10, 200, 30};
    const RasterImage img = paint_layer(l, st, {0, 0, 0}, 5);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            CHECK(img.at(x, y) == (mask_set(l.contour_mask, x, y) ? Rgba{10, 200, 30, 255} : Rgba{}));
}

TEST_CASE("stripes of width 8 over a 64 px rectangle alternate per column") {
    const TemplateLayer l = rect_layer(100, 10, {20, 0, 84, 10});
    LayerStyle st;
    st.pattern = Pattern::vertical_stripes;
    st.base = {200, 0, 0};
    st.secondary = {0, 0, 200};
    st.stripe_width = 8;
    const RasterImage img = paint_layer(l, st, {0, 0, 0}, 1);
    int a_stripes = 0, b_stripes = 0;
    for (int s = 0; s < 8; ++s) {
        const Rgb expected = s % 2 == 0 ? st.base : st.secondary;
        for (int x = 20 + 8 * s; x < 20 + 8 * (s + 1); ++x)
            for (int y = 0; y < 10; ++y) REQUIRE(img.at(x, y).rgb() == expected);
        (s % 2 == 0 ? a_stripes : b_stripes)++;
    }
    CHECK(a_stripes == 4);
    CHECK(b_stripes == 4);
}

TEST_CASE("synthesize_appearance is deterministic and stays inside the masks") {
    const auto& c = testing::default_catalog();
    const TemplateSheet sheet = compose_template(default_selection(c, 4), c);
    StyleSpec style;
    style.layers["top"] = {{200, 60, 60}, {250, 250, 250}, Pattern::polka_dot, 8, 5};
    style.layers["back_hair"] = {{90, 60, 40}, {40, 20, 10}, Pattern::gradient, 8, 6};
    style.layers["pants"] = {{40, 40, 90}, {90, 90, 140}, Pattern::vertical_stripes, 6, 6};
    const Appearance a = synthesize_appearance(sheet, style, 11);
    const Appearance b = synthesize_appearance(sheet, style, 11);
    CHECK(a.flattened == b.flattened);
    CHECK(a.layers == b.layers);
    REQUIRE(a.layers.size() == sheet.layers.size());
    for (std::size_t i = 0; i < sheet.layers.size(); ++i)
        for (std::size_t p = 0; p < a.layers[i].pixels().size(); ++p)
            if (a.layers[i].pixels()[p].a != 0) REQUIRE(mask_set(sheet.layers[i].contour_mask.pixels()[p]));

    StyleSpec bad = style;
    bad.layers["top"].dot_radius = 0;
    CHECK_THROWS_AS(synthesize_appearance(sheet, bad, 1), PaintError);
}

TEST_CASE("extract_component and erase_region match per-pixel selection") {
    std::mt19937_64 rng(17);
    const RasterImage img = oracle::random_image(rng, 24, 24);
    RasterImage checker(24, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) checker.at(x, y) = (x + y) % 2 ? kMaskOn : kMaskOff;
    const RasterImage full(24, 24, kMaskOn), none(24, 24);

    CHECK(extract_component(img, full) == img);
    CHECK(extract_component(img, none) == none);
    CHECK(erase_region(img, none) == img);
    CHECK(erase_region(img, full) == none);

    for (const RasterImage& m : {checker, oracle::random_mask(rng, 24, 24, 0.3)}) {
        const RasterImage e = extract_component(img, m);
        const RasterImage r = erase_region(img, m);
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x) {
                const bool on = m.at(x, y).a >= 128;
                CHECK(e.at(x, y) == (on ? img.at(x, y) : Rgba{}));
                CHECK(r.at(x, y) == (on ? Rgba{} : img.at(x, y)));
            }
    }
    CHECK_THROWS_AS(extract_component(img, RasterImage(3, 3)), ImageError);
    CHECK_THROWS_AS(erase_region(img, RasterImage(3, 3)), ImageError);
}

TEST_CASE("repair_occlusion: simple cases") {
    RasterImage strip(3, 1, kMaskOn);
    RasterImage comp(3, 1);
    comp.at(0, 0) = {255, 0, 0, 255};
    RasterImage occ(3, 1);
    occ.at(1, 0) = kMaskOn;
    occ.at(2, 0) = kMaskOn;
    const RasterImage out = repair_occlusion(comp, strip, occ);
    for (int x = 0; x < 3; ++x) CHECK(out.at(x, 0) == Rgba{255, 0, 0, 255});

    std::mt19937_64 rng(2);
    const RasterImage img = oracle::random_image(rng, 8, 8);
    const RasterImage m = oracle::random_mask(rng, 8, 8, 0.7);
    CHECK(repair_occlusion(img, m, RasterImage(8, 8)) == img);
    CHECK_THROWS_WITH_AS(repair_occlusion(img, m, RasterImage(8, 8, kMaskOn)), doctest::Contains("fully occluded"),
                         PaintError);
    CHECK_THROWS_AS(repair_occlusion(img, m, RasterImage(4, 4)), ImageError);
}

TEST_CASE("repair_occlusion equals the BFS oracle on random instances") {
    std::mt19937_64 rng(2024);
    std::size_t checked = 0;
    while (checked < 1000) {
        const RasterImage img = oracle::random_image(rng, 16, 16);
        const RasterImage cmask = oracle::random_mask(rng, 16, 16, 0.75);
        const RasterImage occ = oracle::random_mask(rng, 16, 16, 0.5);
        if (count_set(mask_subtract(cmask, occ)) == 0) continue;
        const RasterImage out = repair_occlusion(img, cmask, occ);
        const RasterImage expected = oracle::repair(img, cmask, occ);
        REQUIRE(out == expected);
        // nothing outside component & occluder changes
        for (std::size_t i = 0; i < img.pixels().size(); ++i)
            if (!(mask_set(cmask.pixels()[i]) && mask_set(occ.pixels()[i]))) REQUIRE(out.pixels()[i] == img.pixels()[i]);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("repair_occlusion never leaks across islands") {
    // left island: visible red column; right island: fully occluded, nothing may reach it
    RasterImage cmask(9, 5), occ(9, 5), img(9, 5);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 4; ++x) cmask.at(x, y) = kMaskOn;
        for (int x = 5; x < 9; ++x) cmask.at(x, y) = kMaskOn;
        for (int x = 1; x < 9; ++x) occ.at(x, y) = kMaskOn;
        img.at(0, y) = {255, 0, 0, 255};
        for (int x = 5; x < 9; ++x) img.at(x, y) = {0, 0, 255, 255};
    }
    const RasterImage out = repair_occlusion(img, cmask, occ);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 4; ++x) CHECK(out.at(x, y) == Rgba{255, 0, 0, 255});
        for (int x = 5; x < 9; ++x) CHECK(out.at(x, y) == Rgba{0, 0, 255, 255});
    }

    // two islands, each with its own seed color: fills stay on their island
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        RasterImage m(12, 6), o = oracle::random_mask(rng, 12, 6, 0.6), c(12, 6);
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 12; ++x) {
                if (x == 5 || x == 6) continue;
                m.at(x, y) = kMaskOn;
                c.at(x, y) = x < 5 ? Rgba{255, 0, 0, 255} : Rgba{0, 255, 0, 255};
            }
        o.at(0, 0) = kMaskOff;  // each island keeps a visible seed
        o.at(11, 5) = kMaskOff;
        const RasterImage out = repair_occlusion(c, m, o);
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 12; ++x) {
                if (x == 5 || x == 6) continue;
                REQUIRE(out.at(x, y) == c.at(x, y));
            }
    }
}

TEST_CASE("repaired pixels next to a seed copy it exactly") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const RasterImage img = oracle::random_image(rng, 16, 16);
        const RasterImage cmask = oracle::random_mask(rng, 16, 16, 0.8);
        const RasterImage occ = oracle::random_mask(rng, 16, 16, 0.5);
        if (count_set(mask_subtract(cmask, occ)) == 0) continue;
        const RasterImage out = repair_occlusion(img, cmask, occ);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                if (!(mask_set(cmask, x, y) && mask_set(occ, x, y))) continue;
                // neighbours at geodesic distance 1 in (y, x) order; the first visible one is the seed
                const int nx[4] = {x, x - 1, x + 1, x};
                const int ny[4] = {y - 1, y, y, y + 1};
                for (int k = 0; k < 4; ++k) {
                    if (!cmask.contains(nx[k], ny[k]) || !mask_set(cmask, nx[k], ny[k]) || mask_set(occ, nx[k], ny[k]))
                        continue;
                    REQUIRE(out.at(x, y) == img.at(nx[k], ny[k]));
                    break;
                }
            }
    }
}

TEST_CASE("repair smoothing touches only filled pixels") {
    std::mt19937_64 rng(12);
    const RasterImage img = oracle::random_image(rng, 16, 16);
    const RasterImage cmask = oracle::random_mask(rng, 16, 16, 0.8);
    const RasterImage occ = oracle::random_mask(rng, 16, 16, 0.4);
    const RasterImage out = repair_occlusion(img, cmask, occ, {.smooth = true});
    for (std::size_t i = 0; i < img.pixels().size(); ++i)
        if (!(mask_set(cmask.pixels()[i]) && mask_set(occ.pixels()[i]))) CHECK(out.pixels()[i] == img.pixels()[i]);
}

TEST_CASE("recolor_region") {
    std::mt19937_64 rng(44);
    const RasterImage img = oracle::random_image(rng, 16, 16);
    CHECK(recolor_region(img, RasterImage(16, 16), {255, 0, 0}) == img);
    CHECK_THROWS_AS(recolor_region(img, RasterImage(2, 2), {255, 0, 0}), ImageError);

    // gray pixels keep their lightness under any target hue
    RasterImage gray(256, 1);
    for (int v = 0; v < 256; ++v) gray.at(v, 0) = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v),
                                                   static_cast<std::uint8_t>(v), 200};
    for (Rgb target : {Rgb{255, 0, 0}, Rgb{20, 180, 90}, Rgb{60, 60, 200}}) {
        const RasterImage out = recolor_region(gray, RasterImage(256, 1, kMaskOn), target);
        for (int v = 0; v < 256; ++v) {
            CHECK(lightness2(out.at(v, 0)) == 2 * v);
            CHECK(out.at(v, 0).a == 200);
        }
    }

    // lightness everywhere, alpha everywhere, untouched outside the mask
    const RasterImage mask = oracle::random_mask(rng, 16, 16, 0.5);
    const Rgb target{240, 140, 180};
    const RasterImage once = recolor_region(img, mask, target);
    for (std::size_t i = 0; i < img.pixels().size(); ++i) {
        CHECK(once.pixels()[i].a == img.pixels()[i].a);
        CHECK(lightness2(once.pixels()[i]) == lightness2(img.pixels()[i]));
        if (!mask_set(mask.pixels()[i])) CHECK(once.pixels()[i] == img.pixels()[i]);
    }
    // a second pass to the same target changes nothing beyond 1/255
    const RasterImage twice = recolor_region(once, mask, target);
    for (std::size_t i = 0; i < img.pixels().size(); ++i) {
        const Rgba a = once.pixels()[i], b = twice.pixels()[i];
        CHECK(std::abs(a.r - b.r) <= 1);
        CHECK(std::abs(a.g - b.g) <= 1);
        CHECK(std::abs(a.b - b.b) <= 1);
    }
}
