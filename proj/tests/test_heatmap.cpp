#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "pvtherm/heatmap.hpp"

using namespace pvtherm;

namespace {

double luma_of(Rgb c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

} // namespace

TEST_CASE("colormap validation") {
    CHECK_THROWS_AS(ColorMap({{0.0, Rgb{0, 0, 0}}}), InvalidArgument);
    CHECK_THROWS_AS(ColorMap({{0.1, Rgb{}}, {1.0, Rgb{}}}), InvalidArgument);
    CHECK_THROWS_AS(ColorMap({{0.0, Rgb{}}, {0.9, Rgb{}}}), InvalidArgument);
    CHECK_THROWS_AS(ColorMap({{0.0, Rgb{}}, {0.5, Rgb{}}, {0.5, Rgb{}}, {1.0, Rgb{}}}),
                    InvalidArgument);
    CHECK_NOTHROW(ColorMap({{0.0, Rgb{}}, {1.0, Rgb{255, 255, 255}}}));
}

TEST_CASE("colormap parsing") {
    std::istringstream in("# gradient\n0 0 0 0\n\n0.5 255 0 0\n1 255 255 0\n");
    const ColorMap cmap = ColorMap::parse(in);
    REQUIRE(cmap.stops().size() == 3);
    CHECK(cmap.stops()[1].position == 0.5);
    CHECK(cmap.stops()[1].color == Rgb{255, 0, 0});

    std::istringstream bad("0 0 0\n1 1 1 1\n");
    CHECK_THROWS_AS(ColorMap::parse(bad), InvalidArgument);
    std::istringstream range("0 0 0 300\n1 1 1 1\n");
    CHECK_THROWS_AS(ColorMap::parse(range), InvalidArgument);
}

TEST_CASE("render_heatmap endpoints") {
    const ColorMap cmap = ColorMap::default_map();

    const RgbImage black = render_heatmap(GrayImage(4, 4, 0), cmap);
    for (const Rgb& px : black.cells())
        CHECK(px == Rgb{0, 0, 0});

    const RgbImage top = render_heatmap(GrayImage(2, 2, 255), cmap);
    for (const Rgb& px : top.cells())
        CHECK(px == Rgb{255, 255, 0}); // the position-1.0 color exactly
}

TEST_CASE("mid level through a black-to-white gradient") {
    const ColorMap bw({{0.0, Rgb{0, 0, 0}}, {1.0, Rgb{255, 255, 255}}});
    // level 128 of 256: 255 * 128/255 rounds to 128.
    const RgbImage mid = render_heatmap(GrayImage(1, 1, 128), bw);
    CHECK(mid[0] == Rgb{128, 128, 128});
}

TEST_CASE("default colormap luma never decreases across the 256 levels") {
    const ColorMap cmap = ColorMap::default_map();
    double prev = -1.0;
    for (int level = 0; level < 256; ++level) {
        const double lum = luma_of(cmap.sample(level / 255.0));
        CHECK(lum >= prev);
        prev = lum;
    }
}

TEST_CASE("deterioration_intensity masks out intact pixels") {
    const GrayImage img(4, 4, 200);

    const GrayImage none = deterioration_intensity(img, BinaryMask(4, 4, 0));
    for (int v : none.levels().cells())
        CHECK(v == 0);

    const GrayImage all = deterioration_intensity(img, BinaryMask(4, 4, 1));
    CHECK(all.levels() == img.levels());

    Grid<std::uint8_t> checker(4, 4, std::uint8_t{0});
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            checker.at(r, c) = static_cast<std::uint8_t>((r + c) % 2);
    const GrayImage mixed = deterioration_intensity(img, BinaryMask(std::move(checker)));
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            CHECK(mixed.at(r, c) == ((r + c) % 2 ? 200 : 0));
}

TEST_CASE("deterioration_intensity rejects mismatched dimensions") {
    CHECK_THROWS_AS(deterioration_intensity(GrayImage(3, 3), BinaryMask(3, 4)),
                    DimensionMismatch);
}

TEST_CASE("masked-out pixels render exactly the position-0 color") {
    const ColorMap cmap = ColorMap::default_map();
    const GrayImage img(3, 3, 250);
    Grid<std::uint8_t> bits(3, 3, std::uint8_t{1});
    bits.at(1, 1) = 0;
    const GrayImage intensity = deterioration_intensity(img, BinaryMask(std::move(bits)));
    const RgbImage rendered = render_heatmap(intensity, cmap);
    CHECK(rendered.at(1, 1) == cmap.sample(0.0));
    CHECK(rendered.at(1, 1) == Rgb{0, 0, 0});
    CHECK(rendered.at(0, 0) != Rgb{0, 0, 0});
}
