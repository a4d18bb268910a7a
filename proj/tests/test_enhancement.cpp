#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "pvtherm/enhancement.hpp"

using namespace pvtherm;

namespace {

GrayImage gray_row(std::vector<int> levels, int depth = 256) {
    const int w = static_cast<int>(levels.size());
    return GrayImage(Grid<int>(w, 1, std::move(levels)), depth);
}

} // namespace

TEST_CASE("exponential stretch endpoints and midpoint") {
    // x_min -> 0, x_max -> round(255*(1-1/e)) = round(161.19) = 161, and the
    // exact midpoint of [0, 254] -> round(255*(1-e^-0.5)) = round(100.33) = 100.
    const GrayImage out = exponential_stretch(gray_row({0, 127, 254}));
    CHECK(out.levels().cells() == std::vector<int>{0, 100, 161});
    CHECK(out.depth() == 256);

    // Level 128 of [0, 255] sits just past the midpoint: u = 128/255.
    const GrayImage full = exponential_stretch(gray_row({0, 128, 255}));
    CHECK(full.levels().cells() == std::vector<int>{0, 101, 161});
}

TEST_CASE("exponential stretch uses observed extremes, not [0, L-1]") {
    const GrayImage out = exponential_stretch(gray_row({40, 90, 140}));
    CHECK(out.levels()[0] == 0);                    // observed minimum
    CHECK(out.levels()[2] == 161);                  // observed maximum
    CHECK(out.levels()[1] == round_half_up(255.0 * (1.0 - std::exp(-0.5))));
}

TEST_CASE("constant image raises DegenerateRange") {
    CHECK_THROWS_AS(exponential_stretch(GrayImage(4, 4, 17)), DegenerateRange);
    CHECK_THROWS_AS(stretch_then_normalize(GrayImage(4, 4, 17)), DegenerateRange);
}

TEST_CASE("stretch_then_normalize spans the full range") {
    const GrayImage two = stretch_then_normalize(gray_row({30, 200}));
    CHECK(two.levels().cells() == std::vector<int>{0, 255});

    const GrayImage three = stretch_then_normalize(gray_row({0, 128, 255}));
    CHECK(three.levels().cells() == std::vector<int>{0, 159, 255});
}

TEST_CASE("normalized stretch hits 0 and L-1 on random images") {
    std::mt19937 rng(101);
    std::uniform_int_distribution<int> level(0, 255);
    for (int iter = 0; iter < 30; ++iter) {
        std::vector<int> levels(24);
        for (int& v : levels) v = level(rng);
        if (*std::min_element(levels.begin(), levels.end()) ==
            *std::max_element(levels.begin(), levels.end()))
            continue;
        const GrayImage out = stretch_then_normalize(GrayImage(Grid<int>(6, 4, levels), 256));
        const auto [lo, hi] = std::minmax_element(out.levels().cells().begin(),
                                                  out.levels().cells().end());
        CHECK(*lo == 0);
        CHECK(*hi == 255);
    }
}

TEST_CASE("stretch is monotone over all 256 levels") {
    std::vector<int> ramp(256);
    std::iota(ramp.begin(), ramp.end(), 0);
    const GrayImage img(Grid<int>(256, 1, ramp), 256);

    for (const GrayImage& out : {exponential_stretch(img), stretch_then_normalize(img)}) {
        for (int i = 1; i < 256; ++i)
            CHECK(out.levels()[i - 1] <= out.levels()[i]);
    }
    // Continuous form is strictly monotone.
    for (int a = 0; a < 256; ++a)
        for (int b = a + 1; b < 256; b += 17)
            CHECK(stretch_value(a, 0, 255, 256) < stretch_value(b, 0, 255, 256));
}

TEST_CASE("stretched output stays within the documented ranges") {
    std::mt19937 rng(211);
    std::uniform_int_distribution<int> level(0, 255);
    const int cap = round_half_up(255.0 * (1.0 - std::exp(-1.0)));
    for (int iter = 0; iter < 30; ++iter) {
        std::vector<int> levels(30);
        for (int& v : levels) v = level(rng);
        if (*std::min_element(levels.begin(), levels.end()) ==
            *std::max_element(levels.begin(), levels.end()))
            continue;
        const GrayImage img(Grid<int>(5, 6, levels), 256);
        for (int v : exponential_stretch(img).levels().cells()) {
            CHECK(v >= 0);
            CHECK(v <= cap);
        }
        for (int v : stretch_then_normalize(img).levels().cells()) {
            CHECK(v >= 0);
            CHECK(v <= 255);
        }
    }
}

TEST_CASE("stretching twice is not the identity") {
    std::vector<int> ramp(256);
    std::iota(ramp.begin(), ramp.end(), 0);
    const GrayImage img(Grid<int>(16, 16, ramp), 256);
    const GrayImage once = exponential_stretch(img);
    const GrayImage twice = exponential_stretch(once);
    CHECK(once.levels() != twice.levels());
}

TEST_CASE("stretch preserves dimensions") {
    std::vector<int> levels(21);
    for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = static_cast<int>(i * 12);
    const GrayImage in(Grid<int>(7, 3, levels), 256);
    const GrayImage out = exponential_stretch(in);
    CHECK(out.width() == 7);
    CHECK(out.height() == 3);
}
