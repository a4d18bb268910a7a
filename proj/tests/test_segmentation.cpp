#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>
#include <stack>
#include <vector>

#include "pvtherm/segmentation.hpp"

using namespace pvtherm;

namespace {

GrayImage gray(int w, int h, std::vector<int> levels, int depth = 256) {
    return GrayImage(Grid<int>(w, h, std::move(levels)), depth);
}

// Independent oracle for the epsilon = 0 case: connected components of the
// >= tau pixels where adjacency additionally requires equal levels, with the
// same size filter. Plain stack-based flood fill, no shared code with segment.
BinaryMask flood_fill_oracle(const GrayImage& img, const SegmentationParams& p) {
    const int w = img.width(), h = img.height();
    std::vector<char> done(static_cast<std::size_t>(w) * h, 0);
    Grid<std::uint8_t> out(w, h, std::uint8_t{0});
    const std::vector<std::pair<int, int>> offs8 = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                                    {0, 1},   {1, -1}, {1, 0},  {1, 1}};
    const std::vector<std::pair<int, int>> offs4 = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};
    const auto& offs = p.connectivity == 4 ? offs4 : offs8;

    for (int r0 = 0; r0 < h; ++r0) {
        for (int c0 = 0; c0 < w; ++c0) {
            const std::size_t i0 = static_cast<std::size_t>(r0) * w + c0;
            if (done[i0] || img.at(r0, c0) < p.tau)
                continue;
            const int level = img.at(r0, c0);
            std::vector<std::pair<int, int>> component;
            std::stack<std::pair<int, int>> todo;
            todo.push({r0, c0});
            done[i0] = 1;
            while (!todo.empty()) {
                const auto [r, c] = todo.top();
                todo.pop();
                component.push_back({r, c});
                for (const auto& [dr, dc] : offs) {
                    const int nr = r + dr, nc = c + dc;
                    if (nr < 0 || nr >= h || nc < 0 || nc >= w)
                        continue;
                    const std::size_t ni = static_cast<std::size_t>(nr) * w + nc;
                    if (done[ni] || img.at(nr, nc) != level)
                        continue;
                    done[ni] = 1;
                    todo.push({nr, nc});
                }
            }
            if (static_cast<int>(component.size()) >= p.min_region_px)
                for (const auto& [r, c] : component)
                    out.at(r, c) = 1;
        }
    }
    return BinaryMask(std::move(out));
}

} // namespace

TEST_CASE("select_seeds uses an inclusive threshold") {
    CHECK(select_seeds(gray(2, 2, {0, 0, 0, 0}), 1).empty());

    const auto seeds = select_seeds(gray(2, 2, {10, 200, 199, 255}), 200);
    CHECK(seeds == std::vector<Coord>{{0, 1}, {1, 1}});

    CHECK(select_seeds(gray(3, 2, {5, 9, 1, 0, 3, 7}), 0).size() == 6);
}

TEST_CASE("grow_region on a uniform image with epsilon 0 takes everything") {
    const GrayImage img(4, 3, 50);
    Grid<std::uint8_t> visited(4, 3, std::uint8_t{0});
    const Region region = grow_region(img, Coord{1, 2}, SegmentationParams{0, 0.0, 8, 1},
                                      visited);
    CHECK(region.pixels.size() == 12);
    CHECK(region.mean_level == 50.0);
}

TEST_CASE("grow_region rejects neighbors beyond epsilon") {
    const GrayImage img = gray(2, 2, {255, 0, 0, 0});
    Grid<std::uint8_t> visited(2, 2, std::uint8_t{0});
    const Region region = grow_region(img, Coord{0, 0}, SegmentationParams{200, 10.0, 4, 1},
                                      visited);
    CHECK(region.pixels == std::vector<Coord>{{0, 0}});
    CHECK(region.mean_level == 255.0);
}

TEST_CASE("grow_region updates the mean incrementally") {
    // 245 joins seed 250 (|245-250| = 5 <= 10); the mean becomes 247.5, and
    // 0 is rejected against it.
    const GrayImage img = gray(3, 1, {250, 245, 0});
    Grid<std::uint8_t> visited(3, 1, std::uint8_t{0});
    const Region region = grow_region(img, Coord{0, 0}, SegmentationParams{0, 10.0, 8, 1},
                                      visited);
    CHECK(region.pixels == std::vector<Coord>{{0, 0}, {0, 1}});
    CHECK(region.mean_level == 247.5);
    CHECK(visited.at(0, 2) == 0);
}

TEST_CASE("segment with no seeds returns an empty result") {
    const SegmentationResult r = segment(GrayImage(5, 4, 0), SegmentationParams{1, 0.0, 8, 1});
    CHECK(r.regions.empty());
    CHECK(r.mask.ones() == 0);
    CHECK(r.labels.region_count() == 0);
}

TEST_CASE("segment separates two bright squares") {
    // Two 3x3 squares at level 255 on a 12x12 zero background, gap >= 2.
    Grid<int> levels(12, 12, 0);
    for (int r = 1; r <= 3; ++r)
        for (int c = 1; c <= 3; ++c)
            levels.at(r, c) = 255;
    for (int r = 7; r <= 9; ++r)
        for (int c = 7; c <= 9; ++c)
            levels.at(r, c) = 255;
    const GrayImage img(std::move(levels), 256);

    const SegmentationResult r = segment(img, SegmentationParams{200, 10.0, 8, 1});
    REQUIRE(r.regions.size() == 2);
    CHECK(r.regions[0].pixels.size() == 9);
    CHECK(r.regions[1].pixels.size() == 9);
    CHECK(r.mask.ones() == 18);
    CHECK(r.regions[0].id == 1);
    CHECK(r.regions[1].id == 2);
    CHECK(r.labels.at(2, 2) == 1);
    CHECK(r.labels.at(8, 8) == 2);
}

TEST_CASE("segment drops regions below min_region_px") {
    Grid<int> levels(6, 6, 0);
    levels.at(3, 3) = 255; // single bright pixel
    const SegmentationResult r =
        segment(GrayImage(std::move(levels), 256), SegmentationParams{200, 0.0, 8, 5});
    CHECK(r.regions.empty());
    CHECK(r.mask.ones() == 0);
}

TEST_CASE("labels are renumbered contiguously after the size filter") {
    // Big region, tiny region, big region in row-major creation order.
    Grid<int> levels(9, 1, 0);
    levels.at(0, 0) = levels.at(0, 1) = 200;
    levels.at(0, 4) = 210; // dies to the size filter
    levels.at(0, 7) = levels.at(0, 8) = 220;
    const SegmentationResult r =
        segment(GrayImage(std::move(levels), 256), SegmentationParams{100, 5.0, 4, 2});
    REQUIRE(r.regions.size() == 2);
    CHECK(r.regions[0].id == 1);
    CHECK(r.regions[1].id == 2);
    CHECK(r.labels.at(0, 8) == 2);
    CHECK(r.labels.at(0, 4) == 0);
}

TEST_CASE("epsilon 0 segmentation equals the flood-fill oracle on random grids") {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> dim(1, 12);
    std::uniform_int_distribution<int> palette_pick(0, 4);
    std::uniform_int_distribution<int> tau_pick(0, 255);
    std::uniform_int_distribution<int> min_px(1, 4);
    const int palette[5] = {0, 60, 120, 200, 255};

    for (int iter = 0; iter < 200; ++iter) {
        const int w = dim(rng), h = dim(rng);
        std::vector<int> levels(static_cast<std::size_t>(w) * h);
        for (int& v : levels) v = palette[palette_pick(rng)];
        const GrayImage img = gray(w, h, levels);
        const SegmentationParams params{tau_pick(rng), 0.0, (iter % 2) ? 8 : 4, min_px(rng)};

        const BinaryMask expected = flood_fill_oracle(img, params);
        const SegmentationResult actual = segment(img, params);
        REQUIRE(actual.mask.bits() == expected.bits());
    }
}

TEST_CASE("segment is deterministic, disjoint, and consistent") {
    std::mt19937 rng(555);
    std::uniform_int_distribution<int> level(0, 255);
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<int> levels(10 * 8);
        for (int& v : levels) v = level(rng);
        const GrayImage img = gray(10, 8, levels);
        const SegmentationParams params{140, 30.0, 8, 2};

        const SegmentationResult a = segment(img, params);
        const SegmentationResult b = segment(img, params);
        CHECK(a.mask == b.mask);
        CHECK(a.labels == b.labels);
        REQUIRE(a.regions.size() == b.regions.size());
        for (std::size_t i = 0; i < a.regions.size(); ++i) {
            CHECK(a.regions[i].id == b.regions[i].id);
            CHECK(a.regions[i].pixels == b.regions[i].pixels);
            CHECK(a.regions[i].mean_level == b.regions[i].mean_level);
        }

        // Disjointness: region sizes sum to the mask's 1-bits.
        std::size_t total = 0;
        std::set<Coord> seen;
        for (const Region& region : a.regions) {
            total += region.pixels.size();
            double sum = 0.0;
            for (const Coord& p : region.pixels) {
                CHECK(seen.insert(p).second);
                CHECK(a.labels.at(p.row, p.col) == region.id);
                sum += img.at(p.row, p.col);
            }
            CHECK(region.mean_level ==
                  Catch::Approx(sum / static_cast<double>(region.pixels.size())));
        }
        CHECK(total == a.mask.ones());

        // mask and labels agree everywhere.
        for (int r = 0; r < img.height(); ++r)
            for (int c = 0; c < img.width(); ++c)
                CHECK((a.labels.at(r, c) != 0) == (a.mask.at(r, c) == 1));
    }
}

TEST_CASE("with min_region 1, every pixel at or above tau is covered") {
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> level(0, 255);
    std::vector<int> levels(9 * 9);
    for (int& v : levels) v = level(rng);
    const GrayImage img = gray(9, 9, levels);
    const SegmentationParams params{180, 20.0, 8, 1};
    const SegmentationResult r = segment(img, params);
    for (int row = 0; row < 9; ++row)
        for (int col = 0; col < 9; ++col)
            if (img.at(row, col) >= params.tau)
                CHECK(r.mask.at(row, col) == 1);
}

TEST_CASE("raising tau never adds seeds") {
    std::mt19937 rng(77);
    std::uniform_int_distribution<int> level(0, 255);
    std::vector<int> levels(8 * 8);
    for (int& v : levels) v = level(rng);
    const GrayImage img = gray(8, 8, levels);
    for (int tau = 0; tau < 255; tau += 15) {
        const auto lo = select_seeds(img, tau);
        const auto hi = select_seeds(img, tau + 15);
        CHECK(hi.size() <= lo.size());
        for (const Coord& p : hi)
            CHECK(std::find(lo.begin(), lo.end(), p) != lo.end());
    }
}

TEST_CASE("validate_params rejects out-of-range settings") {
    CHECK_THROWS_AS(validate_params(SegmentationParams{-1, 0.0, 8, 1}, 256), InvalidArgument);
    CHECK_THROWS_AS(validate_params(SegmentationParams{256, 0.0, 8, 1}, 256), InvalidArgument);
    CHECK_THROWS_AS(validate_params(SegmentationParams{0, -0.5, 8, 1}, 256), InvalidArgument);
    CHECK_THROWS_AS(validate_params(SegmentationParams{0, 0.0, 6, 1}, 256), InvalidArgument);
    CHECK_THROWS_AS(validate_params(SegmentationParams{0, 0.0, 4, 0}, 256), InvalidArgument);
    CHECK_NOTHROW(validate_params(SegmentationParams{}, 256));
}

TEST_CASE("colorize_labels renders background black and evenly spaced hues") {
    const RgbImage none = colorize_labels(LabelMap(3, 3));
    for (const Rgb& px : none.cells())
        CHECK(px == Rgb{0, 0, 0});

    // K = 1: hue 180 = cyan.
    const RgbImage one = colorize_labels(LabelMap(Grid<int>(2, 1, {0, 1})));
    CHECK(one[0] == Rgb{0, 0, 0});
    CHECK(one[1] == Rgb{0, 255, 255});

    // K = 3: hues 90, 180, 270.
    const RgbImage three = colorize_labels(LabelMap(Grid<int>(4, 1, {0, 1, 2, 3})));
    CHECK(three[1] == Rgb{128, 255, 0});
    CHECK(three[2] == Rgb{0, 255, 255});
    CHECK(three[3] == Rgb{128, 0, 255});
}

TEST_CASE("default parameters derive from depth") {
    CHECK(default_tau(256) == 113); // 0.7 * 255 * (1 - 1/e), rounded
    CHECK(default_epsilon(256) == 25.5);
    const SegmentationParams defaults;
    CHECK(defaults.tau == default_tau(256));
    CHECK(defaults.epsilon == default_epsilon(256));
    CHECK(defaults.connectivity == 8);
    CHECK(defaults.min_region_px == 5);
}
