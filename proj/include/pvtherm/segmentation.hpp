#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "pvtherm/raster.hpp"

namespace pvtherm {

struct Coord {
    int row = 0;
    int col = 0;

    auto operator<=>(const Coord&) const = default;
};

struct SegmentationParams {
    int tau = 113;            // seed threshold; 0.7 of the max stretched level for depth 256
    double epsilon = 25.5;    // homogeneity tolerance; 0.1 * (depth - 1) for depth 256
    int connectivity = 8;     // 4 or 8
    int min_region_px = 5;    // regions smaller than this are discarded
};

/// Seed threshold used when none is configured: 0.7 of the highest level the
/// exponential stretch can produce, (depth-1)*(1 - 1/e).
inline int default_tau(int depth) {
    return round_half_up(0.7 * (depth - 1) * (1.0 - std::exp(-1.0)));
}

inline double default_epsilon(int depth) {
    return 0.1 * (depth - 1);
}

inline void validate_params(const SegmentationParams& p, int depth) {
    if (p.tau < 0 || p.tau > depth - 1)
        throw InvalidArgument("tau outside [0, depth-1]");
    if (p.epsilon < 0.0)
        throw InvalidArgument("epsilon must be non-negative");
    if (p.connectivity != 4 && p.connectivity != 8)
        throw InvalidArgument("connectivity must be 4 or 8");
    if (p.min_region_px < 1)
        throw InvalidArgument("min_region_px must be at least 1");
}

/// One grown region. `pixels` is in admission order; `mean_level` is the
/// arithmetic mean of the member luminances.
struct Region {
    int id = 0;
    std::vector<Coord> pixels;
    double mean_level = 0.0;
};

struct SegmentationResult {
    BinaryMask mask;
    LabelMap labels;
    std::vector<Region> regions;
};

/// Coordinates whose level is >= tau (inclusive), in row-major order.
inline std::vector<Coord> select_seeds(const GrayImage& img, int tau) {
    std::vector<Coord> seeds;
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c)
            if (img.at(r, c) >= tau)
                seeds.push_back(Coord{r, c});
    return seeds;
}

namespace detail {

inline std::span<const Coord> neighbor_offsets(int connectivity) {
    static constexpr std::array<Coord, 8> eight{{
        {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};
    static constexpr std::array<Coord, 4> four{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};
    if (connectivity == 4)
        return {four.data(), four.size()};
    return {eight.data(), eight.size()};
}

} // namespace detail

/// Grows one region from `seed`. A frontier pixel's unvisited neighbor joins
/// iff its level deviates from the current region mean by at most epsilon; the
/// mean is updated after each admission. The frontier is expanded in row-major
/// order over admitted pixels, so results are deterministic. Admitted pixels
/// are marked in `visited`.
inline Region grow_region(const GrayImage& img, Coord seed,
                          const SegmentationParams& params,
                          Grid<std::uint8_t>& visited) {
    if (visited.width() != img.width() || visited.height() != img.height())
        throw DimensionMismatch("visited grid does not match image dimensions");
    const auto offsets = detail::neighbor_offsets(params.connectivity);

    Region region;
    region.pixels.push_back(seed);
    visited.at(seed.row, seed.col) = 1;
    double sum = img.at(seed.row, seed.col);
    region.mean_level = sum;

    // Min-heap over row-major indices: the smallest-index frontier pixel is
    // expanded first.
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> frontier;
    frontier.push(img.levels().index(seed.row, seed.col));

    while (!frontier.empty()) {
        const std::size_t idx = frontier.top();
        frontier.pop();
        const Coord p{static_cast<int>(idx) / img.width(),
                      static_cast<int>(idx) % img.width()};
        for (const Coord& d : offsets) {
            const int nr = p.row + d.row;
            const int nc = p.col + d.col;
            if (!visited.in_bounds(nr, nc) || visited.at(nr, nc))
                continue;
            const int level = img.at(nr, nc);
            if (std::abs(level - region.mean_level) <= params.epsilon) {
                visited.at(nr, nc) = 1;
                region.pixels.push_back(Coord{nr, nc});
                sum += level;
                region.mean_level = sum / static_cast<double>(region.pixels.size());
                frontier.push(img.levels().index(nr, nc));
            }
        }
    }
    return region;
}

/// Full segmentation: seeds in row-major order, each unvisited seed grows a
/// region, regions below min_region_px are discarded (their pixels stay
/// visited), survivors are labeled 1..K in creation order.
inline SegmentationResult segment(const GrayImage& img, const SegmentationParams& params) {
    validate_params(params, img.depth());

    Grid<std::uint8_t> visited(img.width(), img.height(), std::uint8_t{0});
    Grid<std::uint8_t> mask_bits(img.width(), img.height(), std::uint8_t{0});
    Grid<int> label_cells(img.width(), img.height(), 0);
    std::vector<Region> regions;

    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            if (visited.at(r, c) || img.at(r, c) < params.tau)
                continue;
            Region region = grow_region(img, Coord{r, c}, params, visited);
            if (static_cast<int>(region.pixels.size()) < params.min_region_px)
                continue;
            region.id = static_cast<int>(regions.size()) + 1;
            for (const Coord& p : region.pixels) {
                mask_bits.at(p.row, p.col) = 1;
                label_cells.at(p.row, p.col) = region.id;
            }
            regions.push_back(std::move(region));
        }
    }

    return SegmentationResult{BinaryMask(std::move(mask_bits)),
                              LabelMap(std::move(label_cells)),
                              std::move(regions)};
}

namespace detail {

/// HSV (s = v = 1) to RGB with half-up rounding of each channel.
inline Rgb hue_to_rgb(double hue_deg) {
    const double h = std::fmod(hue_deg, 360.0) / 60.0;
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    double r = 0.0, g = 0.0, b = 0.0;
    switch (static_cast<int>(h)) {
        case 0: r = 1.0; g = x; break;
        case 1: r = x; g = 1.0; break;
        case 2: g = 1.0; b = x; break;
        case 3: g = x; b = 1.0; break;
        case 4: r = x; b = 1.0; break;
        default: r = 1.0; b = x; break;
    }
    return Rgb{static_cast<std::uint8_t>(round_half_up(255.0 * r)),
               static_cast<std::uint8_t>(round_half_up(255.0 * g)),
               static_cast<std::uint8_t>(round_half_up(255.0 * b))};
}

} // namespace detail

/// Background renders black; region k renders at hue k * 360 / (K+1) with
/// full saturation and value.
inline RgbImage colorize_labels(const LabelMap& labels) {
    const int k_regions = labels.region_count();
    std::vector<Rgb> palette(static_cast<std::size_t>(k_regions) + 1, Rgb{0, 0, 0});
    for (int k = 1; k <= k_regions; ++k)
        palette[k] = detail::hue_to_rgb(k * 360.0 / (k_regions + 1));

    RgbImage out(labels.width(), labels.height(), Rgb{0, 0, 0});
    const auto& cells = labels.labels().cells();
    for (std::size_t i = 0; i < cells.size(); ++i)
        out[i] = palette[cells[i]];
    return out;
}

} // namespace pvtherm
