#pragma once

#include <cmath>
#include <utility>

#include "pvtherm/raster.hpp"

namespace pvtherm {

namespace detail {

inline std::pair<int, int> level_range(const GrayImage& img) {
    int lo = img.levels()[0];
    int hi = lo;
    for (int v : img.levels().cells()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

} // namespace detail

/// Continuous exponential stretch of level x given the image's observed
/// [x_min, x_max]: (L-1) * (1 - exp(-(x - x_min) / (x_max - x_min))).
/// The curve expands differences near x_min and saturates towards
/// (L-1)*(1 - 1/e) at x_max.
inline double stretch_value(int x, int x_min, int x_max, int depth) {
    const double u = static_cast<double>(x - x_min) / (x_max - x_min);
    return (depth - 1) * (1.0 - std::exp(-u));
}

/// Exponential stretch, rounded half-up to integer levels.
/// Throws DegenerateRange on a constant image.
inline GrayImage exponential_stretch(const GrayImage& img) {
    const auto [x_min, x_max] = detail::level_range(img);
    if (x_min == x_max)
        throw DegenerateRange("constant image: x_min equals x_max");
    Grid<int> out(img.width(), img.height(), 0);
    const auto& src = img.levels().cells();
    for (std::size_t i = 0; i < src.size(); ++i)
        out[i] = round_half_up(stretch_value(src[i], x_min, x_max, img.depth()));
    return GrayImage(std::move(out), img.depth());
}

/// Exponential stretch followed by a linear rescale of the continuous values
/// so the output spans the full [0, L-1] range, then rounds half-up.
/// Throws DegenerateRange on a constant image.
inline GrayImage stretch_then_normalize(const GrayImage& img) {
    const auto [x_min, x_max] = detail::level_range(img);
    if (x_min == x_max)
        throw DegenerateRange("constant image: x_min equals x_max");
    // Continuous stretch is monotone, so its extrema sit at x_min and x_max.
    const double s_max = stretch_value(x_max, x_min, x_max, img.depth());
    const double scale = (img.depth() - 1) / s_max;
    Grid<int> out(img.width(), img.height(), 0);
    const auto& src = img.levels().cells();
    for (std::size_t i = 0; i < src.size(); ++i)
        out[i] = round_half_up(stretch_value(src[i], x_min, x_max, img.depth()) * scale);
    return GrayImage(std::move(out), img.depth());
}

} // namespace pvtherm
