#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "pvtherm/errors.hpp"

namespace pvtherm {

/// Rounds half-up to the nearest integer: 0.5 -> 1, 1.49 -> 1, -0.5 -> 0.
inline int round_half_up(double v) {
    return static_cast<int>(std::floor(v + 0.5));
}

/// Row-major 2-D grid. Storage building block for every raster type.
template <typename T>
class Grid {
public:
    Grid() = default;

    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height) {
        if (width < 1 || height < 1)
            throw InvalidArgument("grid dimensions must be at least 1x1");
        cells_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    Grid(int width, int height, std::vector<T> cells)
        : width_(width), height_(height), cells_(std::move(cells)) {
        if (width < 1 || height < 1)
            throw InvalidArgument("grid dimensions must be at least 1x1");
        if (cells_.size() != static_cast<std::size_t>(width) * height)
            throw InvalidArgument("cell count does not match width*height");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixel_count() const { return cells_.size(); }

    bool in_bounds(int row, int col) const {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }

    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * width_ + col;
    }

    T& at(int row, int col) { return cells_[index(row, col)]; }
    const T& at(int row, int col) const { return cells_[index(row, col)]; }

    T& operator[](std::size_t i) { return cells_[i]; }
    const T& operator[](std::size_t i) const { return cells_[i]; }

    std::vector<T>& cells() { return cells_; }
    const std::vector<T>& cells() const { return cells_; }

    bool operator==(const Grid&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> cells_;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

using RgbImage = Grid<Rgb>;

/// Calibrated temperature raster in degrees Celsius. Values are finite.
class ThermalImage {
public:
    explicit ThermalImage(Grid<double> temps) : temps_(std::move(temps)) {
        for (double t : temps_.cells())
            if (!std::isfinite(t))
                throw NonFiniteValue("thermal image contains a non-finite temperature");
    }

    ThermalImage(int width, int height, double fill)
        : ThermalImage(Grid<double>(width, height, fill)) {}

    int width() const { return temps_.width(); }
    int height() const { return temps_.height(); }
    std::size_t pixel_count() const { return temps_.pixel_count(); }
    double at(int row, int col) const { return temps_.at(row, col); }
    const Grid<double>& temps() const { return temps_; }

    bool operator==(const ThermalImage&) const = default;

private:
    Grid<double> temps_;
};

/// Luminance raster with levels in [0, depth-1]. Default depth is 256 (8-bit).
class GrayImage {
public:
    GrayImage(Grid<int> levels, int depth = 256)
        : levels_(std::move(levels)), depth_(depth) {
        if (depth < 2)
            throw InvalidArgument("gray depth must be at least 2");
        for (int v : levels_.cells())
            if (v < 0 || v >= depth)
                throw InvalidArgument("gray level outside [0, depth-1]");
    }

    GrayImage(int width, int height, int fill = 0, int depth = 256)
        : GrayImage(Grid<int>(width, height, fill), depth) {}

    int width() const { return levels_.width(); }
    int height() const { return levels_.height(); }
    std::size_t pixel_count() const { return levels_.pixel_count(); }
    int depth() const { return depth_; }
    int at(int row, int col) const { return levels_.at(row, col); }
    const Grid<int>& levels() const { return levels_; }

    bool operator==(const GrayImage&) const = default;

private:
    Grid<int> levels_;
    int depth_ = 256;
};

/// Per-pixel deteriorated(1) / intact(0) verdict.
class BinaryMask {
public:
    explicit BinaryMask(Grid<std::uint8_t> bits) : bits_(std::move(bits)) {
        for (std::uint8_t b : bits_.cells())
            if (b > 1)
                throw InvalidArgument("mask bit outside {0, 1}");
    }

    BinaryMask(int width, int height, std::uint8_t fill = 0)
        : BinaryMask(Grid<std::uint8_t>(width, height, fill)) {}

    int width() const { return bits_.width(); }
    int height() const { return bits_.height(); }
    std::size_t pixel_count() const { return bits_.pixel_count(); }
    std::uint8_t at(int row, int col) const { return bits_.at(row, col); }
    Grid<std::uint8_t>& bits() { return bits_; }
    const Grid<std::uint8_t>& bits() const { return bits_; }

    std::size_t ones() const {
        std::size_t n = 0;
        for (std::uint8_t b : bits_.cells()) n += b;
        return n;
    }

    bool operator==(const BinaryMask&) const = default;

private:
    Grid<std::uint8_t> bits_;
};

/// Region identifiers, 0 = background. Nonzero labels form a contiguous 1..K set.
class LabelMap {
public:
    explicit LabelMap(Grid<int> labels) : labels_(std::move(labels)) {
        int max_label = 0;
        for (int v : labels_.cells()) {
            if (v < 0)
                throw InvalidArgument("label values must be non-negative");
            max_label = std::max(max_label, v);
        }
        std::vector<char> seen(static_cast<std::size_t>(max_label) + 1, 0);
        for (int v : labels_.cells()) seen[v] = 1;
        for (int k = 1; k <= max_label; ++k)
            if (!seen[k])
                throw InvalidArgument("label set is not contiguous");
        region_count_ = max_label;
    }

    LabelMap(int width, int height) : LabelMap(Grid<int>(width, height, 0)) {}

    int width() const { return labels_.width(); }
    int height() const { return labels_.height(); }
    int region_count() const { return region_count_; }
    int at(int row, int col) const { return labels_.at(row, col); }
    const Grid<int>& labels() const { return labels_; }

    bool operator==(const LabelMap&) const = default;

private:
    Grid<int> labels_;
    int region_count_ = 0;
};

struct ImageStats {
    double t_max = 0.0;
    double t_min = 0.0;
    double t_mean = 0.0;

    bool operator==(const ImageStats&) const = default;
};

/// Exact max, min, and arithmetic mean over all pixels.
inline ImageStats compute_stats(const ThermalImage& img) {
    const auto& cells = img.temps().cells();
    double mx = cells.front();
    double mn = cells.front();
    double sum = 0.0;
    for (double t : cells) {
        mx = std::max(mx, t);
        mn = std::min(mn, t);
        sum += t;
    }
    return ImageStats{mx, mn, sum / static_cast<double>(cells.size())};
}

/// Linear map of [t_min, t_max] onto [0, depth-1], rounding half-up.
/// A uniform image (t_min == t_max) maps every pixel to level 0.
inline GrayImage thermal_to_gray(const ThermalImage& img, int depth = 256) {
    if (depth < 2)
        throw InvalidArgument("gray depth must be at least 2");
    const ImageStats st = compute_stats(img);
    Grid<int> out(img.width(), img.height(), 0);
    if (st.t_max > st.t_min) {
        const double scale = (depth - 1) / (st.t_max - st.t_min);
        const auto& src = img.temps().cells();
        for (std::size_t i = 0; i < src.size(); ++i)
            out[i] = round_half_up((src[i] - st.t_min) * scale);
    }
    return GrayImage(std::move(out), depth);
}

} // namespace pvtherm
