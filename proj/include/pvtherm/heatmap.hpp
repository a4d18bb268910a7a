#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pvtherm/raster.hpp"

namespace pvtherm {

struct ColorStop {
    double position = 0.0; // in [0, 1]
    Rgb color;
};

/// Piecewise-linear RGB gradient over [0, 1]. Positions are strictly
/// increasing with the first at 0 and the last at 1.
class ColorMap {
public:
    explicit ColorMap(std::vector<ColorStop> stops) : stops_(std::move(stops)) {
        if (stops_.size() < 2)
            throw InvalidArgument("colormap needs at least two control points");
        if (stops_.front().position != 0.0 || stops_.back().position != 1.0)
            throw InvalidArgument("colormap must start at 0 and end at 1");
        for (std::size_t i = 1; i < stops_.size(); ++i)
            if (stops_[i].position <= stops_[i - 1].position)
                throw InvalidArgument("colormap positions must be strictly increasing");
    }

    const std::vector<ColorStop>& stops() const { return stops_; }

    /// Color at position t in [0, 1], linearly interpolated per channel with
    /// half-up rounding.
    Rgb sample(double t) const {
        if (t <= 0.0) return stops_.front().color;
        if (t >= 1.0) return stops_.back().color;
        std::size_t i = 1;
        while (stops_[i].position < t) ++i;
        const ColorStop& a = stops_[i - 1];
        const ColorStop& b = stops_[i];
        const double f = (t - a.position) / (b.position - a.position);
        auto lerp = [f](std::uint8_t lo, std::uint8_t hi) {
            return static_cast<std::uint8_t>(round_half_up(lo + (hi - lo) * f));
        };
        return Rgb{lerp(a.color.r, b.color.r), lerp(a.color.g, b.color.g),
                   lerp(a.color.b, b.color.b)};
    }

    /// Black -> dark purple -> red -> orange -> yellow. Luma is non-decreasing
    /// along the gradient, so hotter always reads brighter.
    static ColorMap default_map() {
        return ColorMap({{0.00, Rgb{0, 0, 0}},
                         {0.25, Rgb{64, 0, 96}},
                         {0.50, Rgb{255, 0, 0}},
                         {0.75, Rgb{255, 165, 0}},
                         {1.00, Rgb{255, 255, 0}}});
    }

    /// Parses "position r g b" lines; blank lines and '#' comments ignored.
    static ColorMap parse(std::istream& in) {
        std::vector<ColorStop> stops;
        std::string line;
        while (std::getline(in, line)) {
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#')
                continue;
            std::istringstream fields(line);
            double pos = 0.0;
            int r = 0, g = 0, b = 0;
            if (!(fields >> pos >> r >> g >> b))
                throw InvalidArgument("bad colormap line: " + line);
            if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
                throw InvalidArgument("colormap channel outside [0, 255]: " + line);
            stops.push_back(ColorStop{pos, Rgb{static_cast<std::uint8_t>(r),
                                               static_cast<std::uint8_t>(g),
                                               static_cast<std::uint8_t>(b)}});
        }
        return ColorMap(std::move(stops));
    }

private:
    std::vector<ColorStop> stops_;
};

inline ColorMap load_colormap(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw UnreadableFile("cannot open colormap file " + path.string());
    return ColorMap::parse(in);
}

/// Maps level x to the colormap at position x / (L-1).
inline RgbImage render_heatmap(const GrayImage& intensity, const ColorMap& cmap) {
    // Levels repeat heavily, so sample the gradient once per level.
    std::vector<Rgb> lut(static_cast<std::size_t>(intensity.depth()));
    const double denom = intensity.depth() - 1;
    for (std::size_t v = 0; v < lut.size(); ++v)
        lut[v] = cmap.sample(static_cast<double>(v) / denom);

    RgbImage out(intensity.width(), intensity.height(), Rgb{0, 0, 0});
    const auto& src = intensity.levels().cells();
    for (std::size_t i = 0; i < src.size(); ++i)
        out[i] = lut[src[i]];
    return out;
}

/// Keeps the luminance of deteriorated pixels and zeroes intact ones, so the
/// intact background renders as the colormap's position-0 color.
inline GrayImage deterioration_intensity(const GrayImage& img, const BinaryMask& mask) {
    if (img.width() != mask.width() || img.height() != mask.height())
        throw DimensionMismatch("image and mask differ in size");
    Grid<int> out(img.width(), img.height(), 0);
    const auto& src = img.levels().cells();
    const auto& bits = mask.bits().cells();
    for (std::size_t i = 0; i < src.size(); ++i)
        out[i] = bits[i] ? src[i] : 0;
    return GrayImage(std::move(out), img.depth());
}

} // namespace pvtherm
