#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pvtherm/raster.hpp"

namespace pvtherm {

enum class DefectShape {
    rectangle,
    ellipse,
};

inline const char* to_string(DefectShape s) {
    return s == DefectShape::rectangle ? "rectangle" : "ellipse";
}

/// One injected defect. Extents are full widths in pixels along each axis.
/// A pixel is covered when its integer coordinate lies in
/// [center - extent/2, center + extent/2) for rectangles, or when it
/// satisfies the closed ellipse inequality for ellipses.
struct DefectSpec {
    DefectShape shape = DefectShape::rectangle;
    double center_row = 0.0;
    double center_col = 0.0;
    double extent_rows = 1.0;
    double extent_cols = 1.0;
    double delta_temp = 0.0; // degC offset; positive = hotspot, negative = cold cell
};

struct PanelSpec {
    int width = 0;
    int height = 0;
    double base_temp = 30.0;
    double noise_sigma = 0.0; // Gaussian, degC
    std::vector<DefectSpec> defects;
    std::uint64_t seed = 0;
};

struct SynthResult {
    ThermalImage image;
    BinaryMask truth;
};

namespace detail {

inline bool covers(const DefectSpec& d, int row, int col) {
    const double hr = d.extent_rows / 2.0;
    const double hc = d.extent_cols / 2.0;
    if (d.shape == DefectShape::rectangle) {
        return row >= d.center_row - hr && row < d.center_row + hr &&
               col >= d.center_col - hc && col < d.center_col + hc;
    }
    const double dr = (row - d.center_row) / hr;
    const double dc = (col - d.center_col) / hc;
    return dr * dr + dc * dc <= 1.0;
}

/// Deterministic standard-normal draws: two mt19937_64 outputs are mapped to
/// (0,1) doubles u = ((x >> 11) + 0.5) * 2^-53 and combined with Box-Muller,
/// z = sqrt(-2 ln u1) * cos(2 pi u2). One z per pixel, row-major.
class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

    double next() {
        const double u1 = to_unit(engine_());
        const double u2 = to_unit(engine_());
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    static double to_unit(std::uint64_t x) {
        return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
};

} // namespace detail

/// Builds the thermal image and its exact ground-truth mask. Identical specs
/// produce bit-identical output. Throws OutOfBoundsDefect when a defect's
/// geometry covers a pixel outside the panel.
inline SynthResult generate(const PanelSpec& spec) {
    if (spec.width < 1 || spec.height < 1)
        throw InvalidArgument("panel dimensions must be at least 1x1");
    if (spec.noise_sigma < 0.0)
        throw InvalidArgument("noise_sigma must be non-negative");

    Grid<double> temps(spec.width, spec.height, spec.base_temp);
    Grid<std::uint8_t> truth_bits(spec.width, spec.height, std::uint8_t{0});

    for (const DefectSpec& d : spec.defects) {
        if (d.extent_rows < 1.0 || d.extent_cols < 1.0)
            throw InvalidArgument("defect extent must span at least 1 pixel per axis");
        const int row_lo = static_cast<int>(std::floor(d.center_row - d.extent_rows / 2.0)) - 1;
        const int row_hi = static_cast<int>(std::ceil(d.center_row + d.extent_rows / 2.0)) + 1;
        const int col_lo = static_cast<int>(std::floor(d.center_col - d.extent_cols / 2.0)) - 1;
        const int col_hi = static_cast<int>(std::ceil(d.center_col + d.extent_cols / 2.0)) + 1;
        for (int r = row_lo; r <= row_hi; ++r) {
            for (int c = col_lo; c <= col_hi; ++c) {
                if (!detail::covers(d, r, c))
                    continue;
                if (!temps.in_bounds(r, c))
                    throw OutOfBoundsDefect("defect covers pixel outside the panel");
                temps.at(r, c) += d.delta_temp;
                truth_bits.at(r, c) = 1;
            }
        }
    }

    if (spec.noise_sigma > 0.0) {
        detail::NormalSource noise(spec.seed);
        for (double& t : temps.cells())
            t += spec.noise_sigma * noise.next();
    }

    return SynthResult{ThermalImage(std::move(temps)), BinaryMask(std::move(truth_bits))};
}

} // namespace pvtherm
