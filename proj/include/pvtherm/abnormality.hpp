#pragma once

#include <cstdint>
#include <string>

#include "pvtherm/raster.hpp"

namespace pvtherm {

/// Threshold formula variant. `corrected` flips the sign of the low-threshold
/// term so the band actually brackets the mean; `paper_literal` keeps the
/// published form, which places the low threshold above the mean for
/// positive-Celsius imagery.
enum class FormulaMode {
    corrected,
    paper_literal,
};

inline const char* to_string(FormulaMode mode) {
    return mode == FormulaMode::corrected ? "corrected" : "paper-literal";
}

struct ThresholdPair {
    double t_h = 0.0; // high threshold, degC
    double t_l = 0.0; // low threshold, degC

    bool operator==(const ThresholdPair&) const = default;
};

enum class Verdict {
    normal,
    abnormal,
};

inline const char* to_string(Verdict v) {
    return v == Verdict::normal ? "normal" : "abnormal";
}

struct AbnormalityReport {
    ImageStats stats;
    ThresholdPair thresholds;
    std::uint64_t outlier_count = 0; // pixels outside [t_l, t_h]
    std::uint64_t module_area = 0;   // width * height
    Verdict verdict = Verdict::normal;
};

/// t_h = mean + 0.2*max in both modes.
/// t_l = mean - 0.2*min (corrected) or mean + 0.2*min (paper-literal).
inline ThresholdPair compute_thresholds(const ImageStats& stats,
                                        FormulaMode mode = FormulaMode::corrected) {
    const double t_h = stats.t_mean + 0.2 * stats.t_max;
    const double t_l = mode == FormulaMode::corrected
                           ? stats.t_mean - 0.2 * stats.t_min
                           : stats.t_mean + 0.2 * stats.t_min;
    return ThresholdPair{t_h, t_l};
}

/// Counts pixels strictly above t_h or strictly below t_l.
inline std::uint64_t count_outliers(const ThermalImage& img, const ThresholdPair& thr) {
    std::uint64_t n = 0;
    for (double t : img.temps().cells())
        if (t > thr.t_h || t < thr.t_l)
            ++n;
    return n;
}

/// Abnormal iff the outlier count strictly exceeds 0.2% of the module area.
inline bool is_abnormal(std::uint64_t outlier_count, std::uint64_t module_area) {
    return static_cast<double>(outlier_count) > 0.002 * static_cast<double>(module_area);
}

/// Full triage: stats -> thresholds -> outlier count -> verdict.
inline AbnormalityReport classify(const ThermalImage& img,
                                  FormulaMode mode = FormulaMode::corrected) {
    AbnormalityReport report;
    report.stats = compute_stats(img);
    report.thresholds = compute_thresholds(report.stats, mode);
    report.outlier_count = count_outliers(img, report.thresholds);
    report.module_area = img.pixel_count();
    report.verdict = is_abnormal(report.outlier_count, report.module_area)
                         ? Verdict::abnormal
                         : Verdict::normal;
    return report;
}

} // namespace pvtherm
