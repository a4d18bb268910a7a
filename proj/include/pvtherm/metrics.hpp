#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pvtherm/raster.hpp"

namespace pvtherm {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }

    bool operator==(const ConfusionCounts&) const = default;
};

/// Pixel-wise tally; positive class is 1 (deteriorated).
inline ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth) {
    if (pred.width() != truth.width() || pred.height() != truth.height())
        throw DimensionMismatch("prediction and truth masks differ in size");
    ConfusionCounts c;
    const auto& p = pred.bits().cells();
    const auto& t = truth.bits().cells();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] && t[i]) ++c.tp;
        else if (p[i] && !t[i]) ++c.fp;
        else if (!p[i] && t[i]) ++c.fn;
        else ++c.tn;
    }
    return c;
}

// Each metric returns nullopt when its denominator is zero; undefined
// entries are excluded from aggregation rather than coerced to 0 or 1.

/// TP / (TP + FP + FN), the intersection-over-union of the positive class.
inline std::optional<double> jaccard(const ConfusionCounts& c) {
    const std::uint64_t denom = c.tp + c.fp + c.fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

/// 2*TP / (2*TP + FP + FN).
inline std::optional<double> dice(const ConfusionCounts& c) {
    const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

/// TP / (TP + FP).
inline std::optional<double> precision(const ConfusionCounts& c) {
    const std::uint64_t denom = c.tp + c.fp;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

/// TP / (TP + FN).
inline std::optional<double> recall(const ConfusionCounts& c) {
    const std::uint64_t denom = c.tp + c.fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

/// (TP + TN) / (TP + TN + FP + FN): pixel-wise agreement.
inline std::optional<double> rand_index(const ConfusionCounts& c) {
    const std::uint64_t denom = c.total();
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(denom);
}

struct MetricRow {
    std::optional<double> iou;
    std::optional<double> dice;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> rand_index;
};

inline MetricRow evaluate_counts(const ConfusionCounts& c) {
    return MetricRow{jaccard(c), dice(c), precision(c), recall(c), rand_index(c)};
}

inline MetricRow evaluate_pair(const BinaryMask& pred, const BinaryMask& truth) {
    return evaluate_counts(confusion(pred, truth));
}

/// Sample mean and population (1/n) standard deviation of one metric column.
struct MetricMoments {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0; // defined entries that contributed
};

struct AggregateStats {
    std::optional<MetricMoments> iou;
    std::optional<MetricMoments> dice;
    std::optional<MetricMoments> precision;
    std::optional<MetricMoments> recall;
    std::optional<MetricMoments> rand_index;
};

namespace detail {

template <typename Getter>
std::optional<MetricMoments> column_moments(std::span<const MetricRow> rows, Getter get) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const MetricRow& row : rows) {
        if (const auto v = get(row)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const MetricRow& row : rows) {
        if (const auto v = get(row)) {
            const double d = *v - mean;
            sq += d * d;
        }
    }
    return MetricMoments{mean, std::sqrt(sq / static_cast<double>(n)), n};
}

} // namespace detail

/// Per-metric mean and population standard deviation; undefined entries are
/// excluded per metric. Throws EmptyInput on an empty row list.
inline AggregateStats aggregate(std::span<const MetricRow> rows) {
    if (rows.empty())
        throw EmptyInput("cannot aggregate zero metric rows");
    AggregateStats out;
    out.iou = detail::column_moments(rows, [](const MetricRow& r) { return r.iou; });
    out.dice = detail::column_moments(rows, [](const MetricRow& r) { return r.dice; });
    out.precision = detail::column_moments(rows, [](const MetricRow& r) { return r.precision; });
    out.recall = detail::column_moments(rows, [](const MetricRow& r) { return r.recall; });
    out.rand_index = detail::column_moments(rows, [](const MetricRow& r) { return r.rand_index; });
    return out;
}

inline AggregateStats aggregate(const std::vector<MetricRow>& rows) {
    return aggregate(std::span<const MetricRow>(rows.data(), rows.size()));
}

} // namespace pvtherm
