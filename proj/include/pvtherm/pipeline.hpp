#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pvtherm/abnormality.hpp"
#include "pvtherm/config.hpp"
#include "pvtherm/enhancement.hpp"
#include "pvtherm/heatmap.hpp"
#include "pvtherm/io.hpp"
#include "pvtherm/metrics.hpp"
#include "pvtherm/segmentation.hpp"
#include "pvtherm/version.hpp"

namespace pvtherm {

enum class EntryStatus {
    processed,      // abnormal: segmented and rendered
    skipped_normal, // triaged as normal, no segmentation artifacts
    failed,         // error isolated to this entry
};

inline const char* to_string(EntryStatus s) {
    switch (s) {
        case EntryStatus::processed: return "processed";
        case EntryStatus::skipped_normal: return "skipped-normal";
        default: return "failed";
    }
}

struct EntryResult {
    std::string module_id;
    EntryStatus status = EntryStatus::failed;
    std::optional<AbnormalityReport> triage;
    std::optional<MetricRow> metrics;
    std::string error;
};

struct BatchSummary {
    std::vector<EntryResult> entries; // sorted by module_id
    std::optional<AggregateStats> aggregate;
    std::size_t processed = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
};

/// Thermal source for an entry: the CSV when present, otherwise the gray
/// image with levels read as degrees Celsius.
inline ThermalImage load_entry_thermal(const ManifestEntry& entry) {
    if (entry.thermal_csv_path)
        return load_thermal_csv(*entry.thermal_csv_path);
    const GrayImage gray = load_gray(*entry.image_path);
    Grid<double> temps(gray.width(), gray.height(), 0.0);
    for (std::size_t i = 0; i < temps.pixel_count(); ++i)
        temps[i] = static_cast<double>(gray.levels()[i]);
    return ThermalImage(std::move(temps));
}

namespace detail {

inline nlohmann::json json_or_null(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

} // namespace detail

inline nlohmann::json params_to_json(const RunConfig& cfg) {
    return nlohmann::json{
        {"threshold_mode", to_string(cfg.threshold_mode)},
        {"depth", cfg.depth},
        {"tau", cfg.effective_tau()},
        {"epsilon", cfg.effective_epsilon()},
        {"connectivity", cfg.connectivity},
        {"min_region_px", cfg.min_region_px},
        {"normalize_stretch", cfg.normalize_stretch},
        {"cmap", cfg.cmap_path ? nlohmann::json(*cfg.cmap_path) : nlohmann::json(nullptr)},
    };
}

inline nlohmann::json metrics_to_json(const MetricRow& row) {
    return nlohmann::json{
        {"iou", detail::json_or_null(row.iou)},
        {"dice", detail::json_or_null(row.dice)},
        {"precision", detail::json_or_null(row.precision)},
        {"recall", detail::json_or_null(row.recall)},
        {"rand_index", detail::json_or_null(row.rand_index)},
    };
}

inline nlohmann::json region_table_json(const std::vector<Region>& regions) {
    nlohmann::json table = nlohmann::json::array();
    for (const Region& region : regions) {
        int row_min = region.pixels.front().row, row_max = row_min;
        int col_min = region.pixels.front().col, col_max = col_min;
        for (const Coord& p : region.pixels) {
            row_min = std::min(row_min, p.row);
            row_max = std::max(row_max, p.row);
            col_min = std::min(col_min, p.col);
            col_max = std::max(col_max, p.col);
        }
        table.push_back(nlohmann::json{
            {"id", region.id},
            {"pixel_count", region.pixels.size()},
            {"bbox", {{"row_min", row_min},
                      {"col_min", col_min},
                      {"row_max", row_max},
                      {"col_max", col_max}}},
            {"mean_level", region.mean_level},
        });
    }
    return table;
}

/// On-disk per-module report. Deliberately timestamp-free so identical runs
/// produce identical bytes.
inline nlohmann::json report_to_json(const std::string& module_id,
                                     const AbnormalityReport& triage,
                                     const RunConfig& cfg,
                                     const std::optional<MetricRow>& metrics,
                                     const std::vector<Region>* regions) {
    nlohmann::json j{
        {"module_id", module_id},
        {"tool_version", kToolVersion},
        {"verdict", to_string(triage.verdict)},
        {"stats", {{"t_max", triage.stats.t_max},
                   {"t_min", triage.stats.t_min},
                   {"t_mean", triage.stats.t_mean}}},
        {"thresholds", {{"t_h", triage.thresholds.t_h}, {"t_l", triage.thresholds.t_l}}},
        {"a_c", triage.outlier_count},
        {"module_area", triage.module_area},
        {"params", params_to_json(cfg)},
        {"metrics", metrics ? metrics_to_json(*metrics) : nlohmann::json(nullptr)},
        {"region_table", regions ? region_table_json(*regions) : nlohmann::json(nullptr)},
    };
    return j;
}

/// Runs the full per-module pipeline and writes this entry's artifacts under
/// out_dir: <id>_report.json always; <id>_stretched.png, <id>_mask.png,
/// <id>_labels.png and <id>_heatmap.png only when the module is abnormal.
inline EntryResult process_entry(const ManifestEntry& entry, const RunConfig& cfg,
                                 const ColorMap& cmap,
                                 const std::filesystem::path& out_dir) {
    EntryResult result;
    result.module_id = entry.module_id;
    try {
        const ThermalImage thermal = load_entry_thermal(entry);
        const AbnormalityReport triage = classify(thermal, cfg.threshold_mode);
        result.triage = triage;

        if (triage.verdict == Verdict::normal) {
            result.status = EntryStatus::skipped_normal;
            write_text_file(out_dir / (entry.module_id + "_report.json"),
                            report_to_json(entry.module_id, triage, cfg, std::nullopt,
                                           nullptr)
                                    .dump(2) +
                                "\n");
            return result;
        }

        const GrayImage gray = thermal_to_gray(thermal, cfg.depth);
        GrayImage stretched = gray;
        try {
            stretched = cfg.normalize_stretch ? stretch_then_normalize(gray)
                                              : exponential_stretch(gray);
        } catch (const DegenerateRange&) {
            // Constant image: nothing to stretch, segment the plain gray.
        }

        const SegmentationResult seg = segment(stretched, cfg.segmentation_params());

        if (entry.truth_mask_path) {
            const BinaryMask truth = load_mask(*entry.truth_mask_path);
            result.metrics = evaluate_pair(seg.mask, truth);
        }

        const GrayImage intensity = deterioration_intensity(stretched, seg.mask);
        save_gray(stretched, out_dir / (entry.module_id + "_stretched.png"));
        save_mask(seg.mask, out_dir / (entry.module_id + "_mask.png"));
        save_rgb(colorize_labels(seg.labels), out_dir / (entry.module_id + "_labels.png"));
        save_rgb(render_heatmap(intensity, cmap), out_dir / (entry.module_id + "_heatmap.png"));
        write_text_file(out_dir / (entry.module_id + "_report.json"),
                        report_to_json(entry.module_id, triage, cfg, result.metrics,
                                       &seg.regions)
                                .dump(2) +
                            "\n");
        result.status = EntryStatus::processed;
    } catch (const std::exception& e) {
        result.status = EntryStatus::failed;
        result.error = e.what();
    }
    return result;
}

inline nlohmann::json aggregate_to_json(const AggregateStats& agg) {
    auto one = [](const std::optional<MetricMoments>& m) -> nlohmann::json {
        if (!m) return nullptr;
        return nlohmann::json{{"mean", m->mean}, {"stddev", m->stddev}, {"count", m->count}};
    };
    return nlohmann::json{
        {"iou", one(agg.iou)},
        {"dice", one(agg.dice)},
        {"precision", one(agg.precision)},
        {"recall", one(agg.recall)},
        {"rand_index", one(agg.rand_index)},
    };
}

inline nlohmann::json summary_to_json(const BatchSummary& summary, const RunConfig& cfg) {
    nlohmann::json entries = nlohmann::json::array();
    for (const EntryResult& r : summary.entries) {
        nlohmann::json e{
            {"module_id", r.module_id},
            {"status", to_string(r.status)},
        };
        if (r.triage) {
            e["verdict"] = to_string(r.triage->verdict);
            e["a_c"] = r.triage->outlier_count;
        }
        if (r.metrics)
            e["metrics"] = metrics_to_json(*r.metrics);
        if (r.status == EntryStatus::failed)
            e["error"] = r.error;
        entries.push_back(std::move(e));
    }
    return nlohmann::json{
        {"tool_version", kToolVersion},
        {"params", params_to_json(cfg)},
        {"counts", {{"processed", summary.processed},
                    {"skipped_normal", summary.skipped},
                    {"failed", summary.failed}}},
        {"entries", std::move(entries)},
        {"aggregate", summary.aggregate ? aggregate_to_json(*summary.aggregate)
                                        : nlohmann::json(nullptr)},
    };
}

/// Aligned per-metric mean/stddev table for terminal output.
inline std::string summary_table_text(const BatchSummary& summary,
                                      const std::string& method_name = "region-growing") {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-16s %-5s %9s %9s %9s %9s %9s\n", "Method", "",
                  "IoU", "DSC", "Prec", "Recall", "RI");
    out += line;
    if (!summary.aggregate) {
        out += "(no evaluated pairs)\n";
        return out;
    }
    auto fmt = [](const std::optional<MetricMoments>& m, bool sigma) {
        char buf[16];
        if (!m)
            std::snprintf(buf, sizeof(buf), "%9s", "n/a");
        else
            std::snprintf(buf, sizeof(buf), "%9.4f", sigma ? m->stddev : m->mean);
        return std::string(buf);
    };
    const AggregateStats& a = *summary.aggregate;
    out += std::string(0, ' ');
    std::snprintf(line, sizeof(line), "%-16s %-5s", method_name.c_str(), "mu");
    out += line;
    for (const auto* m : {&a.iou, &a.dice, &a.precision, &a.recall, &a.rand_index})
        out += " " + fmt(*m, false);
    out += "\n";
    std::snprintf(line, sizeof(line), "%-16s %-5s", "", "sigma");
    out += line;
    for (const auto* m : {&a.iou, &a.dice, &a.precision, &a.recall, &a.rand_index})
        out += " " + fmt(*m, true);
    out += "\n";
    return out;
}

/// Full batch run: per-entry pipelines (optionally on cfg.jobs threads),
/// failures isolated per entry, results joined in module_id order, aggregate
/// metrics computed over evaluated entries, summary.json written to out_dir.
inline BatchSummary run_batch(const Manifest& manifest, const RunConfig& cfg,
                              const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const ColorMap cmap = cfg.cmap_path ? load_colormap(*cfg.cmap_path)
                                        : ColorMap::default_map();

    std::vector<EntryResult> results(manifest.entries.size());
    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1 || manifest.entries.size() <= 1) {
        for (std::size_t i = 0; i < manifest.entries.size(); ++i)
            results[i] = process_entry(manifest.entries[i], cfg, cmap, out_dir);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < manifest.entries.size();
                 i = next.fetch_add(1))
                results[i] = process_entry(manifest.entries[i], cfg, cmap, out_dir);
        };
        std::vector<std::thread> pool;
        const int n = std::min<int>(jobs, static_cast<int>(manifest.entries.size()));
        pool.reserve(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }

    BatchSummary summary;
    summary.entries = std::move(results);
    std::sort(summary.entries.begin(), summary.entries.end(),
              [](const EntryResult& a, const EntryResult& b) {
                  return a.module_id < b.module_id;
              });

    std::vector<MetricRow> rows;
    for (const EntryResult& r : summary.entries) {
        switch (r.status) {
            case EntryStatus::processed: ++summary.processed; break;
            case EntryStatus::skipped_normal: ++summary.skipped; break;
            case EntryStatus::failed: ++summary.failed; break;
        }
        if (r.metrics)
            rows.push_back(*r.metrics);
    }
    if (!rows.empty())
        summary.aggregate = aggregate(rows);

    write_text_file(out_dir / "summary.json", summary_to_json(summary, cfg).dump(2) + "\n");
    return summary;
}

} // namespace pvtherm
