#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pvtherm/abnormality.hpp"
#include "pvtherm/config.hpp"
#include "pvtherm/enhancement.hpp"
#include "pvtherm/heatmap.hpp"
#include "pvtherm/io.hpp"
#include "pvtherm/metrics.hpp"
#include "pvtherm/pipeline.hpp"
#include "pvtherm/segmentation.hpp"
#include "pvtherm/synth.hpp"
#include "pvtherm/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitProcessing = 1;
constexpr int kExitUsage = 2;

struct CliState {
    // global
    std::string config_path;
    std::string out_dir;
    std::string threshold_mode;
    int jobs = 1;
    // shared pipeline knobs
    int depth = 256;
    int tau = 0;
    double epsilon = 0.0;
    int connectivity = 8;
    int min_region = 5;
    bool normalize_stretch = false;
    std::string cmap_path;
    // per-subcommand inputs
    std::vector<std::string> analyze_inputs;
    std::string input_path;
    std::string output_path;
    std::string mask_out, labels_out, regions_out;
    std::string pred_path, truth_path, manifest_path, pred_dir;
    std::string spec_path;
};

pvtherm::ThermalImage load_thermal_any(const fs::path& path) {
    std::string ext = path.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".csv")
        return pvtherm::load_thermal_csv(path);
    // Gray image levels read as degrees Celsius.
    const pvtherm::GrayImage gray = pvtherm::load_gray(path);
    pvtherm::Grid<double> temps(gray.width(), gray.height(), 0.0);
    for (std::size_t i = 0; i < temps.pixel_count(); ++i)
        temps[i] = static_cast<double>(gray.levels()[i]);
    return pvtherm::ThermalImage(std::move(temps));
}

int cmd_analyze(const CliState& st, const pvtherm::RunConfig& cfg, bool write_reports) {
    std::printf("%-24s %9s %9s %9s %9s  %s\n", "Panel", "T_max", "T_min", "T_mean", "a_c",
                "verdict");
    bool any_failed = false;
    for (const std::string& input : st.analyze_inputs) {
        const std::string id = fs::path(input).stem().string();
        try {
            const pvtherm::ThermalImage thermal = load_thermal_any(input);
            const pvtherm::AbnormalityReport report =
                pvtherm::classify(thermal, cfg.threshold_mode);
            std::printf("%-24s %9.2f %9.2f %9.2f %9llu  %s\n", id.c_str(),
                        report.stats.t_max, report.stats.t_min, report.stats.t_mean,
                        static_cast<unsigned long long>(report.outlier_count),
                        pvtherm::to_string(report.verdict));
            if (write_reports) {
                fs::create_directories(st.out_dir);
                pvtherm::write_text_file(
                    fs::path(st.out_dir) / (id + "_report.json"),
                    pvtherm::report_to_json(id, report, cfg, std::nullopt, nullptr).dump(2) +
                        "\n");
            }
        } catch (const std::exception& e) {
            any_failed = true;
            std::fprintf(stderr, "error: %s: %s\n", input.c_str(), e.what());
        }
    }
    return any_failed ? kExitProcessing : kExitOk;
}

int cmd_enhance(const CliState& st, const pvtherm::RunConfig& cfg) {
    const pvtherm::GrayImage input = pvtherm::load_gray(st.input_path);
    const pvtherm::GrayImage stretched = cfg.normalize_stretch
                                             ? pvtherm::stretch_then_normalize(input)
                                             : pvtherm::exponential_stretch(input);
    pvtherm::save_gray(stretched, st.output_path);
    return kExitOk;
}

int cmd_segment(const CliState& st, const pvtherm::RunConfig& cfg) {
    const pvtherm::GrayImage input = pvtherm::load_gray(st.input_path);
    const pvtherm::SegmentationResult result =
        pvtherm::segment(input, cfg.segmentation_params());

    const std::string stem = fs::path(st.input_path).stem().string();
    fs::create_directories(st.out_dir);
    const fs::path mask_path =
        st.mask_out.empty() ? fs::path(st.out_dir) / (stem + "_mask.png") : fs::path(st.mask_out);
    const fs::path labels_path = st.labels_out.empty()
                                     ? fs::path(st.out_dir) / (stem + "_labels.png")
                                     : fs::path(st.labels_out);
    const fs::path regions_path = st.regions_out.empty()
                                      ? fs::path(st.out_dir) / (stem + "_regions.json")
                                      : fs::path(st.regions_out);

    pvtherm::save_mask(result.mask, mask_path);
    pvtherm::save_rgb(pvtherm::colorize_labels(result.labels), labels_path);
    json regions{{"module_id", stem},
                 {"tool_version", pvtherm::kToolVersion},
                 {"params", pvtherm::params_to_json(cfg)},
                 {"region_table", pvtherm::region_table_json(result.regions)}};
    pvtherm::write_text_file(regions_path, regions.dump(2) + "\n");
    std::printf("%zu region(s), %zu deteriorated pixel(s)\n", result.regions.size(),
                result.mask.ones());
    return kExitOk;
}

int cmd_evaluate(const CliState& st, const pvtherm::RunConfig& cfg, bool have_out_dir) {
    std::vector<std::pair<std::string, pvtherm::MetricRow>> rows;
    if (!st.manifest_path.empty()) {
        const pvtherm::Manifest manifest = pvtherm::scan_manifest(st.manifest_path);
        for (const auto& entry : manifest.entries) {
            if (!entry.truth_mask_path)
                continue;
            const fs::path pred = fs::path(st.pred_dir) / (entry.module_id + "_mask.png");
            rows.emplace_back(entry.module_id,
                              pvtherm::evaluate_pair(pvtherm::load_mask(pred),
                                                     pvtherm::load_mask(*entry.truth_mask_path)));
        }
    } else {
        rows.emplace_back(fs::path(st.pred_path).stem().string(),
                          pvtherm::evaluate_pair(pvtherm::load_mask(st.pred_path),
                                                 pvtherm::load_mask(st.truth_path)));
    }

    json row_json = json::array();
    std::vector<pvtherm::MetricRow> bare;
    for (const auto& [id, row] : rows) {
        json r = pvtherm::metrics_to_json(row);
        r["module_id"] = id;
        row_json.push_back(std::move(r));
        bare.push_back(row);
    }
    pvtherm::BatchSummary printable;
    if (!bare.empty())
        printable.aggregate = pvtherm::aggregate(bare);
    std::fputs(pvtherm::summary_table_text(printable).c_str(), stdout);

    if (have_out_dir) {
        fs::create_directories(st.out_dir);
        json doc{{"tool_version", pvtherm::kToolVersion},
                 {"rows", std::move(row_json)},
                 {"aggregate", printable.aggregate
                                   ? pvtherm::aggregate_to_json(*printable.aggregate)
                                   : json(nullptr)}};
        pvtherm::write_text_file(fs::path(st.out_dir) / "evaluation.json",
                                 doc.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_heatmap(const CliState& st, const pvtherm::RunConfig& cfg) {
    pvtherm::GrayImage intensity = pvtherm::load_gray(st.input_path);
    if (!st.mask_out.empty()) {
        const pvtherm::BinaryMask mask = pvtherm::load_mask(st.mask_out);
        intensity = pvtherm::deterioration_intensity(intensity, mask);
    }
    const pvtherm::ColorMap cmap = cfg.cmap_path
                                       ? pvtherm::load_colormap(*cfg.cmap_path)
                                       : pvtherm::ColorMap::default_map();
    pvtherm::save_rgb(pvtherm::render_heatmap(intensity, cmap), st.output_path);
    return kExitOk;
}

int cmd_synth(const CliState& st) {
    const pvtherm::PanelSpec spec = pvtherm::load_panel_spec(st.spec_path);
    const pvtherm::SynthResult result = pvtherm::generate(spec);

    const std::string stem = fs::path(st.spec_path).stem().string();
    fs::create_directories(st.out_dir);
    const fs::path csv_path = fs::path(st.out_dir) / (stem + ".csv");
    const fs::path truth_path = fs::path(st.out_dir) / (stem + "_truth.png");
    pvtherm::save_thermal_csv(result.image, csv_path);
    pvtherm::save_mask(result.truth, truth_path);

    json provenance{{"tool_version", pvtherm::kToolVersion},
                    {"spec", spec},
                    {"outputs", {{"thermal_csv", csv_path.filename().string()},
                                 {"truth_mask", truth_path.filename().string()}}}};
    pvtherm::write_text_file(fs::path(st.out_dir) / (stem + "_provenance.json"),
                             provenance.dump(2) + "\n");
    std::printf("wrote %s, %s\n", csv_path.string().c_str(), truth_path.string().c_str());
    return kExitOk;
}

int cmd_batch(const CliState& st, const pvtherm::RunConfig& cfg) {
    const pvtherm::Manifest manifest = pvtherm::scan_manifest(st.manifest_path);
    const pvtherm::BatchSummary summary = pvtherm::run_batch(manifest, cfg, st.out_dir);
    for (const pvtherm::EntryResult& entry : summary.entries)
        if (entry.status == pvtherm::EntryStatus::failed)
            std::fprintf(stderr, "error: %s: %s\n", entry.module_id.c_str(),
                         entry.error.c_str());
    std::printf("processed %zu, skipped %zu normal, %zu failed\n", summary.processed,
                summary.skipped, summary.failed);
    std::fputs(pvtherm::summary_table_text(summary).c_str(), stdout);
    return summary.failed == 0 ? kExitOk : kExitProcessing;
}

} // namespace

int main(int argc, char** argv) {
    CliState st;
    CLI::App app{"Thermal PV module analysis: triage, stretching, region-growing "
                 "segmentation, evaluation, and heat-map rendering"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pvtherm::kToolVersion);

    auto* opt_config = app.add_option("--config", st.config_path, "key = value config file");
    auto* opt_out = app.add_option("--out-dir", st.out_dir, "output directory");
    auto* opt_mode = app.add_option("--threshold-mode", st.threshold_mode,
                                    "abnormality threshold formula")
                         ->check(CLI::IsMember({"corrected", "paper-literal"}));
    auto* opt_jobs = app.add_option("--jobs", st.jobs, "parallel batch workers")
                         ->check(CLI::PositiveNumber);

    CLI::App* analyze = app.add_subcommand("analyze", "classify modules as normal/abnormal");
    analyze->add_option("inputs", st.analyze_inputs, "thermal CSVs or gray images")
        ->required()
        ->expected(-1);

    CLI::App* enhance = app.add_subcommand("enhance", "exponential luminance stretch");
    enhance->add_option("input", st.input_path, "gray image")->required();
    enhance->add_option("-o,--output", st.output_path, "stretched PNG")->required();
    auto* opt_norm_e = enhance->add_flag("--normalize-stretch", st.normalize_stretch,
                                         "rescale stretched output to the full range");

    CLI::App* segment_cmd = app.add_subcommand("segment", "region-growing segmentation");
    segment_cmd->add_option("input", st.input_path, "gray image (typically stretched)")
        ->required();
    auto* opt_tau_s = segment_cmd->add_option("--tau", st.tau, "seed threshold");
    auto* opt_eps_s = segment_cmd->add_option("--epsilon", st.epsilon, "homogeneity tolerance");
    auto* opt_conn_s = segment_cmd->add_option("--connectivity", st.connectivity)
                           ->check(CLI::IsMember({4, 8}));
    auto* opt_minr_s = segment_cmd->add_option("--min-region", st.min_region,
                                               "minimum region size in pixels");
    segment_cmd->add_option("--mask-out", st.mask_out, "mask PNG path");
    segment_cmd->add_option("--labels-out", st.labels_out, "label colormap PNG path");
    segment_cmd->add_option("--regions-out", st.regions_out, "region table JSON path");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score masks against ground truth");
    auto* opt_pred = evaluate->add_option("--pred", st.pred_path, "predicted mask PNG");
    auto* opt_truth = evaluate->add_option("--truth", st.truth_path, "ground-truth mask PNG");
    auto* opt_manifest_e = evaluate->add_option("--manifest", st.manifest_path,
                                                "manifest with truth_mask_path entries");
    auto* opt_pred_dir = evaluate->add_option("--pred-dir", st.pred_dir,
                                              "directory of <module_id>_mask.png predictions");
    opt_pred->needs(opt_truth);
    opt_manifest_e->needs(opt_pred_dir);
    opt_manifest_e->excludes(opt_pred);

    CLI::App* heatmap_cmd = app.add_subcommand("heatmap", "render a deterioration heat map");
    heatmap_cmd->add_option("input", st.input_path, "intensity image")->required();
    heatmap_cmd->add_option("--mask", st.mask_out, "restrict intensity to this mask");
    heatmap_cmd->add_option("-o,--output", st.output_path, "heat-map PNG")->required();
    auto* opt_cmap_h = heatmap_cmd->add_option("--cmap", st.cmap_path,
                                               "colormap file of 'position r g b' lines");

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic panel + ground truth");
    synth->add_option("--spec", st.spec_path, "panel spec JSON")->required();

    CLI::App* batch = app.add_subcommand("batch", "run the full pipeline over a manifest");
    batch->add_option("manifest", st.manifest_path, "manifest JSON")->required();
    auto* opt_tau_b = batch->add_option("--tau", st.tau, "seed threshold");
    auto* opt_eps_b = batch->add_option("--epsilon", st.epsilon, "homogeneity tolerance");
    auto* opt_conn_b = batch->add_option("--connectivity", st.connectivity)
                           ->check(CLI::IsMember({4, 8}));
    auto* opt_minr_b = batch->add_option("--min-region", st.min_region,
                                         "minimum region size in pixels");
    auto* opt_norm_b = batch->add_flag("--normalize-stretch", st.normalize_stretch,
                                       "rescale stretched output to the full range");
    auto* opt_cmap_b = batch->add_option("--cmap", st.cmap_path, "colormap file");
    auto* opt_depth_b = batch->add_option("--depth", st.depth, "luminance levels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    // flag > config file > built-in default
    pvtherm::RunConfig cfg;
    try {
        if (opt_config->count())
            pvtherm::apply_config_file(cfg, st.config_path);
        if (opt_mode->count())
            cfg.threshold_mode = pvtherm::parse_threshold_mode(st.threshold_mode);
        if (opt_jobs->count())
            cfg.jobs = st.jobs;
        if (opt_depth_b->count())
            cfg.depth = st.depth;
        if (opt_tau_s->count() || opt_tau_b->count())
            cfg.tau = st.tau;
        if (opt_eps_s->count() || opt_eps_b->count())
            cfg.epsilon = st.epsilon;
        if (opt_conn_s->count() || opt_conn_b->count())
            cfg.connectivity = st.connectivity;
        if (opt_minr_s->count() || opt_minr_b->count())
            cfg.min_region_px = st.min_region;
        if (opt_norm_e->count() || opt_norm_b->count())
            cfg.normalize_stretch = st.normalize_stretch;
        if (opt_cmap_h->count() || opt_cmap_b->count())
            cfg.cmap_path = st.cmap_path;
        pvtherm::validate_params(cfg.segmentation_params(), cfg.depth);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitUsage;
    }

    try {
        if (analyze->parsed())
            return cmd_analyze(st, cfg, opt_out->count() > 0);
        if (enhance->parsed())
            return cmd_enhance(st, cfg);
        if (segment_cmd->parsed())
            return cmd_segment(st, cfg);
        if (evaluate->parsed()) {
            if (st.manifest_path.empty() && (st.pred_path.empty() || st.truth_path.empty())) {
                std::fprintf(stderr,
                             "usage error: evaluate needs --pred/--truth or "
                             "--manifest/--pred-dir\n");
                return kExitUsage;
            }
            return cmd_evaluate(st, cfg, opt_out->count() > 0);
        }
        if (heatmap_cmd->parsed())
            return cmd_heatmap(st, cfg);
        if (synth->parsed())
            return cmd_synth(st);
        if (batch->parsed())
            return cmd_batch(st, cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitProcessing;
    }
    return kExitUsage;
}
