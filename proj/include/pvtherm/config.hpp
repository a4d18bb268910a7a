#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "pvtherm/abnormality.hpp"
#include "pvtherm/segmentation.hpp"

namespace pvtherm {

/// Effective run parameters. Precedence is command-line flag > config file >
/// built-in default; unset tau/epsilon fall back to depth-derived defaults.
struct RunConfig {
    FormulaMode threshold_mode = FormulaMode::corrected;
    int depth = 256;
    std::optional<int> tau;
    std::optional<double> epsilon;
    int connectivity = 8;
    int min_region_px = 5;
    bool normalize_stretch = false;
    std::optional<std::string> cmap_path;
    int jobs = 1;

    int effective_tau() const { return tau.value_or(default_tau(depth)); }
    double effective_epsilon() const { return epsilon.value_or(default_epsilon(depth)); }

    SegmentationParams segmentation_params() const {
        return SegmentationParams{effective_tau(), effective_epsilon(), connectivity,
                                  min_region_px};
    }
};

inline FormulaMode parse_threshold_mode(const std::string& value) {
    if (value == "corrected")
        return FormulaMode::corrected;
    if (value == "paper-literal" || value == "paper_literal")
        return FormulaMode::paper_literal;
    throw InvalidArgument("threshold mode must be 'corrected' or 'paper-literal', got '" +
                          value + "'");
}

namespace detail {

inline int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw InvalidArgument("config key '" + key + "' needs an integer, got '" + value + "'");
    return out;
}

inline double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw InvalidArgument("config key '" + key + "' needs a number, got '" + value + "'");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw InvalidArgument("config key '" + key + "' needs true/false, got '" + value + "'");
}

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace detail

/// Applies a flat `key = value` config file on top of `cfg`. Lines starting
/// with '#' and blank lines are ignored; unknown keys are errors.
inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw UnreadableFile("cannot open config file " + path.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped[0] == '#')
            continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config line " + std::to_string(line_no) +
                                  " is not 'key = value': " + stripped);
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        if (key == "threshold_mode")
            cfg.threshold_mode = parse_threshold_mode(value);
        else if (key == "depth")
            cfg.depth = detail::parse_int(key, value);
        else if (key == "tau")
            cfg.tau = detail::parse_int(key, value);
        else if (key == "epsilon")
            cfg.epsilon = detail::parse_double(key, value);
        else if (key == "connectivity")
            cfg.connectivity = detail::parse_int(key, value);
        else if (key == "min_region_px")
            cfg.min_region_px = detail::parse_int(key, value);
        else if (key == "normalize_stretch")
            cfg.normalize_stretch = detail::parse_bool(key, value);
        else if (key == "cmap")
            cfg.cmap_path = value;
        else if (key == "jobs")
            cfg.jobs = detail::parse_int(key, value);
        else
            throw InvalidArgument("unknown config key '" + key + "' on line " +
                                  std::to_string(line_no));
    }
}

} // namespace pvtherm
