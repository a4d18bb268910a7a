#pragma once

#include <array>
#include <charconv>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <unordered_set>
#include <utility>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include <json.hpp>

#include "pvtherm/raster.hpp"
#include "pvtherm/synth.hpp"

namespace pvtherm {

/// Integer luma of an RGB triple: round(0.299 R + 0.587 G + 0.114 B).
inline int luma(Rgb c) {
    return round_half_up(0.299 * c.r + 0.587 * c.g + 0.114 * c.b);
}

namespace detail {

enum class RasterFormat { png, jpeg };

inline RasterFormat sniff_format(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UnreadableFile("cannot open " + path.string());
    std::array<unsigned char, 8> magic{};
    in.read(reinterpret_cast<char*>(magic.data()), magic.size());
    if (in.gcount() < 3)
        throw UnreadableFile("file too short: " + path.string());
    static constexpr std::array<unsigned char, 8> png_sig{0x89, 'P', 'N', 'G',
                                                          0x0D, 0x0A, 0x1A, 0x0A};
    if (in.gcount() >= 8 && magic == png_sig)
        return RasterFormat::png;
    if (magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF)
        return RasterFormat::jpeg;
    throw UnsupportedFormat("not a PNG or JPEG file: " + path.string());
}

inline std::vector<unsigned char> read_png_rgb(const std::filesystem::path& path,
                                               int& width, int& height) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw UnreadableFile("cannot read PNG " + path.string() + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
    const png_color black{0, 0, 0}; // alpha, if any, is composited onto black
    if (!png_image_finish_read(&image, &black, buffer.data(), 0, nullptr)) {
        const std::string message = image.message;
        png_image_free(&image);
        throw UnreadableFile("cannot decode PNG " + path.string() + ": " + message);
    }
    width = static_cast<int>(image.width);
    height = static_cast<int>(image.height);
    return buffer;
}

struct JpegErrorContext {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

inline void jpeg_error_trampoline(j_common_ptr cinfo) {
    auto* ctx = reinterpret_cast<JpegErrorContext*>(cinfo->err);
    std::longjmp(ctx->jump, 1);
}

inline std::vector<unsigned char> read_jpeg_rgb(const std::filesystem::path& path,
                                                int& width, int& height) {
    std::FILE* file = std::fopen(path.string().c_str(), "rb");
    if (!file)
        throw UnreadableFile("cannot open " + path.string());

    jpeg_decompress_struct cinfo{};
    JpegErrorContext err{};
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_trampoline;

    // All destructible locals are constructed before setjmp so the longjmp
    // error path never skips a destructor.
    std::vector<unsigned char> pixels;
    std::vector<unsigned char> rowbuf;

    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        std::fclose(file);
        throw UnreadableFile("cannot decode JPEG " + path.string());
    }

    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    width = static_cast<int>(cinfo.output_width);
    height = static_cast<int>(cinfo.output_height);
    pixels.resize(static_cast<std::size_t>(width) * height * 3);
    rowbuf.resize(static_cast<std::size_t>(width) * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        const std::size_t row = cinfo.output_scanline;
        unsigned char* dst = rowbuf.data();
        jpeg_read_scanlines(&cinfo, &dst, 1);
        std::copy(rowbuf.begin(), rowbuf.end(),
                  pixels.begin() + static_cast<std::ptrdiff_t>(row * width * 3));
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    std::fclose(file);
    return pixels;
}

inline std::vector<unsigned char> read_rgb(const std::filesystem::path& path,
                                           int& width, int& height) {
    switch (sniff_format(path)) {
        case RasterFormat::png: return read_png_rgb(path, width, height);
        case RasterFormat::jpeg: return read_jpeg_rgb(path, width, height);
    }
    throw UnsupportedFormat("unreachable");
}

} // namespace detail

/// Decodes an 8-bit PNG or JPEG to luminance. Color inputs are reduced by
/// integer luma; grayscale inputs pass through unchanged.
inline GrayImage load_gray(const std::filesystem::path& path) {
    int width = 0, height = 0;
    const auto rgb = detail::read_rgb(path, width, height);
    Grid<int> levels(width, height, 0);
    for (std::size_t i = 0; i < levels.pixel_count(); ++i)
        levels[i] = luma(Rgb{rgb[i * 3], rgb[i * 3 + 1], rgb[i * 3 + 2]});
    return GrayImage(std::move(levels), 256);
}

/// PNG/JPEG to binary mask: luminance >= 128 reads as deteriorated.
inline BinaryMask load_mask(const std::filesystem::path& path) {
    int width = 0, height = 0;
    const auto rgb = detail::read_rgb(path, width, height);
    Grid<std::uint8_t> bits(width, height, std::uint8_t{0});
    for (std::size_t i = 0; i < bits.pixel_count(); ++i)
        bits[i] = luma(Rgb{rgb[i * 3], rgb[i * 3 + 1], rgb[i * 3 + 2]}) >= 128 ? 1 : 0;
    return BinaryMask(std::move(bits));
}

namespace detail {

inline void write_png(const std::filesystem::path& path, int width, int height,
                      png_uint_32 format, const unsigned char* data) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, data, 0, nullptr))
        throw Error("cannot write PNG " + path.string() + ": " + image.message);
}

} // namespace detail

/// Lossless mask PNG: 0 -> level 0, 1 -> level 255.
inline void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    std::vector<unsigned char> bytes(mask.pixel_count());
    const auto& bits = mask.bits().cells();
    for (std::size_t i = 0; i < bits.size(); ++i)
        bytes[i] = bits[i] ? 255 : 0;
    detail::write_png(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, bytes.data());
}

/// 8-bit grayscale PNG. Depths above 256 have no byte encoding here.
inline void save_gray(const GrayImage& img, const std::filesystem::path& path) {
    if (img.depth() > 256)
        throw UnsupportedFormat("cannot write depth > 256 as 8-bit PNG");
    std::vector<unsigned char> bytes(img.pixel_count());
    const auto& levels = img.levels().cells();
    for (std::size_t i = 0; i < levels.size(); ++i)
        bytes[i] = static_cast<unsigned char>(levels[i]);
    detail::write_png(path, img.width(), img.height(), PNG_FORMAT_GRAY, bytes.data());
}

inline void save_rgb(const RgbImage& img, const std::filesystem::path& path) {
    std::vector<unsigned char> bytes(img.pixel_count() * 3);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        bytes[i * 3] = img[i].r;
        bytes[i * 3 + 1] = img[i].g;
        bytes[i * 3 + 2] = img[i].b;
    }
    detail::write_png(path, img.width(), img.height(), PNG_FORMAT_RGB, bytes.data());
}

/// Comma-separated rows of decimal degC values. Rows must be equally long and
/// every entry finite.
inline ThermalImage load_thermal_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UnreadableFile("cannot open " + path.string());

    std::vector<double> values;
    int width = -1;
    int height = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        int row_width = 0;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos)
                comma = line.size();
            std::size_t begin = pos;
            std::size_t end = comma;
            while (begin < end && (line[begin] == ' ' || line[begin] == '\t')) ++begin;
            while (end > begin && (line[end - 1] == ' ' || line[end - 1] == '\t')) --end;
            double value = 0.0;
            const auto result = std::from_chars(line.data() + begin, line.data() + end, value);
            if (result.ec != std::errc{} || result.ptr != line.data() + end ||
                !std::isfinite(value))
                throw NonFiniteValue("non-finite or malformed entry '" +
                                     line.substr(pos, comma - pos) + "' in " + path.string());
            values.push_back(value);
            ++row_width;
            pos = comma + 1;
            if (comma == line.size())
                break;
        }
        if (width < 0)
            width = row_width;
        else if (row_width != width)
            throw RaggedRows("row " + std::to_string(height + 1) + " has " +
                             std::to_string(row_width) + " entries, expected " +
                             std::to_string(width) + " in " + path.string());
        ++height;
    }
    if (height == 0)
        throw InvalidArgument("csv has no rows: " + path.string());
    return ThermalImage(Grid<double>(width, height, std::move(values)));
}

/// Writes temperatures with shortest round-trip formatting (at least full
/// double precision survives a save/load cycle).
inline void save_thermal_csv(const ThermalImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    std::array<char, 32> buf;
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), img.at(r, c));
            if (c) out.put(',');
            out.write(buf.data(), res.ptr - buf.data());
        }
        out.put('\n');
    }
    if (!out)
        throw Error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UnreadableFile("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw Error("write failed: " + path.string());
}

/// One dataset entry. Paths are stored resolved against the manifest's
/// directory. Every entry carries at least one raster source: a displayable
/// image, a thermal CSV, or both.
struct ManifestEntry {
    std::string module_id;
    std::optional<std::filesystem::path> image_path;
    std::optional<std::filesystem::path> truth_mask_path;
    std::optional<std::filesystem::path> thermal_csv_path;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
};

namespace detail {

inline std::optional<std::filesystem::path> manifest_path_field(
    const nlohmann::json& entry, const char* key, const std::filesystem::path& base) {
    if (!entry.contains(key) || entry[key].is_null())
        return std::nullopt;
    const std::string raw = entry[key].get<std::string>();
    if (raw.empty())
        throw InvalidArgument(std::string("manifest field '") + key + "' is empty");
    std::filesystem::path p(raw);
    if (p.is_relative())
        p = base / p;
    return p;
}

} // namespace detail

/// Parses a manifest JSON file ({"entries": [...]}) and verifies that every
/// referenced file exists. Relative paths resolve against the manifest's
/// directory.
inline Manifest scan_manifest(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("malformed manifest " + path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array())
        throw InvalidArgument("manifest must be an object with an 'entries' array: " +
                              path.string());

    const std::filesystem::path base = path.has_parent_path()
                                           ? path.parent_path()
                                           : std::filesystem::path(".");
    Manifest manifest;
    std::unordered_set<std::string> seen_ids;
    for (const auto& raw : doc["entries"]) {
        ManifestEntry entry;
        if (!raw.contains("module_id") || !raw["module_id"].is_string() ||
            raw["module_id"].get<std::string>().empty())
            throw InvalidArgument("manifest entry missing module_id in " + path.string());
        entry.module_id = raw["module_id"].get<std::string>();
        if (!seen_ids.insert(entry.module_id).second)
            throw DuplicateId("duplicate module_id '" + entry.module_id + "' in " +
                              path.string());
        entry.image_path = detail::manifest_path_field(raw, "image_path", base);
        entry.truth_mask_path = detail::manifest_path_field(raw, "truth_mask_path", base);
        entry.thermal_csv_path = detail::manifest_path_field(raw, "thermal_csv_path", base);
        if (!entry.image_path && !entry.thermal_csv_path)
            throw InvalidArgument("entry '" + entry.module_id +
                                  "' needs image_path or thermal_csv_path");
        for (const auto& p : {entry.image_path, entry.truth_mask_path, entry.thermal_csv_path})
            if (p && !std::filesystem::exists(*p))
                throw MissingFile("manifest references missing file: " + p->string());
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

inline void to_json(nlohmann::json& j, const DefectSpec& d) {
    j = nlohmann::json{{"shape", to_string(d.shape)},
                       {"center_row", d.center_row},
                       {"center_col", d.center_col},
                       {"extent_rows", d.extent_rows},
                       {"extent_cols", d.extent_cols},
                       {"delta_temp", d.delta_temp}};
}

inline void from_json(const nlohmann::json& j, DefectSpec& d) {
    const std::string shape = j.at("shape").get<std::string>();
    if (shape == "rectangle")
        d.shape = DefectShape::rectangle;
    else if (shape == "ellipse")
        d.shape = DefectShape::ellipse;
    else
        throw InvalidArgument("unknown defect shape: " + shape);
    j.at("center_row").get_to(d.center_row);
    j.at("center_col").get_to(d.center_col);
    j.at("extent_rows").get_to(d.extent_rows);
    j.at("extent_cols").get_to(d.extent_cols);
    j.at("delta_temp").get_to(d.delta_temp);
}

inline void to_json(nlohmann::json& j, const PanelSpec& s) {
    j = nlohmann::json{{"width", s.width},
                       {"height", s.height},
                       {"base_temp", s.base_temp},
                       {"noise_sigma", s.noise_sigma},
                       {"seed", s.seed},
                       {"defects", s.defects}};
}

inline void from_json(const nlohmann::json& j, PanelSpec& s) {
    j.at("width").get_to(s.width);
    j.at("height").get_to(s.height);
    j.at("base_temp").get_to(s.base_temp);
    s.noise_sigma = j.value("noise_sigma", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    s.defects.clear();
    if (j.contains("defects"))
        s.defects = j.at("defects").get<std::vector<DefectSpec>>();
}

/// Reads a panel spec JSON file.
inline PanelSpec load_panel_spec(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(read_text_file(path)).get<PanelSpec>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("malformed panel spec " + path.string() + ": " + e.what());
    }
}

} // namespace pvtherm
