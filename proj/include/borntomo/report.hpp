#pragma once

// Serialization of reconstruction results: JSON reports, CSV traces,
// grayscale renderings and content hashes.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#ifdef BORNTOMO_HAVE_PNG
#include <png.h>
#endif

#include "borntomo/errors.hpp"
#include "borntomo/regopt.hpp"
#include "borntomo/scene.hpp"

namespace borntomo {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline std::string scene_hash(const Scene& s) { return hex64(fnv1a(scene_to_json(s).dump())); }

/// Report contents that are a pure function of the inputs. Wall time is
/// kept out so that reruns produce identical files.
inline nlohmann::json report_to_json(const ReconstructionReport& r) {
    nlohmann::json j;
    j["method"] = to_string(r.method);
    j["layers"] = r.layers;
    j["tau"] = r.tau;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["status"] = r.status;
    j["data_fit"] = r.data_fit;
    j["final_data_fit"] = r.data_fit.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.data_fit.back());
    j["final_objective"] =
        r.history.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.history.back().objective);
    j["snr_db"] = r.snr_db ? nlohmann::json(*r.snr_db) : nlohmann::json(nullptr);
    return j;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::io, "cannot write " + p.string());
    os << text;
    if (!os) throw Error(ErrorKind::io, "write failed for " + p.string());
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// iteration,outer,objective,data_fit,step
inline std::string trace_csv(const ReconstructionReport& r) {
    std::string out = "iteration,outer,objective,data_fit,step\n";
    for (std::size_t i = 0; i < r.history.size(); ++i) {
        const auto& h = r.history[i];
        out += std::to_string(i + 1) + "," + std::to_string(h.outer) + "," + format_double(h.objective) + "," +
               format_double(h.data_fit) + "," + format_double(h.step) + "\n";
    }
    return out;
}

struct ImageScale {
    double min = 0.0;
    double max = 0.0;
};

/// Min-max scaled 8-bit image, top row = largest y.
inline std::vector<unsigned char> to_gray8(std::span<const double> f, std::size_t nx, std::size_t ny,
                                           ImageScale& scale) {
    check_size(f.size(), nx * ny, "image data");
    scale.min = f.empty() ? 0.0 : *std::min_element(f.begin(), f.end());
    scale.max = f.empty() ? 0.0 : *std::max_element(f.begin(), f.end());
    const double span = scale.max - scale.min;
    std::vector<unsigned char> px(nx * ny, 0);
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const double v = span > 0 ? (f[j * nx + i] - scale.min) / span : 0.0;
            px[(ny - 1 - j) * nx + i] = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        }
    return px;
}

inline void write_pgm(const std::filesystem::path& p, const std::vector<unsigned char>& px, std::size_t nx,
                      std::size_t ny) {
    std::string data = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
    data.append(reinterpret_cast<const char*>(px.data()), px.size());
    write_text(p, data);
}

inline constexpr bool png_supported() {
#ifdef BORNTOMO_HAVE_PNG
    return true;
#else
    return false;
#endif
}

inline void write_png(const std::filesystem::path& p, const std::vector<unsigned char>& px, std::size_t nx,
                      std::size_t ny) {
#ifdef BORNTOMO_HAVE_PNG
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(nx);
    img.height = static_cast<png_uint_32>(ny);
    img.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&img, p.string().c_str(), 0, px.data(), static_cast<png_int_32>(nx), nullptr))
        throw Error(ErrorKind::io, "cannot write " + p.string() + ": " + img.message);
#else
    (void)p, (void)px, (void)nx, (void)ny;
    throw Error(ErrorKind::io, "PNG output is not available in this build");
#endif
}

/// Writes <stem>.pgm (and <stem>.png when available); returns the scale used.
inline ImageScale write_images(const std::filesystem::path& stem, std::span<const double> f, const Grid2D& grid) {
    ImageScale scale;
    const auto px = to_gray8(f, grid.count_x(), grid.count_y(), scale);
    auto pgm = stem;
    write_pgm(pgm.replace_extension(".pgm"), px, grid.count_x(), grid.count_y());
    if constexpr (png_supported()) {
        auto png = stem;
        write_png(png.replace_extension(".png"), px, grid.count_x(), grid.count_y());
    }
    return scale;
}

} // namespace borntomo
