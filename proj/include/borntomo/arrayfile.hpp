#pragma once

// Self-describing binary arrays: one JSON header line
//   {"byte_order":"little-endian","dtype":"f64"|"c128","order":"row-major","shape":[rows,cols]}
// followed by the raw little-endian payload.

#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "borntomo/errors.hpp"

namespace borntomo {

namespace arrayfile_detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

inline void swap_bytes(char* p, std::size_t width) {
    for (std::size_t a = 0, b = width - 1; a < b; ++a, --b) std::swap(p[a], p[b]);
}

inline void write_doubles(std::ostream& os, const double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            char b[sizeof(double)];
            std::memcpy(b, data + i, sizeof b);
            swap_bytes(b, sizeof b);
            os.write(b, sizeof b);
        }
    }
}

inline void read_doubles(std::istream& is, double* data, std::size_t count) {
    is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != count * sizeof(double))
        throw Error(ErrorKind::io, "array payload is truncated");
    if constexpr (std::endian::native != std::endian::little) {
        for (std::size_t i = 0; i < count; ++i) swap_bytes(reinterpret_cast<char*>(data + i), sizeof(double));
    }
}

} // namespace arrayfile_detail

enum class DType { f64, c128 };

inline const char* to_string(DType d) { return d == DType::f64 ? "f64" : "c128"; }

struct ArrayHeader {
    DType dtype = DType::f64;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t count() const { return rows * cols; }
};

template <class T>
struct Array2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;
};

using RealArray = Array2D<double>;
using ComplexArray = Array2D<std::complex<double>>;

inline void write_header(std::ostream& os, const ArrayHeader& h) {
    const nlohmann::json j = {{"byte_order", "little-endian"},
                              {"dtype", to_string(h.dtype)},
                              {"order", "row-major"},
                              {"shape", {h.rows, h.cols}}};
    os << j.dump() << '\n';
}

inline ArrayHeader read_header(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::io, "array file has no header line");
    try {
        const auto j = nlohmann::json::parse(line);
        require(j.at("byte_order") == "little-endian", ErrorKind::io, "unsupported byte order");
        require(j.at("order") == "row-major", ErrorKind::io, "unsupported array order");
        const auto shape = j.at("shape");
        require(shape.is_array() && shape.size() == 2, ErrorKind::io, "array shape must have two entries");
        ArrayHeader h;
        const auto dtype = j.at("dtype").get<std::string>();
        if (dtype == "f64")
            h.dtype = DType::f64;
        else if (dtype == "c128")
            h.dtype = DType::c128;
        else
            throw Error(ErrorKind::io, "unsupported dtype '" + dtype + "'");
        h.rows = shape[0].get<std::size_t>();
        h.cols = shape[1].get<std::size_t>();
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, std::string("malformed array header: ") + e.what());
    }
}

inline void write_array(std::ostream& os, std::span<const double> values, std::size_t rows, std::size_t cols) {
    check_size(values.size(), rows * cols, "array payload");
    write_header(os, {DType::f64, rows, cols});
    arrayfile_detail::write_doubles(os, values.data(), values.size());
}

inline void write_array(std::ostream& os, std::span<const std::complex<double>> values, std::size_t rows,
                        std::size_t cols) {
    check_size(values.size(), rows * cols, "array payload");
    write_header(os, {DType::c128, rows, cols});
    arrayfile_detail::write_doubles(os, reinterpret_cast<const double*>(values.data()), 2 * values.size());
}

inline RealArray read_real_array(std::istream& is) {
    const auto h = read_header(is);
    require(h.dtype == DType::f64, ErrorKind::dimension, "expected a real (f64) array");
    RealArray a{h.rows, h.cols, std::vector<double>(h.count())};
    arrayfile_detail::read_doubles(is, a.data.data(), a.data.size());
    return a;
}

inline ComplexArray read_complex_array(std::istream& is) {
    const auto h = read_header(is);
    require(h.dtype == DType::c128, ErrorKind::dimension, "expected a complex (c128) array");
    ComplexArray a{h.rows, h.cols, std::vector<std::complex<double>>(h.count())};
    arrayfile_detail::read_doubles(is, reinterpret_cast<double*>(a.data.data()), 2 * a.data.size());
    return a;
}

namespace arrayfile_detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::io, "cannot write " + p.string());
    return os;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw Error(ErrorKind::io, "cannot read " + p.string());
    return is;
}

} // namespace arrayfile_detail

template <class T>
void write_array_file(const std::filesystem::path& p, std::span<const T> values, std::size_t rows, std::size_t cols) {
    auto os = arrayfile_detail::open_out(p);
    write_array(os, values, rows, cols);
    if (!os) throw Error(ErrorKind::io, "write failed for " + p.string());
}

inline RealArray read_real_array_file(const std::filesystem::path& p) {
    auto is = arrayfile_detail::open_in(p);
    return read_real_array(is);
}

inline ComplexArray read_complex_array_file(const std::filesystem::path& p) {
    auto is = arrayfile_detail::open_in(p);
    return read_complex_array(is);
}

} // namespace borntomo
