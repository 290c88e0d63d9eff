#pragma once

// Physical experiment description: imaging grid, background medium,
// line sources and sensors, plus phantom construction.
// Lengths are centimeters throughout.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "borntomo/errors.hpp"

namespace borntomo {

using cplx = std::complex<double>;
using RealVector = std::vector<double>;
using ComplexVector = std::vector<cplx>;
/// Complex field sampled at grid cell centers.
using FieldMap = ComplexVector;
/// Real scattering potential f = kb^2 (eps - eps_b), units cm^-2.
using ScatteringPotential = RealVector;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Rectangular grid centered at the origin. Cell n = j * count_x + i has
/// center ((i+1/2) step_x - extent_x/2, (j+1/2) step_y - extent_y/2).
class Grid2D {
public:
    Grid2D(double extent_x, double extent_y, double step_x, double step_y)
        : extent_x_(extent_x), extent_y_(extent_y), step_x_(step_x), step_y_(step_y) {
        require(std::isfinite(step_x) && std::isfinite(step_y) && step_x > 0 && step_y > 0,
                ErrorKind::invalid_input, "grid steps must be finite and positive");
        require(std::isfinite(extent_x) && std::isfinite(extent_y) && extent_x > 0 && extent_y > 0,
                ErrorKind::invalid_input, "grid extents must be finite and positive");
        const double cx = extent_x / step_x;
        const double cy = extent_y / step_y;
        count_x_ = static_cast<std::size_t>(std::llround(cx));
        count_y_ = static_cast<std::size_t>(std::llround(cy));
        require(count_x_ > 0 && count_y_ > 0, ErrorKind::invalid_input, "grid must contain at least one cell");
        require(std::abs(cx - static_cast<double>(count_x_)) < 1e-9 * cx &&
                    std::abs(cy - static_cast<double>(count_y_)) < 1e-9 * cy,
                ErrorKind::invalid_input, "grid extent must be an integer multiple of the step");
    }

    static Grid2D square(double extent, double step) { return {extent, extent, step, step}; }

    double extent_x() const { return extent_x_; }
    double extent_y() const { return extent_y_; }
    double step_x() const { return step_x_; }
    double step_y() const { return step_y_; }
    std::size_t count_x() const { return count_x_; }
    std::size_t count_y() const { return count_y_; }
    std::size_t size() const { return count_x_ * count_y_; }
    double cell_area() const { return step_x_ * step_y_; }
    double half_diagonal() const { return 0.5 * std::hypot(extent_x_, extent_y_); }

    std::size_t index(std::size_t i, std::size_t j) const { return j * count_x_ + i; }

    Point2 center(std::size_t i, std::size_t j) const {
        return {(static_cast<double>(i) + 0.5) * step_x_ - 0.5 * extent_x_,
                (static_cast<double>(j) + 0.5) * step_y_ - 0.5 * extent_y_};
    }
    Point2 center(std::size_t n) const { return center(n % count_x_, n / count_x_); }

    /// True for points in the closed rectangle covered by the grid.
    bool covers(Point2 p) const {
        return std::abs(p.x) <= 0.5 * extent_x_ && std::abs(p.y) <= 0.5 * extent_y_;
    }

    /// Same extent, steps divided by `factor`.
    Grid2D refined(int factor) const {
        require(factor >= 1, ErrorKind::invalid_input, "refinement factor must be >= 1");
        return {extent_x_, extent_y_, step_x_ / factor, step_y_ / factor};
    }

private:
    double extent_x_, extent_y_, step_x_, step_y_;
    std::size_t count_x_ = 0, count_y_ = 0;
};

class Medium {
public:
    Medium(double epsilon_b, double wavelength) : epsilon_b_(epsilon_b), wavelength_(wavelength) {
        require(std::isfinite(epsilon_b) && epsilon_b > 0, ErrorKind::invalid_input,
                "background permittivity must be finite and positive");
        require(std::isfinite(wavelength) && wavelength > 0, ErrorKind::invalid_input,
                "wavelength must be finite and positive");
    }
    double epsilon_b() const { return epsilon_b_; }
    double wavelength() const { return wavelength_; }
    double k0() const { return 2.0 * std::numbers::pi / wavelength_; }
    double kb() const { return k0() * std::sqrt(epsilon_b_); }

private:
    double epsilon_b_, wavelength_;
};

struct SourceSet {
    std::vector<Point2> positions;
    double amplitude = 1.0;
    double radius = 0.0; ///< circle radius when built by circular_layout
    std::size_t size() const { return positions.size(); }
};

struct SensorArray {
    std::vector<Point2> positions;
    double radius = 0.0;
    std::size_t size() const { return positions.size(); }
};

/// Sources at angles 2*pi*l/L and sensors at 2*pi*m/M on one circle.
inline std::pair<SourceSet, SensorArray> circular_layout(double radius, int num_sources, int num_sensors,
                                                         double amplitude = 1.0) {
    require(std::isfinite(radius) && radius > 0, ErrorKind::geometry, "layout radius must be positive");
    require(num_sources >= 1 && num_sensors >= 1, ErrorKind::invalid_input, "source and sensor counts must be >= 1");
    auto on_circle = [radius](int k, int count) {
        const double a = 2.0 * std::numbers::pi * k / count;
        return Point2{radius * std::cos(a), radius * std::sin(a)};
    };
    SourceSet src;
    src.amplitude = amplitude;
    src.radius = radius;
    for (int l = 0; l < num_sources; ++l) src.positions.push_back(on_circle(l, num_sources));
    SensorArray sen;
    sen.radius = radius;
    for (int m = 0; m < num_sensors; ++m) sen.positions.push_back(on_circle(m, num_sensors));
    return {std::move(src), std::move(sen)};
}

/// As above, rejecting radii that do not clear the grid's half-diagonal.
inline std::pair<SourceSet, SensorArray> circular_layout(const Grid2D& grid, double radius, int num_sources,
                                                         int num_sensors, double amplitude = 1.0) {
    require(radius > grid.half_diagonal(), ErrorKind::geometry,
            "layout radius " + std::to_string(radius) + " cm does not clear the imaging domain (half-diagonal " +
                std::to_string(grid.half_diagonal()) + " cm)");
    return circular_layout(radius, num_sources, num_sensors, amplitude);
}

struct Scene {
    Grid2D grid;
    Medium medium;
    SourceSet sources;
    SensorArray sensors;

    /// Throws if any source or sensor lies in the imaging domain.
    void validate() const {
        require(sources.size() >= 1, ErrorKind::invalid_input, "scene needs at least one source");
        require(sensors.size() >= 1, ErrorKind::invalid_input, "scene needs at least one sensor");
        require(std::isfinite(sources.amplitude), ErrorKind::invalid_input, "source amplitude must be finite");
        for (const auto& p : sources.positions)
            require(!grid.covers(p), ErrorKind::geometry, "source located inside the imaging domain");
        for (const auto& p : sensors.positions)
            require(!grid.covers(p), ErrorKind::geometry, "sensor located inside the imaging domain");
    }

    Scene refined(int factor) const { return {grid.refined(factor), medium, sources, sensors}; }
};

// ---------------------------------------------------------------------------
// Permittivity <-> scattering potential

inline ScatteringPotential epsilon_to_potential(std::span<const double> eps, const Medium& medium) {
    const double kb2 = medium.kb() * medium.kb();
    ScatteringPotential f(eps.size());
    for (std::size_t n = 0; n < eps.size(); ++n) {
        require(std::isfinite(eps[n]) && eps[n] > 0, ErrorKind::invalid_input,
                "permittivity must be finite and positive");
        f[n] = kb2 * (eps[n] - medium.epsilon_b());
    }
    return f;
}

inline RealVector potential_to_epsilon(std::span<const double> f, const Medium& medium) {
    const double kb2 = medium.kb() * medium.kb();
    RealVector eps(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) eps[n] = medium.epsilon_b() + f[n] / kb2;
    return eps;
}

// ---------------------------------------------------------------------------
// Shepp-Logan phantom

struct Ellipse {
    double intensity, a, b, x0, y0, phi_deg;
};

/// Modified (Toft) Shepp-Logan ellipses on [-1,1]^2.
inline constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
    {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
}};

inline bool inside_ellipse(const Ellipse& e, double u, double v) {
    const double phi = e.phi_deg * std::numbers::pi / 180.0;
    const double du = u - e.x0, dv = v - e.y0;
    const double p = du * std::cos(phi) + dv * std::sin(phi);
    const double q = -du * std::sin(phi) + dv * std::cos(phi);
    return (p * p) / (e.a * e.a) + (q * q) / (e.b * e.b) <= 1.0;
}

/// Phantom intensity at unit coordinates (u, v).
inline double shepp_logan_value(double u, double v) {
    double s = 0.0;
    for (const auto& e : kSheppLogan)
        if (inside_ellipse(e, u, v)) s += e.intensity;
    // Intensities are multiples of 0.1; cancellation leaves rounding residue.
    return std::abs(s) < 1e-12 ? 0.0 : s;
}

/// Physical size (cm) of the phantom's outer ellipse.
struct PhantomSize {
    double width;
    double height;
};

/// 82 cm x 112 cm on a 120 cm domain, scaled proportionally for other extents.
inline PhantomSize default_phantom_size(const Grid2D& grid) {
    return {grid.extent_x() * 82.0 / 120.0, grid.extent_y() * 112.0 / 120.0};
}

/// Phantom intensities averaged over each cell on a supersample x supersample
/// lattice of sub-cell centers (supersample = 1 samples cell centers only).
inline RealVector shepp_logan_intensity(const Grid2D& grid, PhantomSize size, int supersample = 8) {
    require(size.width > 0 && size.height > 0, ErrorKind::invalid_input, "phantom size must be positive");
    require(supersample >= 1, ErrorKind::invalid_input, "supersampling factor must be >= 1");
    require(size.width <= grid.extent_x() && size.height <= grid.extent_y(), ErrorKind::geometry,
            "phantom bounding box exceeds the imaging domain");
    const double sx = 0.5 * size.width / kSheppLogan[0].a;
    const double sy = 0.5 * size.height / kSheppLogan[0].b;
    const double hx = grid.step_x() / supersample, hy = grid.step_y() / supersample;
    const double weight = 1.0 / (static_cast<double>(supersample) * supersample);
    RealVector out(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) {
        const auto c = grid.center(n);
        double acc = 0.0;
        for (int b = 0; b < supersample; ++b)
            for (int a = 0; a < supersample; ++a) {
                const double x = c.x - 0.5 * grid.step_x() + (a + 0.5) * hx;
                const double y = c.y - 0.5 * grid.step_y() + (b + 0.5) * hy;
                acc += shepp_logan_value(x / sx, y / sy);
            }
        out[n] = acc * weight;
    }
    return out;
}

/// Largest intensity in the table (the outer ring).
inline constexpr double kSheppLoganPeak = 1.0;

/// Potential of a Shepp-Logan permittivity phantom whose brightest region has
/// eps = eps_b (1 + contrast). Scaling is fixed by the continuous phantom, not
/// by the grid, so every grid samples the same object; a grid too coarse to
/// hold a cell fully inside the ring has a maximum below the nominal peak.
inline ScatteringPotential shepp_logan(const Grid2D& grid, const Medium& medium, double contrast, PhantomSize size,
                                       int supersample = 8) {
    require(std::isfinite(contrast) && contrast >= 0, ErrorKind::invalid_input, "contrast must be >= 0");
    auto v = shepp_logan_intensity(grid, size, supersample);
    if (contrast == 0.0) return ScatteringPotential(grid.size(), 0.0);
    require(*std::max_element(v.begin(), v.end()) > 0, ErrorKind::geometry, "phantom has no support on this grid");
    const double peak = medium.kb() * medium.kb() * medium.epsilon_b() * contrast;
    for (auto& x : v) x *= peak / kSheppLoganPeak;
    return v;
}

inline ScatteringPotential shepp_logan(const Grid2D& grid, const Medium& medium, double contrast) {
    return shepp_logan(grid, medium, contrast, default_phantom_size(grid));
}

// ---------------------------------------------------------------------------
// JSON: {grid:{extent_x,extent_y,step_x,step_y}, medium:{epsilon_b,wavelength},
//        sources:{radius,count,amplitude}, sensors:{radius,count}}

inline Scene scene_from_json(const nlohmann::json& j) {
    try {
        const auto& g = j.at("grid");
        Grid2D grid(g.at("extent_x").get<double>(), g.at("extent_y").get<double>(), g.at("step_x").get<double>(),
                    g.at("step_y").get<double>());
        const auto& m = j.at("medium");
        Medium medium(m.at("epsilon_b").get<double>(), m.at("wavelength").get<double>());
        const auto& s = j.at("sources");
        const auto& r = j.at("sensors");
        auto [src, sen] = circular_layout(grid, s.at("radius").get<double>(), s.at("count").get<int>(),
                                          r.at("count").get<int>(), s.value("amplitude", 1.0));
        const double sensor_radius = r.at("radius").get<double>();
        if (sensor_radius != src.radius) {
            auto [unused, sen2] = circular_layout(grid, sensor_radius, 1, r.at("count").get<int>());
            sen = std::move(sen2);
        }
        Scene scene{grid, medium, std::move(src), std::move(sen)};
        scene.validate();
        return scene;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("malformed scene JSON: ") + e.what());
    }
}

inline nlohmann::json scene_to_json(const Scene& s) {
    return {
        {"grid",
         {{"extent_x", s.grid.extent_x()},
          {"extent_y", s.grid.extent_y()},
          {"step_x", s.grid.step_x()},
          {"step_y", s.grid.step_y()}}},
        {"medium", {{"epsilon_b", s.medium.epsilon_b()}, {"wavelength", s.medium.wavelength()}}},
        {"sources", {{"radius", s.sources.radius}, {"count", s.sources.size()}, {"amplitude", s.sources.amplitude}}},
        {"sensors", {{"radius", s.sensors.radius}, {"count", s.sensors.size()}}},
    };
}

} // namespace borntomo
