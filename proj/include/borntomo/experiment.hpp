#pragma once

// Synthetic experiments: reference data from the Lippmann-Schwinger solver
// on a refined grid, optional measurement noise, and the ground-truth
// potential on the reconstruction grid.

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "borntomo/arrayfile.hpp"
#include "borntomo/autograd.hpp"
#include "borntomo/forward.hpp"
#include "borntomo/greenops.hpp"
#include "borntomo/scene.hpp"

namespace borntomo {

struct SimulationOptions {
    double contrast = 0.15;
    /// Simulation grid is the scene grid refined by this factor.
    int refine = 2;
    std::optional<double> noise_snr_db;
    std::uint64_t seed = 0;
    LSOptions solver{};
};

struct SimulationResult {
    MeasurementSet measurements;
    ScatteringPotential truth; ///< on the scene grid
    std::vector<double> residuals; ///< final LS relative residual per transmission
    std::vector<int> iterations;
    double noise_power = 0.0; ///< per-entry variance of the added noise
};

/// Adds circular complex Gaussian noise so that |y|^2 / E|n|^2 = 10^(snr/10).
/// Returns the per-entry variance.
inline double add_measurement_noise(MeasurementSet& y, double snr_db, std::uint64_t seed) {
    require(std::isfinite(snr_db), ErrorKind::invalid_input, "noise SNR must be finite");
    const double energy = y.squared_norm();
    if (energy == 0.0 || y.values.empty()) return 0.0;
    const double var = energy / (static_cast<double>(y.values.size()) * std::pow(10.0, snr_db / 10.0));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * var));
    for (auto& v : y.values) {
        const double re = normal(rng);
        const double im = normal(rng);
        v += cplx{re, im};
    }
    return var;
}

/// Shepp-Logan phantom on the scene grid; the simulation grid uses the same
/// phantom geometry so both describe one physical object.
inline SimulationResult simulate(const Scene& scene, const SimulationOptions& opt) {
    require(opt.refine >= 1, ErrorKind::invalid_input, "refinement factor must be >= 1");
    require(opt.contrast >= 0 && std::isfinite(opt.contrast), ErrorKind::invalid_input, "contrast must be >= 0");
    scene.validate();
    const auto size = default_phantom_size(scene.grid);

    SimulationResult out;
    out.truth = shepp_logan(scene.grid, scene.medium, opt.contrast, size);

    const Operators fine(scene.refined(opt.refine));
    const auto f_fine = shepp_logan(fine.scene.grid, fine.scene.medium, opt.contrast, size);
    const std::size_t L = fine.transmissions();
    out.measurements = MeasurementSet(fine.sensors(), L);
    out.residuals.assign(L, 0.0);
    out.iterations.assign(L, 0);
    detail::for_each_transmission(L, [&](std::size_t l) {
        const auto sol = solve_lippmann_schwinger(fine.domain, fine.sensor, f_fine, fine.incident[l], opt.solver);
        std::copy(sol.prediction.begin(), sol.prediction.end(), out.measurements.column(l).begin());
        out.residuals[l] = sol.residual_norm;
        out.iterations[l] = sol.iterations;
    });
    if (opt.noise_snr_db) out.noise_power = add_measurement_noise(out.measurements, *opt.noise_snr_db, opt.seed);
    return out;
}

// ---------------------------------------------------------------------------
// Array layouts: measurements are M x L (sensor rows, transmission columns);
// potentials are count_y x count_x.

inline ComplexVector measurements_row_major(const MeasurementSet& y) {
    ComplexVector out(y.values.size());
    for (std::size_t m = 0; m < y.num_sensors; ++m)
        for (std::size_t l = 0; l < y.num_transmissions; ++l) out[m * y.num_transmissions + l] = y.at(m, l);
    return out;
}

inline MeasurementSet measurements_from_array(const ComplexArray& a) {
    MeasurementSet y(a.rows, a.cols);
    for (std::size_t m = 0; m < a.rows; ++m)
        for (std::size_t l = 0; l < a.cols; ++l) y.at(m, l) = a.data[m * a.cols + l];
    return y;
}

inline void write_measurements(const std::filesystem::path& p, const MeasurementSet& y) {
    const auto rm = measurements_row_major(y);
    write_array_file<cplx>(p, rm, y.num_sensors, y.num_transmissions);
}

inline MeasurementSet read_measurements(const std::filesystem::path& p) {
    return measurements_from_array(read_complex_array_file(p));
}

inline void write_potential(const std::filesystem::path& p, std::span<const double> f, const Grid2D& grid) {
    write_array_file<double>(p, f, grid.count_y(), grid.count_x());
}

inline RealVector read_potential(const std::filesystem::path& p, const Grid2D& grid) {
    auto a = read_real_array_file(p);
    if (a.rows != grid.count_y() || a.cols != grid.count_x())
        throw Error(ErrorKind::dimension, p.string() + " is " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                              ", grid is " + std::to_string(grid.count_y()) + "x" +
                                              std::to_string(grid.count_x()));
    return std::move(a.data);
}

} // namespace borntomo
