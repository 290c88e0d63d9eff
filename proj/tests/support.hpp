#pragma once

// Test-side helpers: small scenes, random data, and dense reference
// operators built from the standard library's Bessel functions rather than
// the library's own.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "borntomo/greenops.hpp"
#include "borntomo/scene.hpp"

namespace testing_support {

using namespace borntomo;
using MatrixXc = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXc = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

/// (j/4) H0^(2)(x) from std::cyl_bessel_j / std::cyl_neumann.
inline cplx green_ref(double kb, double r) {
    const double x = kb * r;
    return cplx{0.0, 0.25} * cplx{std::cyl_bessel_j(0.0, x), -std::cyl_neumann(0.0, x)};
}

/// n x n cells of `step` cm, sources and sensors on a circle outside.
inline Scene small_scene(std::size_t n, double step = 1.0, double wavelength = 6.0, int sources = 1,
                         int sensors = 12) {
    const auto grid = Grid2D::square(static_cast<double>(n) * step, step);
    auto [src, sen] = circular_layout(grid, 1.5 * grid.half_diagonal() + 2.0, sources, sensors);
    return Scene{grid, Medium(1.0, wavelength), std::move(src), std::move(sen)};
}

inline RealVector random_real(std::size_t n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    RealVector v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

inline ComplexVector random_complex(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    ComplexVector v(n);
    for (auto& x : v) x = cplx{d(rng), d(rng)};
    return v;
}

/// Dense G with midpoint samples off the diagonal and `self` on it.
inline MatrixXc dense_domain_green(const Grid2D& grid, double kb, cplx self) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    MatrixXc G(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            if (a == b) {
                G(a, b) = self;
            } else {
                const double r = distance(grid.center(static_cast<std::size_t>(a)), grid.center(static_cast<std::size_t>(b)));
                G(a, b) = green_ref(kb, r) * grid.cell_area();
            }
        }
    return G;
}

inline MatrixXc dense_sensor_green(const Scene& s) {
    const auto m = static_cast<Eigen::Index>(s.sensors.size());
    const auto n = static_cast<Eigen::Index>(s.grid.size());
    MatrixXc H(m, n);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            H(a, b) = green_ref(s.medium.kb(), distance(s.sensors.positions[static_cast<std::size_t>(a)],
                                                        s.grid.center(static_cast<std::size_t>(b)))) *
                      s.grid.cell_area();
    return H;
}

inline VectorXc to_eigen(const ComplexVector& v) {
    VectorXc out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

inline double rel_diff(const ComplexVector& a, const VectorXc& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b(static_cast<Eigen::Index>(i)));
        den += std::norm(b(static_cast<Eigen::Index>(i)));
    }
    return std::sqrt(num / den);
}

inline double rel_diff(const ComplexVector& a, const ComplexVector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

inline cplx inner(const ComplexVector& a, const ComplexVector& b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

} // namespace testing_support
