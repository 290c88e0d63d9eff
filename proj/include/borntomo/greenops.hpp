#pragma once

// Discretized Green's operators of the 2D Helmholtz equation,
// g(x) = (j/4) H0^(2)(kb |x|), with pulse basis / midpoint testing.
//
//   DomainGreen  G : C^N -> C^N, block-Toeplitz, applied by zero-padded FFT
//   SensorGreen  H : C^N -> C^M, dense
//
// G is complex symmetric (the kernel is even in both offsets), so its
// adjoint is conj(G) and is applied as conj(G conj(w)).

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "borntomo/errors.hpp"
#include "borntomo/fft.hpp"
#include "borntomo/scene.hpp"
#include "borntomo/specfun.hpp"

namespace borntomo {

inline constexpr cplx kQuarterJ{0.0, 0.25};

/// g(r) = (j/4) H0^(2)(kb r)
inline cplx green_2d(double kb, double r) { return kQuarterJ * specfun::hankel2_0(kb * r); }

/// Integral of g over a step_x x step_y cell centered at the origin.
///
/// In polar coordinates the radial part has a closed form,
///   int_0^R H0(k r) r dr = (R/k) H1(kR) - 2j/(pi k^2),
/// leaving a smooth angular integral over the two triangles of a quadrant.
inline cplx green_cell_integral(double kb, double step_x, double step_y) {
    using boost::math::quadrature::gauss_kronrod;
    using std::numbers::pi;
    const double hx = 0.5 * step_x, hy = 0.5 * step_y;
    const double theta_c = std::atan2(hy, hx);
    const cplx tail = cplx{0.0, 2.0 / (pi * kb * kb)};
    auto radial = [&](double r) { return (r / kb) * specfun::hankel2_1(kb * r) - tail; };
    auto lower = [&](double t) { return radial(hx / std::cos(t)); };
    auto upper = [&](double t) { return radial(hy / std::sin(t)); };
    auto integrate = [](auto&& fn, double a, double b) {
        auto re = [&](double t) { return fn(t).real(); };
        auto im = [&](double t) { return fn(t).imag(); };
        return cplx{gauss_kronrod<double, 31>::integrate(re, a, b, 12, 1e-13),
                    gauss_kronrod<double, 31>::integrate(im, a, b, 12, 1e-13)};
    };
    const cplx quadrant = integrate(lower, 0.0, theta_c) + integrate(upper, theta_c, 0.5 * pi);
    return kQuarterJ * 4.0 * quadrant;
}

class DomainGreen {
public:
    /// Per-call FFT scratch. One per thread.
    struct Workspace {
        fft::Buffer rows; ///< count_y x (2 count_x), x fastest
        fft::Buffer cols; ///< (2 count_x) x (2 count_y), y fastest
        std::size_t size() const { return rows.size() + cols.size(); }
    };

    DomainGreen(const Grid2D& grid, const Medium& medium)
        : nx_(grid.count_x()), ny_(grid.count_y()), px_(2 * nx_), py_(2 * ny_),
          row_plan_(std::make_unique<fft::RowPlan>(px_, ny_)), col_plan_(std::make_unique<fft::RowPlan>(py_, px_)),
          kernel_(px_ * py_), spectrum_(px_ * py_) {
        const double kb = medium.kb();
        const double area = grid.cell_area();
        self_term_ = green_cell_integral(kb, grid.step_x(), grid.step_y());
        for (std::size_t b = 0; b < py_; ++b) {
            const long q = b <= ny_ ? static_cast<long>(b) : static_cast<long>(b) - static_cast<long>(py_);
            for (std::size_t a = 0; a < px_; ++a) {
                const long p = a <= nx_ ? static_cast<long>(a) : static_cast<long>(a) - static_cast<long>(px_);
                cplx value;
                if (p == 0 && q == 0) {
                    value = self_term_;
                } else {
                    const double r = std::hypot(p * grid.step_x(), q * grid.step_y());
                    value = green_2d(kb, r) * area;
                }
                kernel_[b * px_ + a] = value;
            }
        }
        // Spectrum stored transposed (y fastest) to match the column pass.
        fft::Buffer tmp(px_ * py_);
        std::copy_n(kernel_.data(), kernel_.size(), tmp.data());
        fft::RowPlan(px_, py_).forward(tmp.data());
        fft::transpose(tmp.data(), py_, px_, px_, spectrum_.data(), py_);
        col_plan_->forward(spectrum_.data());
        const double scale = 1.0 / static_cast<double>(px_ * py_);
        for (std::size_t k = 0; k < spectrum_.size(); ++k) spectrum_[k] *= scale;
    }

    std::size_t size() const { return nx_ * ny_; }
    std::size_t count_x() const { return nx_; }
    std::size_t count_y() const { return ny_; }

    /// Matrix entry coupling two cells whose index offsets are (p, q).
    cplx kernel(long p, long q) const {
        const auto wrap = [](long v, std::size_t n) { return static_cast<std::size_t>(v < 0 ? v + static_cast<long>(n) : v); };
        return kernel_[wrap(q, py_) * px_ + wrap(p, px_)];
    }
    cplx self_term() const { return self_term_; }

    Workspace make_workspace() const { return Workspace{fft::Buffer(ny_ * px_), fft::Buffer(px_ * py_)}; }

    void apply(std::span<const cplx> w, std::span<cplx> out, Workspace& ws) const {
        convolve(w, out, ws, false);
    }
    void apply_adjoint(std::span<const cplx> w, std::span<cplx> out, Workspace& ws) const {
        convolve(w, out, ws, true);
    }

    FieldMap apply(std::span<const cplx> w) const {
        auto ws = make_workspace();
        FieldMap out(size());
        apply(w, out, ws);
        return out;
    }
    FieldMap apply_adjoint(std::span<const cplx> w) const {
        auto ws = make_workspace();
        FieldMap out(size());
        apply_adjoint(w, out, ws);
        return out;
    }

private:
    // Zero-padded circular convolution by separable transforms. Rows past
    // count_y are zero on input and unused on output, so the x pass runs on
    // count_y rows only.
    void convolve(std::span<const cplx> w, std::span<cplx> out, Workspace& ws, bool adjoint) const {
        check_size(w.size(), size(), "DomainGreen input");
        check_size(out.size(), size(), "DomainGreen output");
        check_size(ws.rows.size(), ny_ * px_, "DomainGreen workspace");
        check_size(ws.cols.size(), px_ * py_, "DomainGreen workspace");
        cplx* rows = ws.rows.data();
        cplx* cols = ws.cols.data();
        for (std::size_t j = 0; j < ny_; ++j) {
            cplx* row = rows + j * px_;
            const cplx* src = w.data() + j * nx_;
            for (std::size_t i = 0; i < nx_; ++i) row[i] = adjoint ? std::conj(src[i]) : src[i];
            std::fill(row + nx_, row + px_, cplx{});
        }
        row_plan_->forward(rows);
        fft::transpose(rows, ny_, px_, px_, cols, py_);
        for (std::size_t a = 0; a < px_; ++a) std::fill(cols + a * py_ + ny_, cols + (a + 1) * py_, cplx{});
        col_plan_->forward(cols);
        const cplx* s = spectrum_.data();
        for (std::size_t k = 0; k < px_ * py_; ++k) {
            const double re = cols[k].real() * s[k].real() - cols[k].imag() * s[k].imag();
            const double im = cols[k].real() * s[k].imag() + cols[k].imag() * s[k].real();
            cols[k] = cplx{re, im};
        }
        col_plan_->backward(cols);
        fft::transpose(cols, px_, ny_, py_, rows, px_);
        row_plan_->backward(rows);
        for (std::size_t j = 0; j < ny_; ++j) {
            const cplx* row = rows + j * px_;
            cplx* dst = out.data() + j * nx_;
            for (std::size_t i = 0; i < nx_; ++i) dst[i] = adjoint ? std::conj(row[i]) : row[i];
        }
    }

    std::size_t nx_, ny_, px_, py_;
    std::unique_ptr<fft::RowPlan> row_plan_;
    std::unique_ptr<fft::RowPlan> col_plan_;
    fft::Buffer kernel_;
    fft::Buffer spectrum_; ///< transposed, pre-scaled by 1/(px py)
    cplx self_term_{};
};

/// Dense M x N map from cell sources to sensor readings.
class SensorGreen {
public:
    SensorGreen(const Grid2D& grid, const Medium& medium, const SensorArray& sensors)
        : m_(sensors.size()), n_(grid.size()), h_(m_ * n_) {
        const double kb = medium.kb();
        const double area = grid.cell_area();
        for (std::size_t m = 0; m < m_; ++m) {
            for (std::size_t n = 0; n < n_; ++n) {
                const double r = distance(sensors.positions[m], grid.center(n));
                require(r > 0, ErrorKind::geometry, "sensor coincides with a cell center");
                h_[m * n_ + n] = green_2d(kb, r) * area;
            }
        }
    }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    cplx entry(std::size_t m, std::size_t n) const { return h_[m * n_ + n]; }

    void apply(std::span<const cplx> w, std::span<cplx> out) const {
        check_size(w.size(), n_, "SensorGreen input");
        check_size(out.size(), m_, "SensorGreen output");
        for (std::size_t m = 0; m < m_; ++m) {
            const cplx* row = &h_[m * n_];
            cplx acc{};
            for (std::size_t n = 0; n < n_; ++n) acc += row[n] * w[n];
            out[m] = acc;
        }
    }
    void apply_adjoint(std::span<const cplx> r, std::span<cplx> out) const {
        check_size(r.size(), m_, "SensorGreen adjoint input");
        check_size(out.size(), n_, "SensorGreen adjoint output");
        for (std::size_t n = 0; n < n_; ++n) out[n] = cplx{};
        for (std::size_t m = 0; m < m_; ++m) {
            const cplx* row = &h_[m * n_];
            const cplx rm = r[m];
            for (std::size_t n = 0; n < n_; ++n) out[n] += std::conj(row[n]) * rm;
        }
    }

    ComplexVector apply(std::span<const cplx> w) const {
        ComplexVector out(m_);
        apply(w, out);
        return out;
    }
    FieldMap apply_adjoint(std::span<const cplx> r) const {
        FieldMap out(n_);
        apply_adjoint(r, out);
        return out;
    }

private:
    std::size_t m_, n_;
    ComplexVector h_;
};

/// u_in(x_n) = A (j/4) H0^(2)(kb |x_n - x_l|) for source l.
inline FieldMap incident_field(const Scene& scene, std::size_t source_index) {
    require(source_index < scene.sources.size(), ErrorKind::invalid_input,
            "source index " + std::to_string(source_index) + " out of range");
    const auto src = scene.sources.positions[source_index];
    const double kb = scene.medium.kb();
    FieldMap u(scene.grid.size());
    for (std::size_t n = 0; n < u.size(); ++n) {
        const double r = distance(src, scene.grid.center(n));
        require(r > 0, ErrorKind::geometry, "source coincides with a cell center");
        u[n] = scene.sources.amplitude * green_2d(kb, r);
    }
    return u;
}

/// Everything the forward and inverse models need for one scene.
struct Operators {
    Scene scene;
    DomainGreen domain;
    SensorGreen sensor;
    std::vector<FieldMap> incident;

    explicit Operators(Scene s)
        : scene((s.validate(), std::move(s))), domain(scene.grid, scene.medium),
          sensor(scene.grid, scene.medium, scene.sensors) {
        incident.reserve(scene.sources.size());
        for (std::size_t l = 0; l < scene.sources.size(); ++l) incident.push_back(incident_field(scene, l));
    }

    std::size_t cells() const { return scene.grid.size(); }
    std::size_t sensors() const { return scene.sensors.size(); }
    std::size_t transmissions() const { return incident.size(); }
};

} // namespace borntomo
