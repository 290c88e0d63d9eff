#pragma once

// Gradient of D(f) = 1/2 |y - z(f)|^2 through the recursive Born model by
// reverse-mode backpropagation. The Jacobian dz/df is never formed; only its
// Hermitian transpose applied to the residual r = z - y:
//
//   a = H^H r,   g = a . conj(u^K),   v = a . f
//   for k = K-1 .. 1:  b = G^H v;  g += b . conj(u^k);  v = b . f
//   grad D = Re{g}
//
// With layers u^1 = u_in .. u^K this is the exact adjoint of recursive_born
// and costs K-1 adjoint convolutions, the same as the forward pass.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "borntomo/errors.hpp"
#include "borntomo/forward.hpp"
#include "borntomo/greenops.hpp"
#include "borntomo/parallel.hpp"

namespace borntomo {

/// Complex M x L sensor readings, one column per transmission, stored
/// column-major (transmission l occupies [l*M, (l+1)*M)).
struct MeasurementSet {
    std::size_t num_sensors = 0;
    std::size_t num_transmissions = 0;
    ComplexVector values;

    MeasurementSet() = default;
    MeasurementSet(std::size_t m, std::size_t l) : num_sensors(m), num_transmissions(l), values(m * l) {}

    std::span<const cplx> column(std::size_t l) const { return {values.data() + l * num_sensors, num_sensors}; }
    std::span<cplx> column(std::size_t l) { return {values.data() + l * num_sensors, num_sensors}; }
    cplx& at(std::size_t m, std::size_t l) { return values[l * num_sensors + m]; }
    cplx at(std::size_t m, std::size_t l) const { return values[l * num_sensors + m]; }

    double squared_norm() const {
        double s = 0.0;
        for (const auto& v : values) s += std::norm(v);
        return s;
    }
};

struct GradientResult {
    RealVector grad;
    double fidelity = 0.0;
    /// z for one transmission, or all transmissions concatenated column by column.
    ComplexVector prediction;
};

inline double half_squared_residual(std::span<const cplx> y, std::span<const cplx> z) {
    double s = 0.0;
    for (std::size_t m = 0; m < y.size(); ++m) s += std::norm(y[m] - z[m]);
    return 0.5 * s;
}

inline GradientResult fidelity_and_gradient(const DomainGreen& G, const SensorGreen& H, std::span<const double> f,
                                            std::span<const cplx> u_in, std::span<const cplx> y, int K,
                                            DomainGreen::Workspace& ws) {
    check_size(y.size(), H.rows(), "measurement vector");
    const auto trace = recursive_born(G, H, f, u_in, K, ws);
    const std::size_t n = G.size();

    ComplexVector residual(y.size());
    for (std::size_t m = 0; m < y.size(); ++m) residual[m] = trace.prediction[m] - y[m];

    GradientResult out;
    out.fidelity = half_squared_residual(y, trace.prediction);

    FieldMap back = H.apply_adjoint(residual);
    ComplexVector acc(n);
    FieldMap v(n);
    const auto& top = trace.layers.back();
    for (std::size_t i = 0; i < n; ++i) {
        acc[i] = back[i] * std::conj(top[i]);
        v[i] = back[i] * f[i];
    }
    for (int k = K - 2; k >= 0; --k) {
        G.apply_adjoint(v, back, ws);
        const auto& layer = trace.layers[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < n; ++i) {
            acc[i] += back[i] * std::conj(layer[i]);
            v[i] = back[i] * f[i];
        }
    }
    out.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.grad[i] = acc[i].real();
    out.prediction = trace.prediction;
    return out;
}

inline GradientResult fidelity_and_gradient(const DomainGreen& G, const SensorGreen& H, std::span<const double> f,
                                            std::span<const cplx> u_in, std::span<const cplx> y, int K) {
    auto ws = G.make_workspace();
    return fidelity_and_gradient(G, H, f, u_in, y, K, ws);
}

namespace detail {

inline void check_measurements(const Operators& ops, const MeasurementSet& meas) {
    if (meas.num_sensors != ops.sensors() || meas.num_transmissions != ops.transmissions())
        throw Error(ErrorKind::dimension,
                    "measurement set is " + std::to_string(meas.num_sensors) + "x" +
                        std::to_string(meas.num_transmissions) + " but the scene has " +
                        std::to_string(ops.sensors()) + " sensors and " + std::to_string(ops.transmissions()) +
                        " transmissions");
    check_size(meas.values.size(), meas.num_sensors * meas.num_transmissions, "measurement storage");
}

template <class Fn>
void for_each_transmission(std::size_t count, Fn&& fn) {
    parallel_for(count, [&](std::size_t l) {
        try {
            fn(l);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("transmission " + std::to_string(l) + ": " + e.what(), e.best_residual());
        } catch (const Error& e) {
            throw Error(e.kind(), "transmission " + std::to_string(l) + ": " + e.what());
        }
    });
}

} // namespace detail

/// Sum over transmissions of fidelity and gradient. Transmissions run in
/// parallel; the reduction is in transmission order, so results do not
/// depend on the thread count.
inline GradientResult fidelity_and_gradient_multi(const Operators& ops, std::span<const double> f,
                                                  const MeasurementSet& meas, int K) {
    detail::check_measurements(ops, meas);
    const std::size_t L = ops.transmissions();
    std::vector<GradientResult> parts(L);
    detail::for_each_transmission(L, [&](std::size_t l) {
        auto ws = ops.domain.make_workspace();
        parts[l] = fidelity_and_gradient(ops.domain, ops.sensor, f, ops.incident[l], meas.column(l), K, ws);
    });
    GradientResult total;
    total.grad.assign(ops.cells(), 0.0);
    total.prediction.reserve(meas.values.size());
    for (std::size_t l = 0; l < L; ++l) {
        total.fidelity += parts[l].fidelity;
        for (std::size_t i = 0; i < total.grad.size(); ++i) total.grad[i] += parts[l].grad[i];
        total.prediction.insert(total.prediction.end(), parts[l].prediction.begin(), parts[l].prediction.end());
    }
    return total;
}

/// Forward-only counterpart: D(f) and predictions, no backward pass.
inline GradientResult fidelity_multi(const Operators& ops, std::span<const double> f, const MeasurementSet& meas,
                                     int K) {
    detail::check_measurements(ops, meas);
    const std::size_t L = ops.transmissions();
    std::vector<ComplexVector> preds(L);
    detail::for_each_transmission(L, [&](std::size_t l) {
        auto ws = ops.domain.make_workspace();
        preds[l] = recursive_born(ops.domain, ops.sensor, f, ops.incident[l], K, ws).prediction;
    });
    GradientResult total;
    for (std::size_t l = 0; l < L; ++l) {
        total.fidelity += half_squared_residual(meas.column(l), preds[l]);
        total.prediction.insert(total.prediction.end(), preds[l].begin(), preds[l].end());
    }
    return total;
}

} // namespace borntomo
