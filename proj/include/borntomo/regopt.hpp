#pragma once

// TV-regularized reconstruction of the scattering potential.
//
//   RB  accelerated proximal gradient on D(f) + tau TV(f) with the K-layer
//       recursive Born model and backpropagated gradients
//   FB  the same driver with K = 1
//   AM  alternates a Lippmann-Schwinger field solve at fixed f with a
//       TV-regularized linear fit of f at fixed fields

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "borntomo/autograd.hpp"
#include "borntomo/errors.hpp"
#include "borntomo/forward.hpp"
#include "borntomo/greenops.hpp"
#include "borntomo/tv.hpp"

namespace borntomo {

enum class Method { FB, AM, RB };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::FB: return "FB";
        case Method::AM: return "AM";
        case Method::RB: return "RB";
    }
    return "?";
}

struct OptimOptions {
    int max_iter = 500;
    double stop_tol = 1e-6;
    /// Consecutive steps without backtracking before the step grows by step_growth.
    int growth_patience = 5;
    double step_growth = 1.2;
    int power_iters = 30;
};

struct AMOptions {
    int outer_iters = 20;
    int inner_iters = 50;
    LSOptions field_solver{};
};

struct IterationRecord {
    int outer = 0; ///< AM outer iteration; 0 for RB/FB
    double objective = 0.0;
    double data_fit = 0.0;
    double step = 0.0;
};

struct ReconstructionReport {
    Method method = Method::RB;
    int layers = 1;
    double tau = 0.0;
    RealVector potential;
    /// |y - z|^2 / |y|^2 after each completed iteration (outer iterations for AM).
    std::vector<double> data_fit;
    /// Every accepted proximal-gradient step, in order.
    std::vector<IterationRecord> history;
    std::optional<double> snr_db;
    double wall_seconds = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string status = "ok";
};

// ---------------------------------------------------------------------------
// Metrics

inline constexpr double kSnrCapDb = 300.0;

/// 10 log10(|truth|^2 / |estimate - truth|^2), capped at kSnrCapDb.
inline double snr_db(std::span<const double> estimate, std::span<const double> truth) {
    check_size(estimate.size(), truth.size(), "snr_db estimate");
    double s = 0.0, e = 0.0;
    for (std::size_t n = 0; n < truth.size(); ++n) {
        s += truth[n] * truth[n];
        e += (estimate[n] - truth[n]) * (estimate[n] - truth[n]);
    }
    require(s > 0, ErrorKind::invalid_input, "snr_db: truth is identically zero");
    if (e == 0.0) return kSnrCapDb;
    return std::min(kSnrCapDb, 10.0 * std::log10(s / e));
}

/// |y - z|^2 / |y|^2
inline double data_fit(std::span<const cplx> y, std::span<const cplx> z) {
    check_size(z.size(), y.size(), "data_fit prediction");
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < y.size(); ++m) {
        num += std::norm(y[m] - z[m]);
        den += std::norm(y[m]);
    }
    require(den > 0, ErrorKind::invalid_input, "data_fit: measurements are identically zero");
    return num / den;
}

/// tau = 1e-9 * 1/2 |y|^2
inline double auto_tau(const MeasurementSet& y) { return 1e-9 * 0.5 * y.squared_norm(); }

// ---------------------------------------------------------------------------
// Accelerated proximal gradient

/// A smooth term exposes value(f) and value_and_gradient(f) -> GradientResult.
struct APGResult {
    RealVector solution;
    std::vector<IterationRecord> history;
    double step = 0.0;
    int iterations = 0;
    bool converged = false;
};

namespace regopt_detail {

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace regopt_detail

/// FISTA with backtracking, function-value restart and a monotone
/// safeguard: a candidate is accepted only if F = D + tau TV does not
/// increase. If momentum produced the increase, momentum is reset and the
/// step retried from the current iterate; if a plain step cannot decrease F
/// the iterate is stationary to working precision and the loop ends.
///
/// `on_iter` (optional) sees each accepted record; `half_y2` normalizes the
/// data-fit column.
template <class Smooth>
APGResult accelerated_proximal_gradient(Smooth& smooth, Shape2D shape, const TVParams& params, RealVector x0,
                                        double step0, double half_y2, const OptimOptions& opt,
                                        const std::function<void(const IterationRecord&)>& on_iter = {},
                                        int outer_tag = 0) {
    using regopt_detail::norm2;
    require(step0 > 0 && std::isfinite(step0), ErrorKind::invalid_input, "initial step must be positive");
    const std::size_t n = x0.size();
    const double tau = params.tau;

    APGResult out;
    RealVector x = std::move(x0);
    params.constraint.project(x);
    RealVector x_prev = x;
    double Fx = smooth.value(x) + tau * tv_value(x, shape);
    if (!std::isfinite(Fx)) throw DivergenceError("objective is not finite at the initial point", x);

    double gamma = step0;
    double t = 1.0;
    bool momentum = false;
    int streak = 0;

    RealVector y(n), z(n), cand(n);
    for (int it = 1; it <= opt.max_iter; ++it) {
        bool accepted = false;
        bool backtracked = false;
        double Fc = 0.0, Dc = 0.0;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double beta = momentum ? (t - 1.0) / t_next : 0.0;
            for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + beta * (x[k] - x_prev[k]);
            const auto gy = smooth.value_and_gradient(y);
            if (!std::isfinite(gy.fidelity) || !regopt_detail::all_finite(gy.grad)) {
                if (beta == 0.0) throw DivergenceError("non-finite gradient", x);
                momentum = false;
                t = 1.0;
                continue;
            }
            // Backtracking on the quadratic upper bound.
            for (int bt = 0; bt < 60; ++bt) {
                for (std::size_t k = 0; k < n; ++k) z[k] = y[k] - gamma * gy.grad[k];
                cand = tv_prox(z, gamma * tau, shape, params);
                Dc = smooth.value(cand);
                double lin = 0.0, quad = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double d = cand[k] - y[k];
                    lin += gy.grad[k] * d;
                    quad += d * d;
                }
                if (std::isfinite(Dc) && Dc <= gy.fidelity + lin + quad / (2.0 * gamma)) break;
                gamma *= 0.5;
                backtracked = true;
            }
            Fc = Dc + tau * tv_value(cand, shape);
            if (std::isfinite(Fc) && Fc <= Fx) {
                accepted = true;
            } else if (beta != 0.0) {
                momentum = false; // restart from x
                t = 1.0;
            } else {
                break;
            }
        }
        if (!accepted) {
            if (!std::isfinite(Fc)) throw DivergenceError("objective became non-finite", x);
            out.converged = true; // no descent available from x
            break;
        }

        x_prev.swap(x);
        x = cand;
        Fx = Fc;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        t = t_next;
        momentum = true;

        IterationRecord rec{outer_tag, Fx, half_y2 > 0 ? Dc / half_y2 : 0.0, gamma};
        out.history.push_back(rec);
        out.iterations = it;
        if (on_iter) on_iter(rec);

        if (backtracked) {
            streak = 0;
        } else if (++streak >= opt.growth_patience) {
            gamma *= opt.step_growth;
            streak = 0;
        }

        double diff = 0.0;
        for (std::size_t k = 0; k < n; ++k) diff += (x[k] - x_prev[k]) * (x[k] - x_prev[k]);
        const double xn = norm2(x);
        if (std::sqrt(diff) <= opt.stop_tol * (xn > 0 ? xn : 1.0)) {
            out.converged = true;
            break;
        }
    }
    out.solution = std::move(x);
    out.step = gamma;
    return out;
}

// ---------------------------------------------------------------------------
// Smooth terms

/// D(f) = sum_l 1/2 |y_l - z_l(f)|^2 under the K-layer model.
class BornFidelity {
public:
    BornFidelity(const Operators& ops, const MeasurementSet& meas, int K) : ops_(ops), meas_(meas), K_(K) {
        require(K >= 1, ErrorKind::invalid_input, "number of layers K must be >= 1");
        detail::check_measurements(ops, meas);
    }
    double value(std::span<const double> f) const { return fidelity_multi(ops_, f, meas_, K_).fidelity; }
    GradientResult value_and_gradient(std::span<const double> f) const {
        return fidelity_and_gradient_multi(ops_, f, meas_, K_);
    }

private:
    const Operators& ops_;
    const MeasurementSet& meas_;
    int K_;
};

/// D(f) = sum_l 1/2 |y_l - H (u_l . f)|^2 with the fields u_l held fixed.
class FixedFieldFidelity {
public:
    FixedFieldFidelity(const Operators& ops, const MeasurementSet& meas, const std::vector<FieldMap>& fields)
        : ops_(ops), meas_(meas), fields_(fields) {
        detail::check_measurements(ops, meas);
        require(fields.size() == ops.transmissions(), ErrorKind::dimension, "one field per transmission required");
    }

    double value(std::span<const double> f) const {
        double total = 0.0;
        FieldMap w(ops_.cells());
        for (std::size_t l = 0; l < fields_.size(); ++l) {
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = fields_[l][i] * f[i];
            total += half_squared_residual(meas_.column(l), ops_.sensor.apply(w));
        }
        return total;
    }

    GradientResult value_and_gradient(std::span<const double> f) const {
        GradientResult out;
        out.grad.assign(ops_.cells(), 0.0);
        FieldMap w(ops_.cells());
        for (std::size_t l = 0; l < fields_.size(); ++l) {
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = fields_[l][i] * f[i];
            auto z = ops_.sensor.apply(w);
            const auto y = meas_.column(l);
            out.fidelity += half_squared_residual(y, z);
            for (std::size_t m = 0; m < z.size(); ++m) z[m] -= y[m];
            const auto back = ops_.sensor.apply_adjoint(z);
            for (std::size_t i = 0; i < w.size(); ++i) out.grad[i] += (back[i] * std::conj(fields_[l][i])).real();
        }
        return out;
    }

    /// Largest eigenvalue of A^T A for the real-linear map f -> [H (u_l . f)]_l.
    double lipschitz(int iters) const {
        const std::size_t n = ops_.cells();
        RealVector v(n, 1.0 / std::sqrt(static_cast<double>(n)));
        double lambda = 0.0;
        FieldMap w(n);
        for (int it = 0; it < iters; ++it) {
            RealVector av(n, 0.0);
            for (std::size_t l = 0; l < fields_.size(); ++l) {
                for (std::size_t i = 0; i < n; ++i) w[i] = fields_[l][i] * v[i];
                const auto back = ops_.sensor.apply_adjoint(ops_.sensor.apply(w));
                for (std::size_t i = 0; i < n; ++i) av[i] += (back[i] * std::conj(fields_[l][i])).real();
            }
            lambda = regopt_detail::norm2(av);
            if (lambda == 0.0) return 0.0;
            for (std::size_t i = 0; i < n; ++i) v[i] = av[i] / lambda;
        }
        return lambda;
    }

private:
    const Operators& ops_;
    const MeasurementSet& meas_;
    const std::vector<FieldMap>& fields_;
};

/// Initial step 1/L for the first-Born linearization.
inline double first_born_step(const Operators& ops, const MeasurementSet& meas, int power_iters) {
    FixedFieldFidelity lin(ops, meas, ops.incident);
    const double L = lin.lipschitz(power_iters);
    require(L > 0 && std::isfinite(L), ErrorKind::invalid_input, "first-Born operator has zero norm");
    return 1.0 / L;
}

// ---------------------------------------------------------------------------
// Drivers

inline ReconstructionReport reconstruct_rb(const Operators& ops, const MeasurementSet& meas, int K,
                                           const TVParams& params, const OptimOptions& opt = {},
                                           std::optional<std::span<const double>> truth = std::nullopt,
                                           Method tag = Method::RB) {
    const auto start = std::chrono::steady_clock::now();
    require(params.tau >= 0, ErrorKind::invalid_input, "tau must be >= 0");
    BornFidelity fid(ops, meas, K);
    const double half_y2 = 0.5 * meas.squared_norm();
    const double step0 = first_born_step(ops, meas, opt.power_iters);

    ReconstructionReport rep;
    rep.method = tag;
    rep.layers = K;
    rep.tau = params.tau;
    auto res = accelerated_proximal_gradient(fid, shape_of(ops.scene.grid), params,
                                             RealVector(ops.cells(), 0.0), step0, half_y2, opt);
    rep.potential = std::move(res.solution);
    rep.history = std::move(res.history);
    for (const auto& r : rep.history) rep.data_fit.push_back(r.data_fit);
    rep.iterations = res.iterations;
    rep.converged = res.converged;
    if (truth) rep.snr_db = snr_db(rep.potential, *truth);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

inline ReconstructionReport reconstruct_fb(const Operators& ops, const MeasurementSet& meas, const TVParams& params,
                                           const OptimOptions& opt = {},
                                           std::optional<std::span<const double>> truth = std::nullopt) {
    return reconstruct_rb(ops, meas, 1, params, opt, truth, Method::FB);
}

/// Alternating minimization. Inner-solver failures end the run early with
/// status "aborted: ..." and the last completed potential.
inline ReconstructionReport reconstruct_am(const Operators& ops, const MeasurementSet& meas, const TVParams& params,
                                           const AMOptions& am = {}, const OptimOptions& opt = {},
                                           std::optional<std::span<const double>> truth = std::nullopt) {
    const auto start = std::chrono::steady_clock::now();
    require(am.outer_iters >= 1 && am.inner_iters >= 1, ErrorKind::invalid_input, "AM iteration counts must be >= 1");
    require(params.tau >= 0, ErrorKind::invalid_input, "tau must be >= 0");
    detail::check_measurements(ops, meas);
    const double half_y2 = 0.5 * meas.squared_norm();
    const auto shape = shape_of(ops.scene.grid);

    ReconstructionReport rep;
    rep.method = Method::AM;
    rep.tau = params.tau;
    rep.layers = 0;
    RealVector f(ops.cells(), 0.0);
    std::vector<FieldMap> fields(ops.transmissions());
    OptimOptions inner = opt;
    inner.max_iter = am.inner_iters;

    for (int outer = 1; outer <= am.outer_iters; ++outer) {
        try {
            detail::for_each_transmission(ops.transmissions(), [&](std::size_t l) {
                // The previous pass's field is a good starting point.
                fields[l] = solve_lippmann_schwinger(ops.domain, ops.sensor, f, ops.incident[l], am.field_solver,
                                                     fields[l])
                                .internal_field;
            });
        } catch (const Error& e) {
            rep.status = std::string("aborted: ") + e.what();
            break;
        }
        FixedFieldFidelity lin(ops, meas, fields);
        const double L = lin.lipschitz(opt.power_iters);
        require(L > 0 && std::isfinite(L), ErrorKind::invalid_input, "fixed-field operator has zero norm");
        auto res = accelerated_proximal_gradient(lin, shape, params, f, 1.0 / L, half_y2, inner, {}, outer);
        double change = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) change += (res.solution[i] - f[i]) * (res.solution[i] - f[i]);
        f = std::move(res.solution);
        rep.history.insert(rep.history.end(), res.history.begin(), res.history.end());
        rep.data_fit.push_back(half_y2 > 0 ? lin.value(f) / half_y2 : 0.0);
        rep.iterations = outer;
        const double fn = regopt_detail::norm2(f);
        if (std::sqrt(change) <= opt.stop_tol * (fn > 0 ? fn : 1.0)) {
            rep.converged = true;
            break;
        }
    }
    rep.potential = std::move(f);
    if (truth) rep.snr_db = snr_db(rep.potential, *truth);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

} // namespace borntomo
