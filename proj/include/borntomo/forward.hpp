#pragma once

// Forward scattering models.
//
// recursive_born truncates the Lippmann-Schwinger fixed point after K
// scattering layers:
//     u^1 = u_in,   u^k = u_in + G (u^{k-1} . f)   (k = 2..K),
//     z   = H (u^K . f).
// K = 1 is the first-Born model. All K layers are kept for backpropagation.
//
// solve_lippmann_schwinger solves (I - G diag f) u = u_in with GMRES and is
// the reference model used for data generation.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "borntomo/errors.hpp"
#include "borntomo/greenops.hpp"
#include "borntomo/krylov.hpp"

namespace borntomo {

struct BornTrace {
    /// layers[k] is the internal field after k+1 scatterings; layers[0] = u_in.
    std::vector<FieldMap> layers;
    ComplexVector prediction;
    int depth() const { return static_cast<int>(layers.size()); }
};

inline void check_potential(std::span<const double> f) {
    for (double v : f)
        if (!std::isfinite(v)) throw Error(ErrorKind::invalid_input, "scattering potential has non-finite entries");
}

inline BornTrace recursive_born(const DomainGreen& G, const SensorGreen& H, std::span<const double> f,
                                std::span<const cplx> u_in, int K, DomainGreen::Workspace& ws) {
    require(K >= 1, ErrorKind::invalid_input, "number of layers K must be >= 1");
    const std::size_t n = G.size();
    check_size(f.size(), n, "potential");
    check_size(u_in.size(), n, "incident field");
    check_size(H.cols(), n, "sensor operator columns");
    check_potential(f);

    BornTrace trace;
    trace.layers.reserve(static_cast<std::size_t>(K));
    trace.layers.emplace_back(u_in.begin(), u_in.end());
    FieldMap contrast_source(n);
    for (int k = 1; k < K; ++k) {
        const auto& prev = trace.layers.back();
        for (std::size_t i = 0; i < n; ++i) contrast_source[i] = prev[i] * f[i];
        FieldMap next(n);
        G.apply(contrast_source, next, ws);
        for (std::size_t i = 0; i < n; ++i) next[i] += u_in[i];
        trace.layers.push_back(std::move(next));
    }
    const auto& last = trace.layers.back();
    for (std::size_t i = 0; i < n; ++i) contrast_source[i] = last[i] * f[i];
    trace.prediction = H.apply(contrast_source);
    return trace;
}

inline BornTrace recursive_born(const DomainGreen& G, const SensorGreen& H, std::span<const double> f,
                                std::span<const cplx> u_in, int K) {
    auto ws = G.make_workspace();
    return recursive_born(G, H, f, u_in, K, ws);
}

struct LSSolution {
    FieldMap internal_field;
    ComplexVector prediction;
    double residual_norm = 0.0; ///< relative: |(I - G diag f) u - u_in| / |u_in|
    int iterations = 0;
};

struct LSOptions {
    double tol = 1e-10;
    int max_iter = 1000;
    int restart = 50;
};

inline LSSolution solve_lippmann_schwinger(const DomainGreen& G, const SensorGreen& H, std::span<const double> f,
                                           std::span<const cplx> u_in, const LSOptions& opt = {},
                                           std::span<const cplx> guess = {}) {
    require(opt.tol > 0, ErrorKind::invalid_input, "solver tolerance must be positive");
    const std::size_t n = G.size();
    check_size(f.size(), n, "potential");
    check_size(u_in.size(), n, "incident field");
    check_potential(f);

    auto ws = G.make_workspace();
    FieldMap tmp(n);
    auto apply = [&](std::span<const cplx> in, std::span<cplx> out) {
        for (std::size_t i = 0; i < n; ++i) tmp[i] = in[i] * f[i];
        G.apply(tmp, out, ws);
        for (std::size_t i = 0; i < n; ++i) out[i] = in[i] - out[i];
    };

    LSSolution sol;
    if (guess.empty()) {
        sol.internal_field.assign(n, cplx{});
    } else {
        check_size(guess.size(), n, "initial guess");
        sol.internal_field.assign(guess.begin(), guess.end());
    }
    const auto res = krylov::gmres(apply, u_in, std::span<cplx>(sol.internal_field),
                                   krylov::Options{opt.restart, opt.tol, opt.max_iter});
    sol.residual_norm = res.relative_residual;
    sol.iterations = res.iterations;
    if (!res.converged)
        throw ConvergenceError("Lippmann-Schwinger solve did not converge: relative residual " +
                                   std::to_string(res.relative_residual) + " after " +
                                   std::to_string(res.iterations) + " iterations",
                               res.relative_residual);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = sol.internal_field[i] * f[i];
    sol.prediction = H.apply(tmp);
    return sol;
}

/// Power-iteration estimate of the spectral radius of G diag(f). Values
/// below one indicate that the Born series converges.
inline double estimate_contraction(const DomainGreen& G, std::span<const double> f, int iters = 50) {
    require(iters >= 10, ErrorKind::invalid_input, "power iteration needs at least 10 steps");
    const std::size_t n = G.size();
    check_size(f.size(), n, "potential");
    auto ws = G.make_workspace();
    FieldMap v(n, cplx{1.0 / std::sqrt(static_cast<double>(n)), 0.0}), w(n), tmp(n);
    double estimate = 0.0;
    for (int it = 0; it < iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] * f[i];
        G.apply(tmp, w, ws);
        estimate = krylov::norm2(w);
        if (estimate == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / estimate;
    }
    return estimate;
}

} // namespace borntomo
