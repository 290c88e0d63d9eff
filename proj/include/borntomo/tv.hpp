#pragma once

// Isotropic total variation with forward differences and replicate
// (Neumann) boundaries, and its constrained proximal operator computed by
// the dual fast gradient projection method.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "borntomo/errors.hpp"
#include "borntomo/scene.hpp"

namespace borntomo {

enum class ConstraintKind { unconstrained, nonnegative, box };

struct Constraint {
    ConstraintKind kind = ConstraintKind::nonnegative;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();

    static Constraint none() { return {ConstraintKind::unconstrained}; }
    static Constraint nonnegative() { return {ConstraintKind::nonnegative}; }
    static Constraint box(double lo, double hi) {
        require(lo <= hi, ErrorKind::invalid_input, "box constraint needs lo <= hi");
        return {ConstraintKind::box, lo, hi};
    }

    double project(double v) const {
        switch (kind) {
            case ConstraintKind::unconstrained: return v;
            case ConstraintKind::nonnegative: return v > 0.0 ? v : 0.0;
            case ConstraintKind::box: return std::clamp(v, lo, hi);
        }
        return v;
    }
    void project(std::span<double> v) const {
        for (auto& x : v) x = project(x);
    }
    bool contains(double v) const { return project(v) == v; }
};

struct TVParams {
    double tau = 0.0;
    int inner_iters = 100;
    double inner_tol = 1e-8;
    Constraint constraint = Constraint::nonnegative();
};

/// Image dimensions for the difference operators (x fastest).
struct Shape2D {
    std::size_t nx;
    std::size_t ny;
    std::size_t size() const { return nx * ny; }
};

inline Shape2D shape_of(const Grid2D& grid) { return {grid.count_x(), grid.count_y()}; }

namespace tv_detail {

/// (dx, dy) = D f; the last column of dx and last row of dy are zero.
inline void gradient(std::span<const double> f, Shape2D s, std::span<double> dx, std::span<double> dy) {
    for (std::size_t j = 0; j < s.ny; ++j)
        for (std::size_t i = 0; i < s.nx; ++i) {
            const std::size_t n = j * s.nx + i;
            dx[n] = i + 1 < s.nx ? f[n + 1] - f[n] : 0.0;
            dy[n] = j + 1 < s.ny ? f[n + s.nx] - f[n] : 0.0;
        }
}

/// out = D^T (px, py)
inline void gradient_adjoint(std::span<const double> px, std::span<const double> py, Shape2D s,
                             std::span<double> out) {
    for (std::size_t j = 0; j < s.ny; ++j)
        for (std::size_t i = 0; i < s.nx; ++i) {
            const std::size_t n = j * s.nx + i;
            double v = 0.0;
            if (i + 1 < s.nx) v -= px[n];
            if (i > 0) v += px[n - 1];
            if (j + 1 < s.ny) v -= py[n];
            if (j > 0) v += py[n - s.nx];
            out[n] = v;
        }
}

} // namespace tv_detail

inline double tv_value(std::span<const double> f, Shape2D s) {
    check_size(f.size(), s.size(), "tv_value input");
    std::vector<double> dx(f.size()), dy(f.size());
    tv_detail::gradient(f, s, dx, dy);
    double sum = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) sum += std::hypot(dx[n], dy[n]);
    return sum;
}

inline double tv_value(std::span<const double> f, const Grid2D& grid) { return tv_value(f, shape_of(grid)); }

struct ProxResult {
    RealVector solution;
    double objective = 0.0; ///< 1/2 |x - g|^2 + weight * TV(x)
    double duality_gap = 0.0;
    int iterations = 0;
};

/// Objective of the constrained TV denoising problem.
inline double denoise_objective(std::span<const double> x, std::span<const double> g, double weight, Shape2D s) {
    double q = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) q += (x[n] - g[n]) * (x[n] - g[n]);
    return 0.5 * q + weight * tv_value(x, s);
}

/// argmin_{x in C} 1/2 |x - g|^2 + weight * TV(x).
///
/// Dual variables p live in the product of unit discs. For a dual iterate
/// the primal candidate is x = P_C(w) with w = g - weight D^T p and the dual
/// value is 1/2|x - w|^2 - 1/2|w|^2 + 1/2|g|^2, so every iteration yields a
/// certified duality gap. Stops when gap <= inner_tol (1 + objective).
inline ProxResult tv_prox_detailed(std::span<const double> g, double weight, Shape2D s, const TVParams& params) {
    require(weight >= 0 && std::isfinite(weight), ErrorKind::invalid_input, "prox weight must be finite and >= 0");
    require(params.inner_iters >= 1, ErrorKind::invalid_input, "prox needs at least one inner iteration");
    check_size(g.size(), s.size(), "tv_prox input");
    const std::size_t n = g.size();
    const auto& C = params.constraint;

    ProxResult out;
    if (weight == 0.0) {
        out.solution.assign(g.begin(), g.end());
        C.project(out.solution);
        out.objective = denoise_objective(out.solution, g, 0.0, s);
        return out;
    }

    double g2 = 0.0;
    for (double v : g) g2 += v * v;

    std::vector<double> px(n, 0.0), py(n, 0.0), rx(n, 0.0), ry(n, 0.0), qx(n), qy(n);
    std::vector<double> w(n), x(n), dx(n), dy(n), adj(n);
    const double step = 1.0 / (8.0 * weight);
    double t = 1.0;

    // Primal candidate and duality gap for dual point (ax, ay).
    auto evaluate = [&](std::span<const double> ax, std::span<const double> ay, double& primal) {
        tv_detail::gradient_adjoint(ax, ay, s, adj);
        double w2 = 0.0, xw2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            w[k] = g[k] - weight * adj[k];
            x[k] = C.project(w[k]);
            w2 += w[k] * w[k];
            xw2 += (x[k] - w[k]) * (x[k] - w[k]);
        }
        primal = denoise_objective(x, g, weight, s);
        const double dual = 0.5 * xw2 - 0.5 * w2 + 0.5 * g2;
        return primal - dual;
    };

    double primal = 0.0;
    double gap = evaluate(px, py, primal);
    int it = 0;
    while (gap > params.inner_tol * (1.0 + std::abs(primal)) && it < params.inner_iters) {
        ++it;
        // x = P_C(g - weight D^T r)
        tv_detail::gradient_adjoint(rx, ry, s, adj);
        for (std::size_t k = 0; k < n; ++k) x[k] = C.project(g[k] - weight * adj[k]);
        tv_detail::gradient(x, s, dx, dy);
        for (std::size_t k = 0; k < n; ++k) {
            double a = rx[k] + step * dx[k];
            double b = ry[k] + step * dy[k];
            const double norm = std::hypot(a, b);
            if (norm > 1.0) {
                a /= norm;
                b /= norm;
            }
            qx[k] = a;
            qy[k] = b;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        for (std::size_t k = 0; k < n; ++k) {
            rx[k] = qx[k] + beta * (qx[k] - px[k]);
            ry[k] = qy[k] + beta * (qy[k] - py[k]);
        }
        px.swap(qx);
        py.swap(qy);
        t = t_next;
        gap = evaluate(px, py, primal);
    }
    out.solution = x;
    out.objective = primal;
    out.duality_gap = gap;
    out.iterations = it;
    return out;
}

inline RealVector tv_prox(std::span<const double> g, double weight, Shape2D s, const TVParams& params) {
    return tv_prox_detailed(g, weight, s, params).solution;
}

inline RealVector tv_prox(std::span<const double> g, double weight, const Grid2D& grid, const TVParams& params) {
    return tv_prox(g, weight, shape_of(grid), params);
}

} // namespace borntomo
