#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace borntomo::krylov {

using cplx = std::complex<double>;

struct Options {
    int restart = 50;
    double tol = 1e-10;
    int max_iter = 1000;
};

struct Result {
    double relative_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline double norm2(std::span<const cplx> v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

/// Restarted GMRES for a matrix-free complex operator.
///
/// `apply(in, out)` computes out = A in. `x` holds the initial guess on entry
/// and the solution on exit. The returned residual is recomputed from
/// b - A x after the last cycle, not taken from the Hessenberg estimate.
template <class Apply>
Result gmres(Apply&& apply, std::span<const cplx> b, std::span<cplx> x, const Options& opt = {}) {
    const std::size_t n = b.size();
    const int m = opt.restart;
    Result res;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        for (auto& v : x) v = cplx{};
        res.converged = true;
        return res;
    }

    std::vector<std::vector<cplx>> basis(static_cast<std::size_t>(m) + 1, std::vector<cplx>(n));
    std::vector<cplx> hess(static_cast<std::size_t>((m + 1) * m));
    auto h = [&](int i, int j) -> cplx& { return hess[static_cast<std::size_t>(i * m + j)]; };
    std::vector<double> cs(static_cast<std::size_t>(m));
    std::vector<cplx> sn(static_cast<std::size_t>(m)), g(static_cast<std::size_t>(m) + 1), y(static_cast<std::size_t>(m));
    std::vector<cplx> r(n), w(n);

    auto residual = [&] {
        apply(std::span<const cplx>(x.data(), n), std::span<cplx>(r));
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        return norm2(r);
    };

    double beta = residual();
    res.relative_residual = beta / bnorm;
    while (res.relative_residual > opt.tol && res.iterations < opt.max_iter) {
        for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), cplx{});
        g[0] = beta;
        int k = 0;
        for (; k < m && res.iterations < opt.max_iter; ++k) {
            apply(std::span<const cplx>(basis[k]), std::span<cplx>(w));
            ++res.iterations;
            for (int i = 0; i <= k; ++i) {
                const cplx hik = dot(basis[i], w);
                h(i, k) = hik;
                for (std::size_t t = 0; t < n; ++t) w[t] -= hik * basis[i][t];
            }
            const double wn = norm2(w);
            h(k + 1, k) = wn;
            for (int i = 0; i < k; ++i) {
                const cplx a = h(i, k), c = h(i + 1, k);
                h(i, k) = cs[i] * a + sn[i] * c;
                h(i + 1, k) = -std::conj(sn[i]) * a + cs[i] * c;
            }
            const cplx a = h(k, k);
            const double bb = std::abs(h(k + 1, k));
            const double rho = std::hypot(std::abs(a), bb);
            if (std::abs(a) == 0.0) {
                cs[k] = 0.0;
                sn[k] = 1.0;
            } else {
                cs[k] = std::abs(a) / rho;
                sn[k] = (a / std::abs(a)) * std::conj(h(k + 1, k)) / rho;
            }
            h(k, k) = cs[k] * a + sn[k] * h(k + 1, k);
            h(k + 1, k) = 0.0;
            g[k + 1] = -std::conj(sn[k]) * g[k];
            g[k] = cs[k] * g[k];
            const bool happy = wn <= 1e-300;
            if (!happy)
                for (std::size_t t = 0; t < n; ++t) basis[k + 1][t] = w[t] / wn;
            if (std::abs(g[k + 1]) / bnorm <= opt.tol || happy) {
                ++k;
                break;
            }
        }
        for (int i = k - 1; i >= 0; --i) {
            cplx s = g[i];
            for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[j];
            y[i] = s / h(i, i);
        }
        for (int i = 0; i < k; ++i)
            for (std::size_t t = 0; t < n; ++t) x[t] += y[i] * basis[i][t];
        const double prev = res.relative_residual;
        beta = residual();
        res.relative_residual = beta / bnorm;
        if (!(res.relative_residual < prev)) break; // stagnated
    }
    res.converged = res.relative_residual <= opt.tol;
    return res;
}

} // namespace borntomo::krylov
