// Standalone acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "borntomo/experiment.hpp"
#include "borntomo/regopt.hpp"
#include "borntomo/report.hpp"
#include "borntomo/sweep.hpp"

#ifndef BORN_TOMO_EXE
#error "BORN_TOMO_EXE must point at the born_tomo executable"
#endif

using namespace borntomo;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Scene small_scene(std::size_t n, int sources, int sensors, double step = 1.0, double wavelength = 6.0) {
    const auto grid = Grid2D::square(static_cast<double>(n) * step, step);
    auto [src, sen] = circular_layout(grid, 1.5 * grid.half_diagonal() + 2.0, sources, sensors);
    return Scene{grid, Medium(1.0, wavelength), std::move(src), std::move(sen)};
}

double rel_err(std::span<const cplx> a, std::span<const cplx> b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

ComplexVector random_complex(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    ComplexVector v(n);
    for (auto& x : v) x = cplx{d(rng), d(rng)};
    return v;
}

// ---------------------------------------------------------------------------
// 1. Backpropagated gradient against central differences.

Outcome gradient_check() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> size(3, 12);
    const int Ks[] = {1, 2, 5};
    const int Ls[] = {1, 4};
    double worst = 0.0;
    int count = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int K = Ks[trial % 3];
        const int L = Ls[(trial / 3) % 2];
        const Operators ops(small_scene(static_cast<std::size_t>(size(rng)), L, 10));
        const double kb = ops.scene.medium.kb();
        std::uniform_real_distribution<double> u(0.0, 0.2 * kb * kb);
        RealVector f(ops.cells());
        for (auto& v : f) v = u(rng);
        MeasurementSet y(ops.sensors(), ops.transmissions());
        y.values = random_complex(y.values.size(), rng);
        // Scale the data to the size of the predictions.
        const double zn = std::sqrt(fidelity_multi(ops, f, MeasurementSet(ops.sensors(), ops.transmissions()), K).fidelity);
        for (auto& v : y.values) v *= zn / std::sqrt(0.5 * y.squared_norm());

        const auto g = fidelity_and_gradient_multi(ops, f, y, K).grad;
        double err = 0.0, gmax = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double h = 1e-5 * std::max(1.0, std::abs(f[i]));
            auto fp = f, fm = f;
            fp[i] += h;
            fm[i] -= h;
            const double fd = (fidelity_multi(ops, fp, y, K).fidelity - fidelity_multi(ops, fm, y, K).fidelity) / (2 * h);
            err = std::max(err, std::abs(fd - g[i]));
            gmax = std::max(gmax, std::abs(g[i]));
        }
        worst = std::max(worst, err / gmax);
        ++count;
    }
    const double t = seconds_since(t0);
    return {worst < 1e-5 && count >= 50 && t < 60.0,
            fmt("%d instances, worst relative error %.2e, %.1f s", count, worst, t)};
}

// ---------------------------------------------------------------------------
// 2. FFT forward model against a dense recursion; adjoint identities.

cplx green_ref(double kb, double r) {
    const double x = kb * r;
    return cplx{0.0, 0.25} * cplx{std::cyl_bessel_j(0.0, x), -std::cyl_neumann(0.0, x)};
}

Outcome forward_check() {
    const Operators ops(small_scene(8, 3, 12));
    const auto& grid = ops.scene.grid;
    const double kb = ops.scene.medium.kb();
    const std::size_t n = ops.cells(), m = ops.sensors();
    std::vector<cplx> Gd(n * n), Hd(m * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            Gd[a * n + b] = a == b ? ops.domain.self_term()
                                   : green_ref(kb, distance(grid.center(a), grid.center(b))) * grid.cell_area();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < n; ++b)
            Hd[a * n + b] = green_ref(kb, distance(ops.scene.sensors.positions[a], grid.center(b))) * grid.cell_area();
    auto matvec = [](const std::vector<cplx>& A, std::size_t rows, std::span<const cplx> x) {
        ComplexVector out(rows);
        const std::size_t cols = x.size();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) out[r] += A[r * cols + c] * x[c];
        return out;
    };

    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 0.3 * kb * kb);
    double worst = 0.0;
    for (int K : {1, 2, 5, 10}) {
        RealVector f(n);
        for (auto& v : f) v = u(rng);
        for (std::size_t l = 0; l < ops.transmissions(); ++l) {
            const auto trace = recursive_born(ops.domain, ops.sensor, f, ops.incident[l], K);
            ComplexVector uk = ops.incident[l];
            for (int k = 1; k < K; ++k) {
                ComplexVector w(n);
                for (std::size_t i = 0; i < n; ++i) w[i] = uk[i] * f[i];
                auto next = matvec(Gd, n, w);
                for (std::size_t i = 0; i < n; ++i) next[i] += ops.incident[l][i];
                worst = std::max(worst, rel_err(trace.layers[static_cast<std::size_t>(k)], next));
                uk = std::move(next);
            }
            ComplexVector w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = uk[i] * f[i];
            worst = std::max(worst, rel_err(trace.prediction, matvec(Hd, m, w)));
        }
    }
    double adj = 0.0;
    for (int t = 0; t < 5; ++t) {
        const auto x = random_complex(n, rng), v = random_complex(n, rng), r = random_complex(m, rng);
        const cplx a = dot(v, ops.domain.apply(x)), b = dot(ops.domain.apply_adjoint(v), x);
        adj = std::max(adj, std::abs(a - b) / std::abs(a));
        const cplx c = dot(r, ops.sensor.apply(x)), d = dot(ops.sensor.apply_adjoint(r), x);
        adj = std::max(adj, std::abs(c - d) / std::abs(c));
    }
    return {worst < 1e-12 && adj < 1e-12,
            fmt("dense recursion error %.2e, adjoint mismatch %.2e", worst, adj)};
}

// ---------------------------------------------------------------------------
// 3. Born series convergence to the Lippmann-Schwinger solution.

Outcome born_convergence() {
    const Operators ops(small_scene(24, 1, 24, 1.25, 10.0));
    // Strong enough that the series needs a few dozen terms.
    const auto f = shepp_logan(ops.scene.grid, ops.scene.medium, 0.4);
    const double rho = estimate_contraction(ops.domain, f, 200);
    LSOptions tight;
    tight.tol = 1e-14;
    const auto ref = solve_lippmann_schwinger(ops.domain, ops.sensor, f, ops.incident[0], tight).prediction;
    std::vector<double> err;
    int reached = -1;
    for (int K = 1; K <= 200; ++K) {
        err.push_back(rel_err(recursive_born(ops.domain, ops.sensor, f, ops.incident[0], K).prediction, ref));
        if (reached < 0 && err.back() < 1e-5) reached = K;
        if (err.back() < 1e-13) break;
    }
    bool geometric = true;
    for (std::size_t i = 3; i < err.size(); ++i)
        if (err[i - 1] > 1e-12 && err[i] > err[i - 1]) geometric = false;
    return {rho < 0.5 && reached > 0 && geometric,
            fmt("contraction %.3f, error < 1e-5 at K = %d, decreasing for K >= 3: %s", rho, reached,
                geometric ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 4. FB and RB(K=1) coincide bit for bit.

Outcome first_born_identity() {
    const Operators ops(small_scene(12, 4, 16));
    const auto truth = shepp_logan(ops.scene.grid, ops.scene.medium, 0.05);
    MeasurementSet y(ops.sensors(), ops.transmissions());
    for (std::size_t l = 0; l < ops.transmissions(); ++l) {
        const auto s = solve_lippmann_schwinger(ops.domain, ops.sensor, truth, ops.incident[l]);
        std::copy(s.prediction.begin(), s.prediction.end(), y.column(l).begin());
    }
    bool same = true;
    // Predictions and gradients against the first-order formula written out.
    const auto rb = fidelity_and_gradient_multi(ops, truth, y, 1);
    std::size_t off = 0;
    RealVector grad(ops.cells(), 0.0);
    for (std::size_t l = 0; l < ops.transmissions(); ++l) {
        FieldMap w(ops.cells());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = ops.incident[l][i] * truth[i];
        const auto z = ops.sensor.apply(w);
        ComplexVector r(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            same = same && z[i] == rb.prediction[off + i];
            r[i] = z[i] - y.at(i, l);
        }
        off += z.size();
        const auto back = ops.sensor.apply_adjoint(r);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += (back[i] * std::conj(ops.incident[l][i])).real();
    }
    same = same && grad == rb.grad;
    TVParams p;
    p.tau = auto_tau(y);
    OptimOptions o;
    o.max_iter = 50;
    const auto a = reconstruct_fb(ops, y, p, o, truth);
    const auto b = reconstruct_rb(ops, y, 1, p, o, truth);
    same = same && a.potential == b.potential && a.data_fit == b.data_fit && a.history.size() == b.history.size();
    for (std::size_t i = 0; same && i < a.history.size(); ++i)
        same = a.history[i].objective == b.history[i].objective && a.history[i].step == b.history[i].step;
    return {same, same ? "predictions, gradients and 50-iteration reconstructions identical" : "mismatch"};
}

// ---------------------------------------------------------------------------
// 5, 6, 8. Desk-scale reconstructions.

struct DeskRuns {
    std::map<double, std::map<std::string, ReconstructionReport>> runs; // contrast -> label -> report
    std::map<double, double> half_y2;
};

bool monotone(const ReconstructionReport& r, double F0, std::string& why) {
    double prev = F0;
    int outer = r.history.empty() ? 0 : r.history.front().outer;
    for (std::size_t i = 0; i < r.history.size(); ++i) {
        const auto& h = r.history[i];
        // A new AM pass changes the model; monotonicity is within a pass.
        if (h.outer != outer) {
            outer = h.outer;
            prev = h.objective;
            continue;
        }
        if (h.objective > prev + 1e-12 * std::abs(prev)) {
            why = fmt("%s(K=%d) step %zu: %.17g > %.17g", to_string(r.method), r.layers, i + 1, h.objective, prev);
            return false;
        }
        prev = h.objective;
    }
    return true;
}

DeskRuns desk_runs() {
    const auto grid = Grid2D::square(120.0, 1.25);
    auto [src, sen] = circular_layout(grid, 100.0, 8, 120);
    const Scene scene{grid, Medium(1.0, 10.0), std::move(src), std::move(sen)};
    const Operators ops(scene);
    OptimOptions o;
    o.max_iter = 300;
    DeskRuns out;
    for (double c : {0.05, 0.10, 0.15, 0.20}) {
        SimulationOptions so;
        so.contrast = c;
        const auto sim = simulate(scene, so);
        const auto& y = sim.measurements;
        TVParams p;
        p.tau = parse_tau("rel:1e-5").resolve(y);
        out.half_y2[c] = 0.5 * y.squared_norm();
        auto& slot = out.runs[c];
        auto timed = [&](const std::string& label, auto&& fn) {
            const auto t0 = Clock::now();
            slot[label] = fn();
            std::printf("  %2.0f%% %-8s SNR %7.2f dB  iterations %3d  data fit %.2e  %.0f s\n", 100 * c, label.c_str(),
                        *slot[label].snr_db, slot[label].iterations, slot[label].data_fit.back(), seconds_since(t0));
            std::fflush(stdout);
        };
        timed("FB", [&] { return reconstruct_fb(ops, y, p, o, sim.truth); });
        timed("AM", [&] { return reconstruct_am(ops, y, p, AMOptions{}, o, sim.truth); });
        timed("RB32", [&] { return reconstruct_rb(ops, y, 32, p, o, sim.truth); });
        if (c == 0.15)
            for (int K : {2, 4, 8, 16})
                timed("RB" + std::to_string(K), [&] { return reconstruct_rb(ops, y, K, p, o, sim.truth); });
    }
    return out;
}

Outcome desk_ordering(const DeskRuns& d) {
    bool ok = true;
    std::string detail;
    for (const auto& [c, r] : d.runs) {
        const double fb = *r.at("FB").snr_db, am = *r.at("AM").snr_db, rb = *r.at("RB32").snr_db;
        ok = ok && rb >= am && am >= fb;
        if (c >= 0.15 - 1e-12) ok = ok && rb - fb >= 5.0;
        detail += fmt("%s%.0f%%: FB %.2f AM %.2f RB %.2f", detail.empty() ? "" : "; ", 100 * c, fb, am, rb);
    }
    return {ok, detail};
}

Outcome layer_sweep(const DeskRuns& d) {
    const auto& r = d.runs.at(0.15);
    std::vector<double> snr{*r.at("FB").snr_db};
    for (int K : {2, 4, 8, 16, 32}) snr.push_back(*r.at("RB" + std::to_string(K)).snr_db);
    bool ok = true;
    std::string detail = "SNR(K=1..32)";
    for (std::size_t i = 0; i < snr.size(); ++i) {
        if (i > 0 && snr[i] < snr[i - 1] - 0.3) ok = false;
        detail += fmt(" %.2f", snr[i]);
    }
    const auto& fit = r.at("RB32").data_fit;
    const double drop = fit.size() >= 100 ? fit.front() / fit[99] : 0.0;
    ok = ok && drop >= 100.0;
    detail += fmt("; RB(K=32) data fit %.2e -> %.2e by iteration 100 (%.0fx)", fit.front(),
                  fit.size() >= 100 ? fit[99] : fit.back(), drop);
    return {ok, detail};
}

Outcome monotone_objective(const DeskRuns& d) {
    int count = 0;
    for (const auto& [c, runs] : d.runs)
        for (const auto& [label, r] : runs) {
            std::string why;
            if (!monotone(r, d.half_y2.at(c), why)) return {false, fmt("%.0f%% ", 100 * c) + why};
            ++count;
        }
    return {true, fmt("%d runs, no objective increase", count)};
}

// ---------------------------------------------------------------------------
// 7. TV proximal operator against independent solvers.

void grad_ref(const std::vector<double>& x, int nx, int ny, std::vector<double>& gx, std::vector<double>& gy) {
    gx.assign(x.size(), 0.0);
    gy.assign(x.size(), 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int n = j * nx + i;
            if (i < nx - 1) gx[n] = x[n + 1] - x[n];
            if (j < ny - 1) gy[n] = x[n + nx] - x[n];
        }
}

void div_ref(const std::vector<double>& px, const std::vector<double>& py, int nx, int ny, std::vector<double>& out) {
    out.assign(px.size(), 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int n = j * nx + i;
            if (i < nx - 1) {
                out[n + 1] += px[n];
                out[n] -= px[n];
            }
            if (j < ny - 1) {
                out[n + nx] += py[n];
                out[n] -= py[n];
            }
        }
}

double objective_ref(const std::vector<double>& x, const std::vector<double>& g, double lam, int nx, int ny) {
    std::vector<double> gx, gy;
    grad_ref(x, nx, ny, gx, gy);
    double q = 0.0, tv = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        q += (x[n] - g[n]) * (x[n] - g[n]);
        tv += std::sqrt(gx[n] * gx[n] + gy[n] * gy[n]);
    }
    return 0.5 * q + lam * tv;
}

// Accelerated primal-dual hybrid gradient on the strongly convex primal.
std::vector<double> pdhg_oracle(const std::vector<double>& g, double lam, int nx, int ny, int iters) {
    const std::size_t N = g.size();
    std::vector<double> x(N, 0.0), xbar(N, 0.0), px(N, 0.0), py(N, 0.0), gx, gy, dt;
    double tau = 1.0 / std::sqrt(8.0), sigma = 1.0 / std::sqrt(8.0);
    for (int k = 0; k < iters; ++k) {
        grad_ref(xbar, nx, ny, gx, gy);
        for (std::size_t n = 0; n < N; ++n) {
            const double a = px[n] + sigma * gx[n], b = py[n] + sigma * gy[n];
            const double s = std::max(1.0, std::sqrt(a * a + b * b) / lam);
            px[n] = a / s;
            py[n] = b / s;
        }
        div_ref(px, py, nx, ny, dt);
        const auto x_old = x;
        for (std::size_t n = 0; n < N; ++n) x[n] = std::max(0.0, (x[n] - tau * dt[n] + tau * g[n]) / (1.0 + tau));
        const double theta = 1.0 / std::sqrt(1.0 + 2.0 * tau);
        tau *= theta;
        sigma /= theta;
        for (std::size_t n = 0; n < N; ++n) xbar[n] = x[n] + theta * (x[n] - x_old[n]);
    }
    return x;
}

// Projected subgradient, best objective seen.
double subgradient_oracle(const std::vector<double>& g, double lam, int nx, int ny, int iters) {
    const std::size_t N = g.size();
    std::vector<double> x = g, gx, gy, px(N), py(N), dt;
    for (auto& v : x) v = std::max(0.0, v);
    double best = objective_ref(x, g, lam, nx, ny);
    for (int k = 0; k < iters; ++k) {
        grad_ref(x, nx, ny, gx, gy);
        for (std::size_t n = 0; n < N; ++n) {
            const double m = std::sqrt(gx[n] * gx[n] + gy[n] * gy[n]);
            px[n] = m > 0 ? gx[n] / m : 0.0;
            py[n] = m > 0 ? gy[n] / m : 0.0;
        }
        div_ref(px, py, nx, ny, dt);
        const double step = 1.0 / (k + 10.0);
        for (std::size_t n = 0; n < N; ++n) x[n] = std::max(0.0, x[n] - step * ((x[n] - g[n]) + lam * dt[n]));
        best = std::min(best, objective_ref(x, g, lam, nx, ny));
    }
    return best;
}

Outcome prox_check() {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> d;
    TVParams p;
    p.inner_iters = 200000;
    p.inner_tol = 1e-13;
    double worst = 0.0, sub = -1e300;
    bool feasible = true;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> g(36);
        for (auto& v : g) v = d(rng);
        const double lam = 0.05 + 0.1 * trial;
        const auto x = tv_prox(g, lam, Shape2D{6, 6}, p);
        for (double v : x) feasible = feasible && v >= 0.0;
        const double ours = objective_ref(x, g, lam, 6, 6);
        worst = std::max(worst, std::abs(ours - objective_ref(pdhg_oracle(g, lam, 6, 6, 200000), g, lam, 6, 6)));
        if (trial % 5 == 0) sub = std::max(sub, ours - subgradient_oracle(g, lam, 6, 6, 1000000));
    }
    return {worst < 1e-8 && sub <= 1e-8 && feasible,
            fmt("20 instances, max |F - F_pdhg| %.2e, max F - F_subgradient %.2e, feasible: %s", worst, sub,
                feasible ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9. CLI reruns are byte-identical.

std::string file_bytes(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "borntomo_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto grid = Grid2D::square(32 * 1.25, 1.25);
    auto [src, sen] = circular_layout(grid, 40.0, 4, 48);
    write_text(dir / "scene.json", scene_to_json(Scene{grid, Medium(1.0, 10.0), src, sen}).dump(2));
    auto run = [&](const std::string& args) {
        const std::string cmd = std::string("\"") + BORN_TOMO_EXE + "\" " + args + " > \"" +
                                (dir / "log.txt").string() + "\" 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    const std::string scene = "--scene \"" + (dir / "scene.json").string() + "\"";
    for (const char* name : {"a", "b"}) {
        const fs::path d = dir / name;
        if (run("simulate " + scene + " --contrast 0.1 --noise-snr-db 30 --seed 3 --out \"" + d.string() + "\"") != 0)
            return {false, "simulate failed"};
        if (run("reconstruct " + scene + " --data \"" + (d / "y.bin").string() + "\" --truth \"" +
                (d / "f_true.bin").string() + "\" --method rb --layers 8 --max-iter 40 --seed 3 --out \"" +
                (d / "r").string() + "\"") != 0)
            return {false, "reconstruct failed"};
    }
    int compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
        // Wall-clock timings are the one output allowed to vary.
        if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
        const auto rel = fs::relative(e.path(), dir / "a");
        if (file_bytes(e.path()) != file_bytes(dir / "b" / rel)) return {false, rel.string() + " differs"};
        ++compared;
    }
    fs::remove_all(dir);
    return {compared > 0, fmt("%d output files byte-identical across two runs", compared)};
}

Outcome guarded(const std::function<Outcome()>& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return {false, std::string("exception: ") + e.what()};
    }
}

} // namespace

int main() {
    const auto t0 = Clock::now();
    int failures = 0;
    auto report = [&](int id, const char* name, const Outcome& o) {
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };

    report(1, "gradient vs finite differences", guarded(gradient_check));
    report(2, "FFT forward model vs dense recursion", guarded(forward_check));
    report(3, "Born series convergence", guarded(born_convergence));
    report(4, "FB equals RB with one layer", guarded(first_born_identity));

    std::printf("desk-scale runs (96 x 96, 8 transmissions, 120 sensors, %u worker threads):\n",
                static_cast<unsigned>(max_worker_threads()));
    std::fflush(stdout);
    DeskRuns desk;
    std::string desk_error;
    try {
        desk = desk_runs();
    } catch (const std::exception& e) {
        desk_error = e.what();
    }
    auto desk_guard = [&](auto fn) {
        return desk_error.empty() ? guarded([&] { return fn(desk); }) : Outcome{false, "desk runs failed: " + desk_error};
    };
    report(5, "method ordering by contrast", desk_guard(desk_ordering));
    report(6, "SNR vs layers and data-fit decay", desk_guard(layer_sweep));
    report(7, "TV proximal operator", guarded(prox_check));
    report(8, "monotone objective", desk_guard(monotone_objective));
    report(9, "CLI determinism", guarded(determinism));

    std::printf("runtime %.0f s, %d of 9 criteria failed\n", seconds_since(t0), failures);
    return failures == 0 ? 0 : 1;
}
