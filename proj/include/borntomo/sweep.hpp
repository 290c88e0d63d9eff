#pragma once

// Contrast x method x depth experiment matrix. One simulation per contrast
// is shared by every reconstruction at that contrast; cells run on a worker
// pool and failures are recorded per cell.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "borntomo/experiment.hpp"
#include "borntomo/parallel.hpp"
#include "borntomo/report.hpp"
#include "borntomo/regopt.hpp"

namespace borntomo {

/// tau = value (absolute) or tau = value * 1/2 |y|^2 (relative).
struct TauRule {
    enum class Kind { absolute, relative } kind = Kind::relative;
    double value = 1e-9;

    static TauRule automatic() { return {Kind::relative, 1e-9}; }
    static TauRule absolute(double v) { return {Kind::absolute, v}; }
    static TauRule relative(double c) { return {Kind::relative, c}; }

    double resolve(const MeasurementSet& y) const {
        const double tau = kind == Kind::absolute ? value : value * 0.5 * y.squared_norm();
        require(tau >= 0 && std::isfinite(tau), ErrorKind::invalid_input, "tau must be finite and >= 0");
        return tau;
    }
};

/// Parses "auto", a number, or "rel:<c>".
inline TauRule parse_tau(const std::string& s) {
    try {
        if (s == "auto") return TauRule::automatic();
        if (s.rfind("rel:", 0) == 0) return TauRule::relative(std::stod(s.substr(4)));
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return TauRule::absolute(v);
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::invalid_input, "tau must be 'auto', a number, or 'rel:<c>', got '" + s + "'");
    }
}

inline Method parse_method(const std::string& s) {
    if (s == "fb" || s == "FB") return Method::FB;
    if (s == "am" || s == "AM") return Method::AM;
    if (s == "rb" || s == "RB") return Method::RB;
    throw Error(ErrorKind::invalid_input, "unknown method '" + s + "' (expected fb, am or rb)");
}

struct MethodConfig {
    Method method = Method::RB;
    int layers = 32;
    TVParams tv{};
    OptimOptions opt{};
    AMOptions am{};
};

inline ReconstructionReport run_method(const Operators& ops, const MeasurementSet& y, const MethodConfig& cfg,
                                       std::optional<std::span<const double>> truth = std::nullopt) {
    switch (cfg.method) {
        case Method::FB: return reconstruct_fb(ops, y, cfg.tv, cfg.opt, truth);
        case Method::AM: return reconstruct_am(ops, y, cfg.tv, cfg.am, cfg.opt, truth);
        case Method::RB: return reconstruct_rb(ops, y, cfg.layers, cfg.tv, cfg.opt, truth);
    }
    throw Error(ErrorKind::invalid_input, "unknown method");
}

struct SweepConfig {
    std::vector<double> contrasts{0.05, 0.10, 0.15, 0.20};
    std::vector<Method> methods{Method::FB, Method::AM, Method::RB};
    /// Depths for RB; the largest one fills the RB row of the table.
    std::vector<int> layers{32};
    TauRule tau = TauRule::automatic();
    TVParams tv{};
    OptimOptions opt{};
    AMOptions am{};
    SimulationOptions sim{};
    std::size_t jobs = 1;
};

struct SweepCell {
    double contrast = 0.0;
    Method method = Method::RB;
    int layers = 0;
    std::optional<ReconstructionReport> report;
    std::string error; ///< empty on success
    bool ok() const { return report.has_value() && error.empty(); }
};

struct SweepResult {
    std::vector<double> contrasts;
    int table_layers = 0;
    std::vector<SweepCell> cells;
    std::map<double, SimulationResult> simulations;

    const SweepCell* find(double contrast, Method m, int layers) const {
        for (const auto& c : cells)
            if (c.contrast == contrast && c.method == m && (m != Method::RB || c.layers == layers)) return &c;
        return nullptr;
    }
    std::size_t succeeded() const {
        return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.ok(); }));
    }
};

inline SweepResult run_sweep(const Scene& scene, const SweepConfig& cfg,
                             const std::function<void(const SweepCell&)>& on_cell = {}) {
    require(!cfg.contrasts.empty() && !cfg.methods.empty(), ErrorKind::invalid_input, "sweep matrix is empty");
    const bool has_rb = std::find(cfg.methods.begin(), cfg.methods.end(), Method::RB) != cfg.methods.end();
    require(!has_rb || !cfg.layers.empty(), ErrorKind::invalid_input, "RB needs at least one layer count");
    for (int K : cfg.layers) require(K >= 1, ErrorKind::invalid_input, "layer counts must be >= 1");

    SweepResult out;
    out.contrasts = cfg.contrasts;
    out.table_layers = cfg.layers.empty() ? 0 : *std::max_element(cfg.layers.begin(), cfg.layers.end());
    const Operators ops(scene);

    for (double c : cfg.contrasts)
        for (Method m : cfg.methods) {
            if (m == Method::RB) {
                for (int K : cfg.layers) out.cells.push_back({c, m, K, std::nullopt, {}});
            } else {
                out.cells.push_back({c, m, m == Method::FB ? 1 : 0, std::nullopt, {}});
            }
        }

    std::vector<std::optional<SimulationResult>> sims(cfg.contrasts.size());
    std::vector<std::string> sim_errors(cfg.contrasts.size());
    parallel_for(
        cfg.contrasts.size(),
        [&](std::size_t i) {
            auto sim = cfg.sim;
            sim.contrast = cfg.contrasts[i];
            try {
                sims[i] = simulate(scene, sim);
            } catch (const std::exception& e) {
                sim_errors[i] = std::string("simulation failed: ") + e.what();
            }
        },
        cfg.jobs);

    std::mutex report_mutex;
    parallel_for(
        out.cells.size(),
        [&](std::size_t k) {
            auto& cell = out.cells[k];
            const auto idx = static_cast<std::size_t>(
                std::find(cfg.contrasts.begin(), cfg.contrasts.end(), cell.contrast) - cfg.contrasts.begin());
            if (!sims[idx]) {
                cell.error = sim_errors[idx];
            } else {
                try {
                    const auto& sim = *sims[idx];
                    MethodConfig mc{cell.method, std::max(cell.layers, 1), cfg.tv, cfg.opt, cfg.am};
                    mc.tv.tau = cfg.tau.resolve(sim.measurements);
                    std::optional<std::span<const double>> truth;
                    if (cell.contrast > 0) truth = std::span<const double>(sim.truth);
                    cell.report = run_method(ops, sim.measurements, mc, truth);
                    if (cell.report->status != "ok") cell.error = cell.report->status;
                } catch (const std::exception& e) {
                    cell.error = e.what();
                }
            }
            if (on_cell) {
                std::lock_guard lock(report_mutex);
                on_cell(cell);
            }
        },
        cfg.jobs);

    for (std::size_t i = 0; i < cfg.contrasts.size(); ++i)
        if (sims[i]) out.simulations.emplace(cfg.contrasts[i], std::move(*sims[i]));
    return out;
}

// ---------------------------------------------------------------------------
// Tables

inline std::string format_snr(const SweepCell* c) {
    if (!c || !c->ok() || !c->report->snr_db) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *c->report->snr_db);
    return buf;
}

inline std::string percent_label(double contrast) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g%%", contrast * 100.0);
    return buf;
}

inline std::string method_label(Method m, int layers) {
    return m == Method::RB ? "RB(K=" + std::to_string(layers) + ")" : std::string(to_string(m));
}

/// Methods as rows, contrasts as columns, SNR in dB.
inline std::string table_csv(const SweepResult& r, const std::vector<Method>& methods) {
    std::string out = "method";
    for (double c : r.contrasts) out += "," + percent_label(c);
    out += "\n";
    for (Method m : methods) {
        out += method_label(m, r.table_layers);
        for (double c : r.contrasts) out += "," + format_snr(r.find(c, m, r.table_layers));
        out += "\n";
    }
    return out;
}

/// Same table in Markdown with the best SNR per contrast in bold.
inline std::string table_markdown(const SweepResult& r, const std::vector<Method>& methods) {
    std::string out = "| Method |";
    std::string rule = "|---|";
    for (double c : r.contrasts) {
        out += " " + percent_label(c) + " |";
        rule += "---:|";
    }
    out += "\n" + rule + "\n";
    std::map<double, double> best;
    for (double c : r.contrasts)
        for (Method m : methods)
            if (const auto* cell = r.find(c, m, r.table_layers); cell && cell->ok() && cell->report->snr_db)
                best[c] = std::max(best.count(c) ? best[c] : -1e300, *cell->report->snr_db);
    for (Method m : methods) {
        out += "| " + method_label(m, r.table_layers) + " |";
        for (double c : r.contrasts) {
            const auto* cell = r.find(c, m, r.table_layers);
            std::string v = format_snr(cell);
            if (v.empty()) {
                v = cell && !cell->error.empty() ? "failed" : "-";
            } else if (*cell->report->snr_db == best[c]) {
                v = "**" + v + "**";
            }
            out += " " + v + " |";
        }
        out += "\n";
    }
    std::string failures;
    for (const auto& c : r.cells)
        if (!c.error.empty())
            failures += "- " + percent_label(c.contrast) + " " + method_label(c.method, c.layers) + ": " + c.error + "\n";
    if (!failures.empty()) out += "\nFailed cells:\n\n" + failures;
    return out;
}

/// contrast,layers,snr_db,iterations,final_data_fit for every RB cell.
inline std::string snr_vs_k_csv(const SweepResult& r) {
    std::string out = "contrast,layers,snr_db,iterations,final_data_fit\n";
    for (const auto& c : r.cells) {
        if (c.method != Method::RB) continue;
        char contrast[32];
        std::snprintf(contrast, sizeof contrast, "%g", c.contrast);
        out += std::string(contrast) + "," + std::to_string(c.layers) + ",";
        if (c.ok() && c.report->snr_db) {
            out += format_double(*c.report->snr_db) + "," + std::to_string(c.report->iterations) + "," +
                   (c.report->data_fit.empty() ? std::string() : format_double(c.report->data_fit.back()));
        } else {
            out += ",,";
        }
        out += "\n";
    }
    return out;
}

} // namespace borntomo
