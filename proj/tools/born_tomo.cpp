// born_tomo: simulate, reconstruct, evaluate and sweep.
//
// Exit codes: 0 success, 2 input or dimension error, 3 solver
// non-convergence, 4 optimizer divergence.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "borntomo/arrayfile.hpp"
#include "borntomo/experiment.hpp"
#include "borntomo/regopt.hpp"
#include "borntomo/report.hpp"
#include "borntomo/scene.hpp"
#include "borntomo/sweep.hpp"

namespace fs = std::filesystem;
using namespace borntomo;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitDivergence = 4;

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::convergence: return kExitConvergence;
        case ErrorKind::divergence: return kExitDivergence;
        default: return kExitInput;
    }
}

Scene load_scene(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::io, "cannot read " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_input, path + ": " + e.what());
    }
    return scene_from_json(j);
}

fs::path prepare_out(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + dir + ": " + ec.message());
    return p;
}

void apply_jobs(int jobs) {
    if (jobs > 0) set_worker_threads(static_cast<std::size_t>(jobs));
}

struct Common {
    std::string scene;
    std::string out = ".";
    int jobs = 0;
};

struct OptimFlags {
    std::string method = "rb";
    int layers = 32;
    std::string tau = "auto";
    int max_iter = 500;
    double stop_tol = 1e-6;
    int am_outer = 20;
    int am_inner = 50;

    MethodConfig resolve(const MeasurementSet& y) const {
        MethodConfig mc;
        mc.method = parse_method(method);
        require(layers >= 1, ErrorKind::invalid_input, "--layers must be >= 1");
        require(max_iter >= 1, ErrorKind::invalid_input, "--max-iter must be >= 1");
        require(stop_tol >= 0, ErrorKind::invalid_input, "--stop-tol must be >= 0");
        mc.layers = mc.method == Method::FB ? 1 : layers;
        mc.tv.tau = parse_tau(tau).resolve(y);
        mc.opt.max_iter = max_iter;
        mc.opt.stop_tol = stop_tol;
        mc.am.outer_iters = am_outer;
        mc.am.inner_iters = am_inner;
        return mc;
    }
};

void add_optim_flags(CLI::App* cmd, OptimFlags& f) {
    cmd->add_option("--method", f.method, "fb, am or rb")->check(CLI::IsMember({"fb", "am", "rb"}));
    cmd->add_option("--layers", f.layers, "number of scattering layers K for rb");
    cmd->add_option("--tau", f.tau, "regularization weight: a number, 'auto' (1e-9 * |y|^2/2) or 'rel:<c>'");
    cmd->add_option("--max-iter", f.max_iter, "maximum proximal-gradient iterations");
    cmd->add_option("--stop-tol", f.stop_tol, "relative iterate change that ends the run");
    cmd->add_option("--am-outer", f.am_outer, "AM outer iterations");
    cmd->add_option("--am-inner", f.am_inner, "AM inner iterations per outer step");
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    Common common;
    double contrast = 0.15;
    std::optional<double> noise_snr_db;
    std::uint64_t seed = 0;
    int refine = 2;
};

int cmd_simulate(const SimulateArgs& a) {
    apply_jobs(a.common.jobs);
    const Scene scene = load_scene(a.common.scene);
    const auto out = prepare_out(a.common.out);
    SimulationOptions opt;
    opt.contrast = a.contrast;
    opt.noise_snr_db = a.noise_snr_db;
    opt.seed = a.seed;
    opt.refine = a.refine;
    const auto sim = simulate(scene, opt);

    write_measurements(out / "y.bin", sim.measurements);
    write_potential(out / "f_true.bin", sim.truth, scene.grid);
    const auto scale = write_images(out / "f_true", sim.truth, scene.grid);

    json m;
    m["scene"] = scene_to_json(scene);
    m["scene_hash"] = scene_hash(scene);
    m["contrast"] = a.contrast;
    m["refine"] = a.refine;
    m["solver"] = {{"tol", opt.solver.tol}, {"residuals", sim.residuals}, {"iterations", sim.iterations}};
    m["noise"] = a.noise_snr_db ? json{{"snr_db", *a.noise_snr_db}, {"seed", a.seed}, {"variance", sim.noise_power}}
                                : json(nullptr);
    m["measurements"] = {{"file", "y.bin"}, {"shape", {sim.measurements.num_sensors, sim.measurements.num_transmissions}}};
    m["truth"] = {{"file", "f_true.bin"}, {"shape", {scene.grid.count_y(), scene.grid.count_x()}}};
    m["image_scale"] = {{"min", scale.min}, {"max", scale.max}};
    write_json(out / "manifest.json", m);
    std::cout << "simulated " << sim.measurements.num_sensors << "x" << sim.measurements.num_transmissions
              << " measurements into " << out.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ReconstructArgs {
    Common common;
    OptimFlags optim;
    std::string data;
    std::string truth;
    std::uint64_t seed = 0;
};

void write_reconstruction(const fs::path& out, const Scene& scene, const ReconstructionReport& rep,
                          const json& extra) {
    write_potential(out / "f_hat.bin", rep.potential, scene.grid);
    write_json(out / "report.json", report_to_json(rep));
    write_text(out / "trace.csv", trace_csv(rep));
    const auto scale = write_images(out / "f_hat", rep.potential, scene.grid);
    json m = extra;
    m["scene_hash"] = scene_hash(scene);
    m["estimate"] = {{"file", "f_hat.bin"}, {"shape", {scene.grid.count_y(), scene.grid.count_x()}}};
    m["image_scale"] = {{"min", scale.min}, {"max", scale.max}};
    m["images"] = png_supported() ? json{"f_hat.pgm", "f_hat.png"} : json{"f_hat.pgm"};
    write_json(out / "manifest.json", m);
    write_json(out / "timing.json", {{"wall_seconds", rep.wall_seconds}});
}

int cmd_reconstruct(const ReconstructArgs& a) {
    apply_jobs(a.common.jobs);
    const Scene scene = load_scene(a.common.scene);
    const auto y = read_measurements(a.data);
    if (y.num_sensors != scene.sensors.size() || y.num_transmissions != scene.sources.size())
        throw Error(ErrorKind::dimension, a.data + " holds " + std::to_string(y.num_sensors) + "x" +
                                              std::to_string(y.num_transmissions) + " measurements; the scene has " +
                                              std::to_string(scene.sensors.size()) + " sensors and " +
                                              std::to_string(scene.sources.size()) + " sources");
    std::optional<RealVector> truth;
    if (!a.truth.empty()) truth = read_potential(a.truth, scene.grid);
    const auto mc = a.optim.resolve(y);
    const auto out = prepare_out(a.common.out);
    const Operators ops(scene);

    json extra = {{"method", to_string(mc.method)},
                  {"layers", mc.layers},
                  {"tau", mc.tv.tau},
                  {"max_iter", mc.opt.max_iter},
                  {"stop_tol", mc.opt.stop_tol},
                  {"seed", a.seed},
                  {"data", fs::path(a.data).filename().string()}};
    std::optional<std::span<const double>> tspan;
    if (truth) tspan = std::span<const double>(*truth);
    try {
        const auto rep = run_method(ops, y, mc, tspan);
        write_reconstruction(out, scene, rep, extra);
        std::cout << to_string(rep.method) << " finished after " << rep.iterations << " iterations";
        if (!rep.data_fit.empty()) std::cout << ", data fit " << rep.data_fit.back();
        if (rep.snr_db) std::cout << ", SNR " << *rep.snr_db << " dB";
        std::cout << "\n";
        if (rep.status != "ok") {
            std::cerr << "error: " << rep.status << "\n";
            return kExitConvergence;
        }
    } catch (const DivergenceError& e) {
        ReconstructionReport partial;
        partial.method = mc.method;
        partial.layers = mc.layers;
        partial.tau = mc.tv.tau;
        partial.potential = e.last_finite_iterate();
        partial.status = std::string("diverged: ") + e.what();
        if (partial.potential.size() == scene.grid.size()) write_reconstruction(out, scene, partial, extra);
        throw;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string estimate;
    std::string truth;
    std::string out;
};

int cmd_evaluate(const EvaluateArgs& a) {
    const auto est = read_real_array_file(a.estimate);
    const auto tru = read_real_array_file(a.truth);
    if (est.rows != tru.rows || est.cols != tru.cols)
        throw Error(ErrorKind::dimension, "estimate is " + std::to_string(est.rows) + "x" + std::to_string(est.cols) +
                                              " but truth is " + std::to_string(tru.rows) + "x" +
                                              std::to_string(tru.cols));
    const double snr = snr_db(est.data, tru.data);
    double err = 0.0, sig = 0.0;
    for (std::size_t i = 0; i < est.data.size(); ++i) {
        err += (est.data[i] - tru.data[i]) * (est.data[i] - tru.data[i]);
        sig += tru.data[i] * tru.data[i];
    }
    json j = {{"estimate", a.estimate},
              {"truth", a.truth},
              {"shape", {est.rows, est.cols}},
              {"snr_db", snr},
              {"error_energy", err},
              {"truth_energy", sig}};
    std::cout << "snr_db " << format_double(snr) << "\n";
    if (!a.out.empty()) write_json(prepare_out(a.out) / "evaluation.json", j);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    Common common;
    OptimFlags optim;
    std::string matrix;
    std::vector<double> contrasts{0.05, 0.10, 0.15, 0.20};
    std::vector<std::string> methods{"fb", "am", "rb"};
    std::vector<int> layers_list;
    std::optional<double> noise_snr_db;
    std::uint64_t seed = 0;
};

int cmd_sweep(SweepArgs a) {
    const Scene scene = load_scene(a.common.scene);
    if (!a.matrix.empty()) {
        std::ifstream is(a.matrix);
        if (!is) throw Error(ErrorKind::io, "cannot read " + a.matrix);
        try {
            const auto j = json::parse(is);
            if (j.contains("contrasts")) a.contrasts = j["contrasts"].get<std::vector<double>>();
            if (j.contains("methods")) a.methods = j["methods"].get<std::vector<std::string>>();
            if (j.contains("layers")) a.layers_list = j["layers"].get<std::vector<int>>();
            if (j.contains("tau")) a.optim.tau = j["tau"].is_string() ? j["tau"].get<std::string>()
                                                                      : format_double(j["tau"].get<double>());
            if (j.contains("max_iter")) a.optim.max_iter = j["max_iter"].get<int>();
            if (j.contains("stop_tol")) a.optim.stop_tol = j["stop_tol"].get<double>();
        } catch (const json::exception& e) {
            throw Error(ErrorKind::invalid_input, a.matrix + ": " + e.what());
        }
    }
    SweepConfig cfg;
    cfg.contrasts = a.contrasts;
    cfg.methods.clear();
    for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
    cfg.layers = a.layers_list.empty() ? std::vector<int>{a.optim.layers} : a.layers_list;
    cfg.tau = parse_tau(a.optim.tau);
    cfg.opt.max_iter = a.optim.max_iter;
    cfg.opt.stop_tol = a.optim.stop_tol;
    cfg.am.outer_iters = a.optim.am_outer;
    cfg.am.inner_iters = a.optim.am_inner;
    cfg.sim.noise_snr_db = a.noise_snr_db;
    cfg.sim.seed = a.seed;
    cfg.jobs = a.common.jobs > 0 ? static_cast<std::size_t>(a.common.jobs) : 1;
    const auto out = prepare_out(a.common.out);

    const auto result = run_sweep(scene, cfg, [&](const SweepCell& c) {
        std::cout << percent_label(c.contrast) << " " << method_label(c.method, c.layers) << ": ";
        if (c.ok())
            std::cout << format_snr(&c) << " dB in " << c.report->iterations << " iterations\n";
        else
            std::cout << "failed (" << c.error << ")\n";
        std::cout.flush();
    });

    json cells = json::array();
    for (const auto& c : result.cells) {
        char tag[32];
        std::snprintf(tag, sizeof tag, "c%gpct_", c.contrast * 100.0);
        const std::string name = tag + std::string(to_string(c.method)) +
                                 (c.method == Method::RB ? "_K" + std::to_string(c.layers) : "");
        json entry = {{"contrast", c.contrast},
                      {"method", to_string(c.method)},
                      {"layers", c.layers},
                      {"ok", c.ok()},
                      {"error", c.error}};
        if (c.report) {
            const auto dir = prepare_out((out / name).string());
            write_potential(dir / "f_hat.bin", c.report->potential, scene.grid);
            write_json(dir / "report.json", report_to_json(*c.report));
            write_text(dir / "trace.csv", trace_csv(*c.report));
            entry["dir"] = name;
            entry["report"] = report_to_json(*c.report);
        }
        cells.push_back(entry);
    }
    std::vector<Method> rows = cfg.methods;
    write_text(out / "table.csv", table_csv(result, rows));
    write_text(out / "table.md", table_markdown(result, rows));
    write_text(out / "snr_vs_k.csv", snr_vs_k_csv(result));
    write_json(out / "sweep.json", {{"scene_hash", scene_hash(scene)}, {"cells", cells}});
    std::cout << table_markdown(result, rows);
    return result.succeeded() > 0 ? kExitOk : kExitInput;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D inverse scattering with the recursive Born model"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "generate measurements and the ground-truth potential");
    s->add_option("--scene", sim.common.scene, "scene JSON")->required()->check(CLI::ExistingFile);
    s->add_option("--contrast", sim.contrast, "peak permittivity contrast of the phantom");
    s->add_option("--noise-snr-db", sim.noise_snr_db, "add complex Gaussian noise at this measurement SNR");
    s->add_option("--seed", sim.seed, "noise seed");
    s->add_option("--refine", sim.refine, "simulation grid refinement factor");
    s->add_option("--jobs", sim.common.jobs, "worker threads");
    s->add_option("--out", sim.common.out, "output directory");

    ReconstructArgs rec;
    auto* r = app.add_subcommand("reconstruct", "estimate the potential from measurements");
    r->add_option("--scene", rec.common.scene, "scene JSON")->required()->check(CLI::ExistingFile);
    r->add_option("--data", rec.data, "measurement array (y.bin)")->required()->check(CLI::ExistingFile);
    r->add_option("--truth", rec.truth, "ground-truth potential for SNR reporting")->check(CLI::ExistingFile);
    add_optim_flags(r, rec.optim);
    r->add_option("--seed", rec.seed, "recorded in the manifest; reconstruction itself is deterministic");
    r->add_option("--jobs", rec.common.jobs, "worker threads");
    r->add_option("--out", rec.common.out, "output directory");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "SNR of an estimate against the truth");
    e->add_option("--estimate", ev.estimate, "estimate array")->required()->check(CLI::ExistingFile);
    e->add_option("--truth", ev.truth, "truth array")->required()->check(CLI::ExistingFile);
    e->add_option("--out", ev.out, "directory for evaluation.json");

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "contrast x method x depth experiment matrix");
    w->add_option("--scene", sw.common.scene, "scene JSON")->required()->check(CLI::ExistingFile);
    w->add_option("--matrix", sw.matrix, "JSON with contrasts, methods, layers, tau, max_iter, stop_tol")
        ->check(CLI::ExistingFile);
    w->add_option("--contrasts", sw.contrasts, "contrasts")->delimiter(',');
    w->add_option("--methods", sw.methods, "methods")->delimiter(',');
    w->add_option("--layers-list", sw.layers_list, "RB depths")->delimiter(',');
    add_optim_flags(w, sw.optim);
    w->add_option("--noise-snr-db", sw.noise_snr_db, "measurement noise SNR");
    w->add_option("--seed", sw.seed, "noise seed");
    w->add_option("--jobs", sw.common.jobs, "concurrent sweep cells");
    w->add_option("--out", sw.common.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kExitInput;
    }

    try {
        if (*s) return cmd_simulate(sim);
        if (*r) return cmd_reconstruct(rec);
        if (*e) return cmd_evaluate(ev);
        if (*w) return cmd_sweep(sw);
    } catch (const ConvergenceError& ex) {
        std::cerr << "error [" << to_string(ex.kind()) << "]: " << ex.what() << " (best residual "
                  << ex.best_residual() << ")\n";
        return kExitConvergence;
    } catch (const Error& ex) {
        std::cerr << "error [" << to_string(ex.kind()) << "]: " << ex.what() << "\n";
        return exit_code(ex.kind());
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
