#include "qholo/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "qholo/hash.hpp"
#include "qholo/holography.hpp"
#include "qholo/montecarlo.hpp"
#include "qholo/oracle.hpp"

namespace qholo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ArtifactSink {
    fs::path dir;
    json entries = json::object();
    std::vector<std::string> names;

    void note(const std::string& name) {
        std::ifstream is(dir / name, std::ios::binary);
        if (!is) throw IoError("artifact vanished: " + name);
        std::ostringstream os;
        os << is.rdbuf();
        entries[name] = "fnv1a:" + hex_digest(fnv1a(os.str()));
        names.push_back(name);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(ArtifactSink& sink, const std::string& subcommand,
                    const ExperimentConfig& cfg, const json& inputs,
                    const json& error = json()) {
    // Execution knobs do not change artifacts, so they are normalized out of
    // the experiment identity and recorded next to the timestamp instead.
    ExperimentConfig experiment = cfg;
    experiment.threads = 1;
    experiment.out_dir.clear();

    json m;
    m["artifacts"] = sink.entries;
    m["config"] = experiment.canonical_text();
    m["config_hash"] = "fnv1a:" + hex_digest(fnv1a(experiment.canonical_text()));
    m["inputs"] = inputs;
    m["run"] = {{"subcommand", subcommand},
                {"seed", cfg.mc_seed},
                {"n", cfg.mc_n},
                {"rng", cfg.rng_name}};
    m["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    if (!error.is_null()) m["error"] = error;
    // The only non-reproducible section; comparisons must ignore it.
    m["excluded"] = {{"timestamp", timestamp_utc()}, {"threads", cfg.threads}};
    std::ofstream os(sink.dir / "manifest.json", std::ios::binary);
    if (!os) throw IoError("cannot write manifest.json");
    os << m.dump(2) << "\n";
}

json scene_inputs(const Scene& scene, const PumpProfile& pump) {
    return {{"scene_hash", "fnv1a:" + hex_digest(scene.hash())},
            {"pump_hash", "fnv1a:" + hex_digest(field_hash(pump.zeta))},
            {"wall_mask_hash", "fnv1a:" + hex_digest(mask_hash(scene.wall()))}};
}

void save_signed_csv(const std::string& path, const GridSpec& g, const Eigen::VectorXd& v) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    char buf[128];
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            if (g.ndim == 1)
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", g.coord_x(ix),
                              v[g.index(ix, iy)]);
            else
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", g.coord_x(ix),
                              g.coord_y(iy), v[g.index(ix, iy)]);
            os << buf;
        }
}

RunOutcome run_simulate(const ExperimentConfig& cfg, ArtifactSink& sink) {
    Scene scene = cfg.build_scene();
    PumpProfile pump = cfg.build_pump();
    OpticalSystem h2 = cfg.build_detector_arm();
    Hologram h = record_hologram(scene, pump, h2, cfg.threads);
    save_hologram_csv(sink.path("hologram.csv"), h);
    sink.note("hologram.csv");
    save_hologram_qhf1(sink.path("hologram.qhf"), h);
    sink.note("hologram.qhf");
    write_manifest(sink, "simulate", cfg, scene_inputs(scene, pump));
    return {kExitOk, sink.names, "hologram written"};
}

RunOutcome run_decompose(const ExperimentConfig& cfg, ArtifactSink& sink) {
    Scene scene = cfg.build_scene();
    PumpProfile pump = cfg.build_pump();
    OpticalSystem h2 = cfg.build_detector_arm();
    DecompositionResult d = hologram_decomposition(scene, pump, h2, cfg.threads);

    save_hologram_csv(sink.path("p0.csv"), d.direct_term);
    sink.note("p0.csv");
    save_hologram_csv(sink.path("pscatter.csv"), d.scatter_term);
    sink.note("pscatter.csv");
    save_signed_csv(sink.path("interference.csv"), h2.output_grid(), d.interference);
    sink.note("interference.csv");

    json terms = json::object();
    terms["coupling"] = json::array();
    terms["illumination_amplitude"] = json::array();
    for (std::size_t j = 0; j < d.coupling.size(); ++j) {
        terms["coupling"].push_back({d.coupling[j].real(), d.coupling[j].imag()});
        terms["illumination_amplitude"].push_back(
            {d.illumination[j].real(), d.illumination[j].imag()});
    }
    terms["wall_overlap"] = json::array();
    for (int i = 0; i < d.wall_overlap.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < d.wall_overlap.cols(); ++j)
            row.push_back({d.wall_overlap(i, j).real(), d.wall_overlap(i, j).imag()});
        terms["wall_overlap"].push_back(row);
    }
    {
        std::ofstream os(sink.path("decomposition.json"), std::ios::binary);
        os << terms.dump(2) << "\n";
    }
    sink.note("decomposition.json");
    write_manifest(sink, "decompose", cfg, scene_inputs(scene, pump));
    return {kExitOk, sink.names, "decomposition written"};
}

RunOutcome run_reconstruct(const ExperimentConfig& cfg, ArtifactSink& sink) {
    Scene scene = cfg.build_scene();
    PumpProfile pump = cfg.build_pump();
    OpticalSystem h2 = cfg.build_detector_arm();
    Hologram holo = record_hologram(scene, pump, h2, cfg.threads);

    const Hologram* baseline = nullptr;
    Hologram p0;
    if (cfg.dc_mode == DcMode::SubtractP0) {
        // Scene-free baseline: same chamber, no scatterers (oracle-assisted mode).
        Scene empty = Scene::from_geometry(cfg.geometry(), cfg.source_grid, cfg.wall_grid,
                                           cfg.build_wall_mask(), {});
        p0 = record_hologram(empty, pump, h2, cfg.threads);
        baseline = &p0;
    }

    ReconstructionResult rec = gabor_reconstruct(holo, cfg.build_backprop_optics(),
                                                 cfg.depths, cfg.dc_mode, baseline, 8,
                                                 cfg.threads);
    for (std::size_t k = 0; k < rec.slices.size(); ++k) {
        const std::string stem = "slice_" + std::to_string(k);
        save_slice_pgm(sink.path(stem + ".pgm"), rec.slices[k]);
        sink.note(stem + ".pgm");
        sink.note(stem + ".pgm.scale.txt");
        save_qhf1(sink.path(stem + ".qhf"), rec.slices[k]);
        sink.note(stem + ".qhf");
    }
    save_peaks_csv(sink.path("peaks.csv"), rec.peaks, cfg.source_grid);
    sink.note("peaks.csv");

    json inputs = scene_inputs(scene, pump);
    inputs["dc_mode"] = to_string(cfg.dc_mode);
    // subtract_p0 uses the scene-free forward model as its baseline
    inputs["dc_baseline"] =
        cfg.dc_mode == DcMode::SubtractP0 ? "oracle-assisted" : "data-only";
    write_manifest(sink, "reconstruct", cfg, inputs);
    return {kExitOk, sink.names, "reconstruction written"};
}

RunOutcome run_montecarlo(const ExperimentConfig& cfg, ArtifactSink& sink) {
    Scene scene = cfg.build_scene();
    PumpProfile pump = cfg.build_pump();
    OpticalSystem h2 = cfg.build_detector_arm();

    BiphotonAmplitude amp = biphoton_amplitude(pump, effective_h1(scene), h2);
    CoincidenceMap joint = coincidence_rate(amp);
    EventStream events = sample_pairs(joint, scene.wall(), cfg.mc_n, cfg.mc_seed,
                                      cfg.threads);
    HistogramEstimate hist = bucket_histogram(events, cfg.detector_grid);
    Hologram truth = marginal_hologram(joint, scene.wall());
    ConvergenceReport rep = convergence_report(hist, truth);

    save_qhe1(sink.path("events.qhe"), events);
    sink.note("events.qhe");
    save_histogram_csv(sink.path("histogram.csv"), hist);
    sink.note("histogram.csv");
    {
        json r = {{"l1_distance", rep.l1_distance},
                  {"n", rep.n},
                  {"seed", cfg.mc_seed},
                  {"rng", cfg.rng_name}};
        std::ofstream os(sink.path("convergence.json"), std::ios::binary);
        os << r.dump(2) << "\n";
    }
    sink.note("convergence.json");
    write_manifest(sink, "montecarlo", cfg, scene_inputs(scene, pump));
    return {kExitOk, sink.names, "events written"};
}

RunOutcome run_oracle_check(const ExperimentConfig& cfg, ArtifactSink& sink) {
    auto results = oracle::run_check_battery(cfg.tolerance_scale);

    // Probe the configured scene's effective arm-1 system to a dense kernel,
    // publish it in the QHK1 interchange format, and verify the float32
    // round-trip against the in-memory kernel.
    {
        Scene scene = cfg.build_scene();
        OracleBudget budget;
        DenseKernel k1 = to_dense(effective_h1(scene), budget);
        {
            std::ofstream os(sink.path("h1_dense.qhk"), std::ios::binary);
            write_qhk1(os, k1.k);
        }
        std::ifstream is(sink.path("h1_dense.qhk"), std::ios::binary);
        Eigen::MatrixXcd back = read_qhk1(is);
        const double scale = k1.k.cwiseAbs().maxCoeff();
        const double res = (back - k1.k).cwiseAbs().maxCoeff() / scale;
        results.push_back(
            oracle::CheckResult{"QHK1 dense-kernel round-trip (float32)", res,
                                1e-6 * cfg.tolerance_scale});
        sink.note("h1_dense.qhk");
    }

    bool all_pass = true;
    std::ostringstream report;
    json jr = json::array();
    for (const auto& r : results) {
        all_pass = all_pass && r.pass();
        char line[256];
        std::snprintf(line, sizeof(line), "[%s] %s: max residual %.3e (tolerance %.3e)\n",
                      r.pass() ? "PASS" : "FAIL", r.name.c_str(), r.residual, r.tolerance);
        report << line;
        jr.push_back({{"name", r.name},
                      {"residual", r.residual},
                      {"tolerance", r.tolerance},
                      {"pass", r.pass()}});
    }
    {
        std::ofstream os(sink.path("oracle_report.txt"), std::ios::binary);
        os << report.str();
    }
    sink.note("oracle_report.txt");
    {
        std::ofstream os(sink.path("oracle_report.json"), std::ios::binary);
        os << jr.dump(2) << "\n";
    }
    sink.note("oracle_report.json");

    json err;
    if (!all_pass) err = {{"code", "tolerance"}, {"message", "oracle residual above tolerance"}};
    write_manifest(sink, "oracle-check", cfg, json::object(), err);
    std::fputs(report.str().c_str(), stdout);
    return {all_pass ? kExitOk : kExitTolerance, sink.names,
            all_pass ? "all oracle identities hold" : "oracle tolerance failure"};
}

} // namespace

bool is_known_subcommand(const std::string& name) {
    return name == "simulate" || name == "decompose" || name == "reconstruct" ||
           name == "montecarlo" || name == "oracle-check";
}

RunOutcome run_subcommand(const std::string& name, const ExperimentConfig& cfg,
                          const std::string& out_dir) {
    if (!is_known_subcommand(name))
        throw DegenerateInputError("unknown subcommand '" + name + "'");

    ArtifactSink sink;
    sink.dir = out_dir.empty() ? fs::path("qholo_out") : fs::path(out_dir);
    fs::create_directories(sink.dir);

    try {
        if (name == "simulate") return run_simulate(cfg, sink);
        if (name == "decompose") return run_decompose(cfg, sink);
        if (name == "reconstruct") return run_reconstruct(cfg, sink);
        if (name == "montecarlo") return run_montecarlo(cfg, sink);
        return run_oracle_check(cfg, sink);
    } catch (const std::exception& e) {
        // Validation-type failures: record a machine-readable error manifest.
        write_manifest(sink, name, cfg, json::object(),
                       {{"code", "validation"}, {"message", e.what()}});
        return {kExitValidation, sink.names, e.what()};
    }
}

} // namespace qholo
