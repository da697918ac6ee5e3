// vimo: simulate IF cubes, extract vital signs, run method ablations.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "vimo/io.hpp"

namespace fs = std::filesystem;
using namespace vimo;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string method;
    std::string out = ".";
    std::string cube;
};

io::RunConfig load(const Options& o) {
    io::RunConfig cfg = o.config.empty() ? io::parse_run_config("{}", "<defaults>") : io::load_run_config(o.config);
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.ablation.master_seed = *o.seed;
    }
    if (!o.method.empty()) cfg.method = method_from_string(o.method);
    return cfg;
}

fs::path out_dir(const Options& o) {
    fs::path dir(o.out);
    fs::create_directories(dir);
    return dir;
}

unsigned thread_cap() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("VIMO_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || v == 0) throw DomainError(std::string("VIMO_THREADS must be a positive integer, got '") + env + "'");
        n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

int cmd_simulate(const Options& o) {
    const io::RunConfig cfg = load(o);
    const std::uint64_t hash = io::config_hash(cfg);
    const SceneSpec scene = io::build_scene(cfg);
    const RadarConfig radar = io::build_radar(cfg, scene);
    const Simulation sim = synthesize_if_cube(scene, radar);

    const fs::path dir = out_dir(o);
    io::write_cube_file((dir / "cube.vimo").string(), sim.cube, hash);
    io::write_text_file((dir / "truth.csv").string(), io::truth_csv(sim, hash));
    io::write_text_file((dir / "truth.json").string(), io::truth_json(cfg, scene, sim, hash));
    io::write_text_file((dir / "config.json").string(), io::canonical_json(cfg));

    std::printf("simulate: %u frames x %u samples, %zu scatterers in %zu range bins, snr %s\n", radar.n_frames,
                radar.samples_per_chirp, scene.scatterers.size(), occupied_bins(scene, radar),
                cfg.scene.snr_db ? (std::to_string(*cfg.scene.snr_db) + " dB").c_str() : "noiseless");
    if (scene.motion.kind == MotionSpec::Kind::Template)
        std::printf("truth: resp %.2f bpm, heart %.2f bpm\n", 60.0 / scene.truth_params.T_res, 60.0 / scene.truth_params.T_h);
    std::printf("config hash %s, wrote %s\n", io::hash_hex(hash).c_str(), dir.string().c_str());
    return 0;
}

int cmd_extract(const Options& o) {
    const io::RunConfig cfg = load(o);
    const io::CubeFile cube = io::read_cube_file(o.cube);
    const std::uint64_t hash =
        io::fnv1a64(io::canonical_json(cfg) + io::hash_hex(cube.config_hash));

    const PipelineResult r = run_pipeline(cube.cube, cfg.method, cfg.pipeline);
    const fs::path dir = out_dir(o);
    io::write_text_file((dir / "result.json").string(), io::result_json(r, cfg, hash));
    io::write_text_file((dir / "series.csv").string(), io::series_csv(r, hash));

    std::printf("extract (%s): resp %.2f bpm, heart %.2f bpm from %zu bin(s)\n", to_string(r.method), r.resp_bpm,
                r.heart_bpm, r.selection.msp_bins.size());
    for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
    std::printf("config hash %s, wrote %s\n", io::hash_hex(hash).c_str(), dir.string().c_str());
    return 0;
}

int cmd_ablate(const Options& o) {
    const io::RunConfig cfg = load(o);
    const std::uint64_t hash = io::config_hash(cfg);
    const AblationReport report = run_ablation(cfg.ablation, cfg.radar, cfg.pipeline, thread_cap());

    const fs::path dir = out_dir(o);
    io::write_text_file((dir / "trials.csv").string(), io::trials_csv(report, hash));
    io::write_text_file((dir / "summary.json").string(), io::summary_json(report, cfg, hash));
    io::write_text_file((dir / "boxplot.csv").string(), io::boxplot_csv(report, hash));

    std::size_t failures = 0;
    for (const auto& c : report.cells) failures += c.failures;
    std::printf("ablate: %zu trials, %zu cells, %zu failed estimates\n", report.trials.size(), report.cells.size(),
                failures);
    std::printf("%-6s %-6s %-14s %10s %10s\n", "range", "rbm", "method", "resp_med%", "heart_med%");
    for (const auto& c : report.cells)
        std::printf("%-6.2f %-6s %-14s %10.2f %10.2f\n", c.range_m, to_string(c.rbm), to_string(c.method),
                    c.resp_error.median, c.heart_error.median);
    std::printf("config hash %s, wrote %s\n", io::hash_hex(hash).c_str(), dir.string().c_str());
    return 0;
}

void common_flags(CLI::App* sub, Options& o, bool with_method) {
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed (overrides the config)");
    if (with_method) sub->add_option("--method", o.method, "pivimo | msp-fft | bin-tm | bin-fft");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vimo: radar vital-sign simulation and extraction"};
    app.require_subcommand(1);
    Options o;

    auto* sim = app.add_subcommand("simulate", "render an IF cube and its ground truth");
    common_flags(sim, o, false);
    auto* ext = app.add_subcommand("extract", "estimate respiration and heart rate from an IF cube");
    ext->add_option("cube", o.cube, "IF cube file")->required();
    common_flags(ext, o, true);
    auto* abl = app.add_subcommand("ablate", "compare the four methods over ranges and body movements");
    common_flags(abl, o, false);

    CLI11_PARSE(app, argc, argv);
    try {
        if (sim->parsed()) return cmd_simulate(o);
        if (ext->parsed()) return cmd_extract(o);
        if (abl->parsed()) return cmd_ablate(o);
    } catch (const FormatError& e) {
        std::fprintf(stderr, "format error: %s\n", e.what());
        return 2;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
