#pragma once

// File formats: the binary IF cube, JSON run configuration and the CSV/JSON
// reports written by the command-line tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vimo/ablation.hpp"
#include "vimo/pipeline.hpp"
#include "vimo/radar_sim.hpp"

namespace vimo::io {

std::uint64_t fnv1a64(std::string_view bytes);
/// 16 lowercase hex digits.
std::string hash_hex(std::uint64_t h);

/// Little-endian cube file: 64-byte header ("VIMO", version, M, K,
/// frame_rate, f_min, bandwidth, chirp_duration, config hash, padding)
/// followed by M x K interleaved float32 (re, im).
inline constexpr std::uint32_t kCubeVersion = 1;
inline constexpr std::size_t kCubeHeaderBytes = 64;

struct CubeFile {
    IFDataCube cube;
    std::uint64_t config_hash = 0;
};

void write_cube(std::ostream& out, const IFDataCube& cube, std::uint64_t config_hash = 0);
/// Throws FormatError on a bad magic, unknown version or truncated payload.
CubeFile read_cube(std::istream& in);
void write_cube_file(const std::string& path, const IFDataCube& cube, std::uint64_t config_hash = 0);
CubeFile read_cube_file(const std::string& path);

/// What `simulate` renders.
struct SceneConfig {
    enum class Kind { Chest, Points };
    Kind kind = Kind::Chest;
    double distance = 0.3;  // m, chest scenes
    ChestGeometry geometry;
    std::vector<ScatterPoint> scatterers;  // point scenes
    TemplateParams truth = TemplateParams::reference_example();
    MotionSpec motion;
    RbmSpec rbm;                    // seed is derived from the run seed
    std::optional<double> snr_db;   // none = noiseless
};

struct RunConfig {
    std::uint64_t seed = 1;
    Method method = Method::Pivimo;
    RadarConfig radar;
    SceneConfig scene;
    PipelineConfig pipeline;
    AblationGrid ablation;  // master_seed follows `seed`

    void validate() const;
};

/// Parses a JSON run configuration. Missing keys keep their defaults;
/// unknown keys and wrong types are errors. Messages carry `source` and
/// either line:column (syntax) or the key path (content).
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::string& path);

/// Every field of the configuration, keys sorted, two-space indent.
std::string canonical_json(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

/// Scene with noise and movement seeds derived from cfg.seed.
SceneSpec build_scene(const RunConfig& cfg);
/// Radar configuration with the noise level implied by scene.snr_db.
RadarConfig build_radar(const RunConfig& cfg, const SceneSpec& scene);

// Report writers. Every output names the config hash; non-finite numbers
// are written as null (JSON) or nan (CSV).

/// time_s, displacement_m, respiration_m, heartbeat_m
std::string truth_csv(const Simulation& sim, std::uint64_t hash);
std::string truth_json(const RunConfig& cfg, const SceneSpec& scene, const Simulation& sim, std::uint64_t hash);
/// time_s, displacement_m, respiration_m, heartbeat_m of a pipeline result.
std::string series_csv(const PipelineResult& result, std::uint64_t hash);
std::string result_json(const PipelineResult& result, const RunConfig& cfg, std::uint64_t hash);
std::string trials_csv(const AblationReport& report, std::uint64_t hash);
std::string summary_json(const AblationReport& report, const RunConfig& cfg, std::uint64_t hash);
/// One row per (range, rbm, method, metric) with min, q1, median, q3, max.
std::string boxplot_csv(const AblationReport& report, std::uint64_t hash);

/// Writes `contents` to `path`, replacing it. Throws std::runtime_error with the path.
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace vimo::io
