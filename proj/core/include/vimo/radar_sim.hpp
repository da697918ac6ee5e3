#pragma once

// Forward model: chest-wall motion observed by an FMCW radar through a set of
// scattering patches, plus receiver noise and random body movement.

#include <cstdint>
#include <vector>

#include "vimo/common.hpp"
#include "vimo/templates.hpp"

namespace vimo {

/// Chirp and frame parameters of the FMCW waveform.
struct RadarConfig {
    double f_min = 60e9;             // Hz, chirp start frequency
    double bandwidth = 4e9;          // Hz
    double chirp_duration = 60e-6;   // s
    std::uint32_t samples_per_chirp = 256;
    double frame_rate = 20.0;        // Hz, slow-time sampling rate
    std::uint32_t n_frames = 300;
    double noise_std = 0.0;          // complex AWGN std relative to unit reflection amplitude

    double slope() const { return bandwidth / chirp_duration; }
    double lambda_max() const { return kSpeedOfLight / f_min; }
    double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth); }
    double max_range() const { return range_resolution() * samples_per_chirp; }
    /// Fast-time instant of sample k within a chirp.
    double sample_time(std::uint32_t k) const { return chirp_duration * k / samples_per_chirp; }
    /// Wavelength that maps range-bin phase to displacement. The bin phase of
    /// a target follows the mean instantaneous chirp frequency, slightly above f_min.
    double phase_wavelength() const;
    double window_seconds() const { return n_frames / frame_rate; }

    void validate() const;
};

/// One chest patch. Its range over time is
/// base_range + motion_gain * x(t - motion_delay) + rbm(t).
struct ScatterPoint {
    double base_range = 1.0;  // m
    Complex amplitude{1.0, 0.0};
    double motion_gain = 1.0;
    double motion_delay = 0.0;  // s
};

enum class RbmKind { None, Sway, Shake };

/// Random body movement, applied identically to every patch.
struct RbmSpec {
    RbmKind kind = RbmKind::None;
    double amplitude = 0.0;  // m RMS
    Band band{};             // Hz; {0, 0} selects the default band of `kind`
    std::uint64_t seed = 0;

    Band effective_band() const;
    void validate() const;
};

/// How the ground-truth chest displacement is generated.
struct MotionSpec {
    enum class Kind { Template, Sinusoid, Static };
    Kind kind = Kind::Template;
    double amplitude = 0.0;  // m, sinusoid only
    double frequency = 0.0;  // Hz, sinusoid only
};

struct SceneSpec {
    std::vector<ScatterPoint> scatterers;
    TemplateParams truth_params;
    MotionSpec motion;
    RbmSpec rbm;
    std::uint64_t noise_seed = 0;

    void validate(const RadarConfig& config) const;
};

/// Raw IF samples, frames (slow time) x samples per chirp (fast time).
struct IFDataCube {
    ComplexMatrix samples;
    RadarConfig config;

    void validate() const;
};

struct Simulation {
    IFDataCube cube;
    DisplacementSeries truth;  // noiseless chest displacement x(t_m), without RBM
    ChestWaveforms truth_components;  // respiration / heartbeat parts (template motion only)
};

/// Chest displacement x(t) of the scene's motion model.
double scene_motion(const SceneSpec& scene, double t, const TemplateBank& bank = TemplateBank::standard());

DisplacementSeries make_rbm(const RbmSpec& spec, double frame_rate, std::size_t n_frames);

Simulation synthesize_if_cube(const SceneSpec& scene, const RadarConfig& config,
                              const TemplateBank& bank = TemplateBank::standard());

/// Layout of a torso facing the radar, split into patches across its width.
struct ChestGeometry {
    double width = 0.6;         // m
    int patches = 7;
    double max_delay = 0.05;    // s, lag of the outermost patches behind the centre
    double edge_gain = 0.8;     // motion gain of the outermost patches
};

/// Patches at lateral offsets across the torso, each at range sqrt(d^2 + x^2),
/// with amplitude falling off as (d / R)^2 and a fixed per-patch phase.
/// Gain and delay depend on |x| only, so mirror patches move together.
SceneSpec make_chest_scene(double distance, const TemplateParams& truth, const ChestGeometry& geometry = {});

/// Noise std giving the requested per-sample SNR against the total patch power.
double noise_std_for_snr(const SceneSpec& scene, double snr_db);

/// Range extent of the scene in bins: (max - min base range) / range
/// resolution, rounded, at least 1.
std::size_t occupied_bins(const SceneSpec& scene, const RadarConfig& config);

}  // namespace vimo
