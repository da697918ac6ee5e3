#include "vimo/radar_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "vimo/dsp.hpp"

namespace vimo {

double RadarConfig::phase_wavelength() const {
    const double mean_t = chirp_duration * (samples_per_chirp - 1.0) / (2.0 * samples_per_chirp);
    return kSpeedOfLight / (f_min + slope() * mean_t);
}

void RadarConfig::validate() const {
    if (!(f_min > 0.0)) throw DomainError("radar f_min must be > 0");
    if (!(bandwidth > 0.0)) throw DomainError("radar bandwidth must be > 0");
    if (!(chirp_duration > 0.0)) throw DomainError("radar chirp_duration must be > 0");
    if (samples_per_chirp < 2) throw DomainError("radar samples_per_chirp must be >= 2");
    if (!(frame_rate > 0.0)) throw DomainError("radar frame_rate must be > 0");
    if (n_frames < 2) throw DomainError("radar n_frames must be >= 2");
    if (!(noise_std >= 0.0)) throw DomainError("radar noise_std must be >= 0");
}

Band RbmSpec::effective_band() const {
    if (band.low == 0.0 && band.high == 0.0) {
        switch (kind) {
            case RbmKind::Sway: return {0.05, 0.3};
            case RbmKind::Shake: return {2.0, 5.0};
            case RbmKind::None: return {};
        }
    }
    return band;
}

void RbmSpec::validate() const {
    if (!(amplitude >= 0.0)) throw DomainError("rbm amplitude must be >= 0");
    const Band b = effective_band();
    if (kind != RbmKind::None && !(b.low >= 0.0 && b.low < b.high))
        throw DomainError("rbm band must satisfy 0 <= low < high");
}

void SceneSpec::validate(const RadarConfig& config) const {
    if (scatterers.empty()) throw DomainError("scene needs at least one scatterer");
    for (const auto& s : scatterers) {
        if (!(s.base_range > 0.0 && s.base_range < config.max_range())) {
            std::ostringstream msg;
            msg << "scatterer base_range = " << s.base_range << " outside (0, " << config.max_range() << ")";
            throw DomainError(msg.str());
        }
        if (!(std::abs(s.motion_delay) <= 0.25)) throw DomainError("scatterer |motion_delay| must be <= 0.25 s");
        if (!(s.motion_gain >= 0.0 && s.motion_gain <= 1.0)) throw DomainError("scatterer motion_gain must lie in [0, 1]");
    }
    if (motion.kind == MotionSpec::Kind::Template) ParamBounds{}.check(truth_params);
    rbm.validate();
}

void IFDataCube::validate() const {
    config.validate();
    if (samples.rows() != config.n_frames || samples.cols() != config.samples_per_chirp)
        throw FormatError("IF cube shape does not match its radar config");
    for (const Complex& z : samples.data())
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw FormatError("IF cube holds non-finite samples");
}

double scene_motion(const SceneSpec& scene, double t, const TemplateBank& bank) {
    switch (scene.motion.kind) {
        case MotionSpec::Kind::Template: return evaluate_chest(scene.truth_params, bank, t).chest;
        case MotionSpec::Kind::Sinusoid:
            return scene.motion.amplitude * std::sin(2.0 * kPi * scene.motion.frequency * t);
        case MotionSpec::Kind::Static: return 0.0;
    }
    return 0.0;
}

DisplacementSeries make_rbm(const RbmSpec& spec, double frame_rate, std::size_t n_frames) {
    spec.validate();
    DisplacementSeries out;
    out.frame_rate = frame_rate;
    out.values.assign(n_frames, 0.0);
    if (spec.kind == RbmKind::None || spec.amplitude == 0.0 || n_frames < 2) return out;

    const Band band = spec.effective_band();
    if (band.high > frame_rate / 2.0) {
        std::ostringstream msg;
        msg << "rbm band high edge " << band.high << " Hz above nyquist " << frame_rate / 2.0 << " Hz";
        throw DomainError(msg.str());
    }

    // Gaussian spectrum restricted to the band, Hermitian so the series is real.
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t n = n_frames;
    std::vector<Complex> spec_bins(n);
    std::size_t used = 0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) * frame_rate / static_cast<double>(n);
        const double re = gauss(rng), im = gauss(rng);
        if (!band.contains(f)) continue;
        ++used;
        if (2 * k == n) {
            spec_bins[k] = {re, 0.0};
        } else {
            spec_bins[k] = {re, im};
            spec_bins[n - k] = std::conj(spec_bins[k]);
        }
    }
    if (used == 0) throw DomainError("rbm band contains no frequency bin of the window");

    const auto series = fft::inverse(spec_bins);
    double ss = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        out.values[m] = series[m].real();
        ss += out.values[m] * out.values[m];
    }
    const double rms = std::sqrt(ss / static_cast<double>(n));
    for (double& v : out.values) v *= spec.amplitude / rms;
    return out;
}

Simulation synthesize_if_cube(const SceneSpec& scene, const RadarConfig& config, const TemplateBank& bank) {
    config.validate();
    scene.validate(config);

    const std::size_t M = config.n_frames;
    const std::size_t K = config.samples_per_chirp;
    const double fs = config.frame_rate;
    const double range_to_phase = 4.0 * kPi / config.lambda_max();
    const double range_to_beat = 4.0 * kPi * config.slope() / kSpeedOfLight;

    Simulation sim;
    sim.truth.frame_rate = fs;
    sim.truth.values.resize(M);
    for (std::size_t m = 0; m < M; ++m) sim.truth.values[m] = scene_motion(scene, static_cast<double>(m) / fs, bank);
    if (scene.motion.kind == MotionSpec::Kind::Template)
        sim.truth_components = render_template(scene.truth_params, bank, fs, M);

    const DisplacementSeries rbm = make_rbm(scene.rbm, fs, M);

    std::vector<double> t_k(K);
    for (std::uint32_t k = 0; k < K; ++k) t_k[k] = config.sample_time(k);

    sim.cube.config = config;
    sim.cube.samples = ComplexMatrix(M, K);
    for (std::size_t m = 0; m < M; ++m) {
        const double t = static_cast<double>(m) / fs;
        Complex* row = sim.cube.samples.row(m);
        for (const ScatterPoint& sp : scene.scatterers) {
            const double range =
                sp.base_range + sp.motion_gain * scene_motion(scene, t - sp.motion_delay, bank) + rbm.values[m];
            const double phase0 = range_to_phase * range;
            const double beat = range_to_beat * range;
            for (std::size_t k = 0; k < K; ++k) row[k] += sp.amplitude * std::polar(1.0, phase0 + beat * t_k[k]);
        }
    }

    if (config.noise_std > 0.0) {
        std::mt19937_64 rng(scene.noise_seed);
        std::normal_distribution<double> gauss(0.0, config.noise_std / std::sqrt(2.0));
        for (Complex& z : sim.cube.samples.data()) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            z += Complex(re, im);
        }
    }
    return sim;
}

SceneSpec make_chest_scene(double distance, const TemplateParams& truth, const ChestGeometry& geometry) {
    if (!(distance > 0.0)) throw DomainError("chest distance must be > 0");
    if (geometry.patches < 1) throw DomainError("chest geometry needs at least one patch");
    SceneSpec scene;
    scene.truth_params = truth;
    const double half = geometry.width / 2.0;
    // Golden-angle phases give distinct, reproducible reflection phases per patch.
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < geometry.patches; ++j) {
        // Symmetric in j so mirror patches get bit-identical parameters.
        const int k = 2 * j - (geometry.patches - 1);
        const double lateral = geometry.patches == 1 ? 0.0 : half * k / static_cast<double>(geometry.patches - 1);
        const double frac = half > 0.0 ? lateral / half : 0.0;
        ScatterPoint sp;
        sp.base_range = std::hypot(distance, lateral);
        const double falloff = (distance / sp.base_range) * (distance / sp.base_range);
        sp.amplitude = std::polar(falloff, golden * j);
        sp.motion_gain = 1.0 - (1.0 - geometry.edge_gain) * std::abs(frac);
        sp.motion_delay = geometry.max_delay * std::abs(frac);
        scene.scatterers.push_back(sp);
    }
    return scene;
}

double noise_std_for_snr(const SceneSpec& scene, double snr_db) {
    double power = 0.0;
    for (const auto& s : scene.scatterers) power += std::norm(s.amplitude);
    return std::sqrt(power / std::pow(10.0, snr_db / 10.0));
}

std::size_t occupied_bins(const SceneSpec& scene, const RadarConfig& config) {
    if (scene.scatterers.empty()) return 0;
    const auto [lo, hi] = std::minmax_element(scene.scatterers.begin(), scene.scatterers.end(),
                                              [](const ScatterPoint& a, const ScatterPoint& b) {
                                                  return a.base_range < b.base_range;
                                              });
    const long n = std::lround((hi->base_range - lo->base_range) / config.range_resolution());
    return static_cast<std::size_t>(std::max(1L, n));
}

}  // namespace vimo
