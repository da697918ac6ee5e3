#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "vimo/preprocess.hpp"
#include "vimo/radar_sim.hpp"

using namespace vimo;

namespace {

SceneSpec point_scene(double range, MotionSpec motion = {MotionSpec::Kind::Static, 0.0, 0.0}) {
    SceneSpec s;
    s.scatterers.push_back(ScatterPoint{range, {1.0, 0.0}, 1.0, 0.0});
    s.motion = motion;
    return s;
}

std::size_t argmax_abs(const Complex* row, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(row[i]) > std::abs(row[best])) best = i;
    return best;
}

}  // namespace

TEST_SUITE("radar_sim") {

TEST_CASE("radar config derived quantities") {
    RadarConfig c;
    CHECK(c.slope() == doctest::Approx(4e9 / 60e-6));
    CHECK(c.lambda_max() == doctest::Approx(0.005));
    CHECK(c.range_resolution() == doctest::Approx(0.0375));
    CHECK(c.window_seconds() == doctest::Approx(15.0));
    // Mean instantaneous frequency over the sampled chirp.
    const double f_mean = 60e9 + 4e9 * 255.0 / 512.0;
    CHECK(c.phase_wavelength() == doctest::Approx(3e8 / f_mean).epsilon(1e-12));
    c.n_frames = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("IF samples match the mixing model sample by sample") {
    RadarConfig c;
    c.n_frames = 4;
    const double R = 1.234;
    const auto sim = synthesize_if_cube(point_scene(R), c);
    const auto ref = oracle::if_chirp(R, c.f_min, c.slope(), c.chirp_duration, c.samples_per_chirp);
    for (std::size_t m = 0; m < c.n_frames; ++m)
        for (std::size_t k = 0; k < c.samples_per_chirp; ++k)
            REQUIRE(std::abs(sim.cube.samples(m, k) - ref[k]) < 1e-9);
}

TEST_CASE("static target: identical frames, peak at round(R / R_res)") {
    RadarConfig c;
    const auto sim = synthesize_if_cube(point_scene(2.0), c);
    for (std::size_t m = 1; m < c.n_frames; ++m)
        for (std::size_t k = 0; k < c.samples_per_chirp; ++k) REQUIRE(sim.cube.samples(m, k) == sim.cube.samples(0, k));
    const auto map = range_fft(sim.cube);
    CHECK(argmax_abs(map.bins.row(0), map.n_bins()) == static_cast<std::size_t>(std::lround(2.0 / 0.0375)));
}

TEST_CASE("sinusoidal motion: peak-bin phase follows the DFT phase oracle") {
    RadarConfig c;
    const double R0 = 1.0, A = 1e-3, f = 0.3;
    const auto sim = synthesize_if_cube(point_scene(R0, {MotionSpec::Kind::Sinusoid, A, f}), c);
    const auto map = range_fft(sim.cube);
    const std::size_t bin = argmax_abs(map.bins.row(0), map.n_bins());
    const auto ph = extract_phase(map, bin);

    // Naive DFT of the analytic IF chirp at the same bin, unwrapped by hand.
    std::vector<double> ref(c.n_frames);
    for (std::size_t m = 0; m < c.n_frames; ++m) {
        const double R = R0 + A * std::sin(2.0 * oracle::kPi * f * m / c.frame_rate);
        const auto chirp = oracle::if_chirp(R, c.f_min, c.slope(), c.chirp_duration, c.samples_per_chirp);
        oracle::cd s = 0.0;
        for (std::size_t k = 0; k < chirp.size(); ++k)
            s += chirp[k] * std::polar(1.0, -2.0 * oracle::kPi * static_cast<double>(bin * k) / chirp.size());
        ref[m] = std::arg(s);
        if (m > 0)
            while (ref[m] - ref[m - 1] > oracle::kPi) ref[m] -= 2 * oracle::kPi;
        if (m > 0)
            while (ref[m] - ref[m - 1] < -oracle::kPi) ref[m] += 2 * oracle::kPi;
    }
    double mean = 0.0;
    for (double v : ref) mean += v;
    mean /= ref.size();
    for (std::size_t m = 0; m < c.n_frames; ++m) REQUIRE(std::abs(ph.values[m] - (ref[m] - mean)) < 1e-9);

    // And the phase is 4 pi x / lambda with the mean chirp wavelength.
    double xm = 0.0;
    std::vector<double> x(c.n_frames);
    for (std::size_t m = 0; m < c.n_frames; ++m) xm += x[m] = A * std::sin(2.0 * oracle::kPi * f * m / c.frame_rate);
    xm /= c.n_frames;
    for (std::size_t m = 0; m < c.n_frames; ++m)
        REQUIRE(std::abs(ph.values[m] - 4.0 * oracle::kPi * (x[m] - xm) / c.phase_wavelength()) < 1e-9);
}

TEST_CASE("two scatterers one bin apart: phase lag equals the motion delay") {
    RadarConfig c;
    SceneSpec s;
    s.motion = {MotionSpec::Kind::Template, 0.0, 0.0};
    s.truth_params.A_res = 2e-3;
    s.truth_params.T_res = 3.5;
    s.truth_params.A_h = 1e-4;
    s.truth_params.T_h = 0.8;
    s.scatterers = {ScatterPoint{0.30, {1.0, 0.0}, 1.0, 0.0}, ScatterPoint{0.345, {1.0, 0.0}, 1.0, 0.05}};
    const auto map = range_fft(synthesize_if_cube(s, c).cube);
    const auto a = extract_phase(map, 8).values;
    const auto b = extract_phase(map, 9).values;
    const auto x = oracle::brute_xcorr(a, b, 20);
    CHECK(std::abs(x.lag - 1) <= 1);
}

TEST_CASE("superposition: two-scatterer cube is the sum of single-scatterer cubes") {
    RadarConfig c;
    c.n_frames = 40;
    SceneSpec a = point_scene(0.7, {MotionSpec::Kind::Sinusoid, 1e-3, 0.25});
    SceneSpec b = a;
    b.scatterers = {ScatterPoint{1.1, {0.3, -0.4}, 0.8, 0.1}};
    SceneSpec ab = a;
    ab.scatterers.push_back(b.scatterers[0]);
    const auto ca = synthesize_if_cube(a, c).cube.samples;
    const auto cb = synthesize_if_cube(b, c).cube.samples;
    const auto cab = synthesize_if_cube(ab, c).cube.samples;
    for (std::size_t i = 0; i < cab.data().size(); ++i) REQUIRE(cab.data()[i] == ca.data()[i] + cb.data()[i]);
}

TEST_CASE("seeded determinism") {
    RadarConfig c;
    c.noise_std = 0.1;
    SceneSpec s = make_chest_scene(1.0, TemplateParams::reference_example());
    s.noise_seed = 77;
    s.rbm = {RbmKind::Sway, 1e-3, {}, 5};
    const auto x = synthesize_if_cube(s, c).cube.samples;
    const auto y = synthesize_if_cube(s, c).cube.samples;
    CHECK(x == y);
    s.noise_seed = 78;
    CHECK_FALSE(synthesize_if_cube(s, c).cube.samples == x);
}

TEST_CASE("random body movement generator") {
    RbmSpec none;
    for (double v : make_rbm(none, 20.0, 300).values) REQUIRE(v == 0.0);

    RbmSpec sway{RbmKind::Sway, 2e-3, {}, 11};
    CHECK(make_rbm(sway, 20.0, 300).values == make_rbm(sway, 20.0, 300).values);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RbmSpec shake{RbmKind::Shake, 1e-3, {}, seed};
        const auto r = make_rbm(shake, 20.0, 300).values;
        double ss = 0.0;
        for (double v : r) ss += v * v;
        CHECK(std::sqrt(ss / r.size()) == doctest::Approx(1e-3).epsilon(1e-9));
        const auto p = oracle::periodogram(r, 20.0);
        double in = 0.0, total = 0.0;
        for (std::size_t k = 1; k < p.freq.size(); ++k) {
            total += p.power[k];
            if (p.freq[k] >= 2.0 && p.freq[k] <= 5.0) in += p.power[k];
        }
        CHECK(in / total >= 0.95);
    }

    RbmSpec bad{RbmKind::Shake, -1.0, {}, 0};
    CHECK_THROWS_AS(make_rbm(bad, 20.0, 300), DomainError);
    RbmSpec inverted{RbmKind::Sway, 1e-3, {0.5, 0.2}, 0};
    CHECK_THROWS_AS(make_rbm(inverted, 20.0, 300), DomainError);
}

TEST_CASE("chest scene occupies fewer bins as the range grows") {
    RadarConfig c;
    const auto p = TemplateParams::reference_example();
    CHECK(occupied_bins(make_chest_scene(0.3, p), c) == 3);
    CHECK(occupied_bins(make_chest_scene(2.0, p), c) == 1);
    std::size_t prev = 1000;
    for (double d = 0.2; d <= 5.0; d += 0.1) {
        const std::size_t n = occupied_bins(make_chest_scene(d, p), c);
        CHECK(n <= prev);
        prev = n;
    }
}

TEST_CASE("chest scene mirror patches move together") {
    const auto s = make_chest_scene(1.0, TemplateParams::reference_example());
    const std::size_t n = s.scatterers.size();
    for (std::size_t j = 0; j < n / 2; ++j) {
        CHECK(s.scatterers[j].motion_gain == s.scatterers[n - 1 - j].motion_gain);
        CHECK(s.scatterers[j].motion_delay == s.scatterers[n - 1 - j].motion_delay);
        CHECK(s.scatterers[j].base_range == doctest::Approx(s.scatterers[n - 1 - j].base_range));
    }
}

TEST_CASE("scene validation") {
    RadarConfig c;
    SceneSpec s = point_scene(20.0);
    CHECK_THROWS_AS(synthesize_if_cube(s, c), DomainError);
    s = point_scene(1.0);
    s.scatterers[0].motion_delay = 0.3;
    CHECK_THROWS_AS(synthesize_if_cube(s, c), DomainError);
    s.scatterers.clear();
    CHECK_THROWS_AS(synthesize_if_cube(s, c), DomainError);
}

TEST_CASE("noise level for a requested SNR") {
    SceneSpec s = point_scene(1.0);
    s.scatterers.push_back(ScatterPoint{1.2, {0.0, 1.0}, 1.0, 0.0});
    CHECK(noise_std_for_snr(s, 20.0) == doctest::Approx(std::sqrt(2.0 / 100.0)));
}

}  // TEST_SUITE
