#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vimo/dsp.hpp"
#include "vimo/preprocess.hpp"

using namespace vimo;

namespace {

IFDataCube point_cube(double range, MotionSpec motion = {MotionSpec::Kind::Static, 0.0, 0.0}, std::uint32_t frames = 300) {
    RadarConfig c;
    c.n_frames = frames;
    SceneSpec s;
    s.scatterers.push_back(ScatterPoint{range, {1.0, 0.0}, 1.0, 0.0});
    s.motion = motion;
    return synthesize_if_cube(s, c).cube;
}

IFDataCube random_cube(std::uint64_t seed, std::uint32_t frames = 8, std::uint32_t K = 64) {
    IFDataCube cube;
    cube.config.n_frames = frames;
    cube.config.samples_per_chirp = K;
    cube.samples = ComplexMatrix(frames, K);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    for (auto& z : cube.samples.data()) z = {g(rng), g(rng)};
    return cube;
}

double energy(const ComplexMatrix& m) {
    double e = 0.0;
    for (const auto& z : m.data()) e += std::norm(z);
    return e;
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("range FFT equals the naive DFT scaled by 1/sqrt(K)") {
    const auto cube = random_cube(3);
    const auto map = range_fft(cube);
    for (std::size_t m = 0; m < cube.samples.rows(); ++m) {
        std::vector<oracle::cd> row(cube.samples.row(m), cube.samples.row(m) + cube.samples.cols());
        const auto ref = oracle::naive_dft(row);
        for (std::size_t n = 0; n < row.size(); ++n)
            REQUIRE(std::abs(map.bins(m, n) - ref[n] / std::sqrt(64.0)) < 1e-10);
    }
}

TEST_CASE("target at 10 range bins peaks in bin 10 every frame") {
    const RadarConfig c;
    const auto map = range_fft(point_cube(10 * c.range_resolution(), {MotionSpec::Kind::Sinusoid, 1e-3, 0.3}));
    CHECK(map.bin_spacing == doctest::Approx(c.range_resolution()));
    CHECK(map.n_bins() == c.samples_per_chirp);
    for (std::size_t m = 0; m < map.n_frames(); ++m) {
        std::size_t best = 0;
        for (std::size_t n = 1; n < map.n_bins(); ++n)
            if (std::abs(map.bins(m, n)) > std::abs(map.bins(m, best))) best = n;
        REQUIRE(best == 10);
    }
}

TEST_CASE("target between bins leaks into both neighbours") {
    const RadarConfig c;
    const auto map = range_fft(point_cube(10.5 * c.range_resolution(), {}, 2));
    const double e10 = std::norm(map.bins(0, 10)), e11 = std::norm(map.bins(0, 11));
    CHECK(e10 > 0.25 * (e10 + e11));
    CHECK(e11 > 0.25 * (e10 + e11));
}

TEST_CASE("zero cube gives a zero map") {
    IFDataCube cube;
    cube.config.n_frames = 4;
    cube.samples = ComplexMatrix(4, cube.config.samples_per_chirp);
    const auto map = range_fft(cube);
    for (const auto& z : map.bins.data()) REQUIRE(z == Complex{});
}

TEST_CASE("property: Parseval") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto cube = random_cube(seed);
        CHECK(energy(range_fft(cube).bins) == doctest::Approx(energy(cube.samples)).epsilon(1e-9));
        // Hann: energy of the windowed cube.
        IFDataCube windowed = cube;
        const std::size_t K = cube.samples.cols();
        for (std::size_t m = 0; m < cube.samples.rows(); ++m)
            for (std::size_t k = 0; k < K; ++k)
                windowed.samples(m, k) *= 0.5 - 0.5 * std::cos(2.0 * oracle::kPi * k / (K - 1.0));
        CHECK(energy(range_fft(cube, Window::Hann).bins) == doctest::Approx(energy(windowed.samples)).epsilon(1e-9));
    }
}

TEST_CASE("property: preprocessing is linear in the cube") {
    const auto x = random_cube(10), y = random_cube(11);
    const Complex a{0.7, -1.3}, b{-2.0, 0.4};
    IFDataCube z = x;
    for (std::size_t i = 0; i < z.samples.data().size(); ++i)
        z.samples.data()[i] = a * x.samples.data()[i] + b * y.samples.data()[i];
    for (bool clutter : {false, true}) {
        auto run = [&](const IFDataCube& c) { return clutter ? preprocess(c) : range_fft(c); };
        const auto mx = run(x), my = run(y), mz = run(z);
        for (std::size_t i = 0; i < mz.bins.data().size(); ++i)
            REQUIRE(std::abs(mz.bins.data()[i] - (a * mx.bins.data()[i] + b * my.bins.data()[i])) < 1e-10);
    }
}

TEST_CASE("clutter removal") {
    RadarConfig c;
    c.n_frames = 100;
    SceneSpec wall;
    wall.scatterers.push_back(ScatterPoint{3.0, {5.0, 0.0}, 0.0, 0.0});
    const auto static_only = remove_clutter(synthesize_if_cube(wall, c).cube);
    double mx = 0.0;
    for (const auto& z : static_only.samples.data()) mx = std::max(mx, std::abs(z));
    CHECK(mx < 1e-9 * 5.0);

    SceneSpec mover;
    mover.motion = {MotionSpec::Kind::Sinusoid, 2e-3, 0.3};
    mover.scatterers.push_back(ScatterPoint{1.0, {1.0, 0.0}, 1.0, 0.0});
    SceneSpec both = mover;
    both.scatterers.push_back(wall.scatterers[0]);
    const auto cleaned = remove_clutter(synthesize_if_cube(both, c).cube);
    // Oracle: the moving scatterer alone minus its own slow-time mean.
    auto alone = synthesize_if_cube(mover, c).cube;
    const std::size_t M = c.n_frames, K = c.samples_per_chirp;
    for (std::size_t k = 0; k < K; ++k) {
        Complex mean{};
        for (std::size_t m = 0; m < M; ++m) mean += alone.samples(m, k);
        mean /= static_cast<double>(M);
        for (std::size_t m = 0; m < M; ++m) REQUIRE(std::abs(cleaned.samples(m, k) - (alone.samples(m, k) - mean)) < 1e-9);
    }
    const auto twice = remove_clutter(cleaned);
    for (std::size_t i = 0; i < twice.samples.data().size(); ++i)
        REQUIRE(std::abs(twice.samples.data()[i] - cleaned.samples.data()[i]) < 1e-12);
}

TEST_CASE("phase extraction recovers motion beyond one phase wrap") {
    const double lambda = 0.005;
    std::vector<Complex> series(300);
    std::vector<double> x(300);
    double xm = 0.0;
    for (std::size_t m = 0; m < 300; ++m) {
        xm += x[m] = 3e-3 * std::sin(2.0 * oracle::kPi * 0.25 * m / 20.0);
        series[m] = std::polar(1.0, 4.0 * oracle::kPi * x[m] / lambda);
    }
    xm /= 300.0;
    const auto ph = unwrapped_phase(series);
    for (std::size_t m = 0; m < 300; ++m) {
        REQUIRE(std::abs(ph[m] * lambda / (4.0 * oracle::kPi) - (x[m] - xm)) < 1e-6);
        if (m > 0) REQUIRE(std::abs(ph[m] - ph[m - 1]) < oracle::kPi);
    }
}

TEST_CASE("constant phase gives zeros; an artificial 2 pi jump is removed") {
    std::vector<Complex> flat(50, std::polar(2.0, 1.1));
    for (double v : unwrapped_phase(flat)) CHECK(std::abs(v) < 1e-12);

    std::vector<double> ph(50);
    for (std::size_t m = 0; m < 50; ++m) ph[m] = 0.05 * m;
    std::vector<double> jumped = ph;
    for (std::size_t m = 25; m < 50; ++m) jumped[m] += 2.0 * oracle::kPi;
    const auto u = dsp::unwrap(jumped);
    for (std::size_t m = 0; m < 50; ++m) CHECK(u[m] == doctest::Approx(ph[m]));
}

TEST_CASE("extract_phase of a synthesized single bin is the displacement up to a constant") {
    const RadarConfig c;
    const auto cube = point_cube(1.5, {MotionSpec::Kind::Sinusoid, 1e-3, 0.3});
    const auto map = range_fft(cube);
    const auto ph = extract_phase(map, 40);
    double xm = 0.0;
    std::vector<double> x(c.n_frames);
    for (std::size_t m = 0; m < c.n_frames; ++m) xm += x[m] = 1e-3 * std::sin(2.0 * oracle::kPi * 0.3 * m / 20.0);
    xm /= c.n_frames;
    for (std::size_t m = 0; m < c.n_frames; ++m)
        REQUIRE(std::abs(ph.values[m] * c.phase_wavelength() / (4.0 * oracle::kPi) - (x[m] - xm)) < 1e-9);
    CHECK_THROWS_AS(extract_phase(map, 1000), DomainError);
}

TEST_CASE("phase CSV header") {
    const auto map = range_fft(point_cube(1.0, {}, 3));
    const auto csv = phase_csv(map, {26, 27});
    CHECK(csv.rfind("frame,bin_26,bin_27\n", 0) == 0);
}

}  // TEST_SUITE
