#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vimo/ablation.hpp"
#include "vimo/eval.hpp"
#include "vimo/pipeline.hpp"

using namespace vimo;

TEST_SUITE("eval") {

TEST_CASE("rate error examples") {
    CHECK(rate_error(15.0, 15.0) == 0.0);
    CHECK(rate_error(16.5, 15.0) == doctest::Approx(10.0));
    CHECK(rate_error(13.5, 15.0) == doctest::Approx(10.0));
    CHECK(std::isnan(rate_error(kUndefined, 15.0)));
    CHECK_THROWS_AS(rate_error(10.0, 0.0), DomainError);
}

TEST_CASE("property: rate error is symmetric in the deviation and scale free") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1.0, 200.0), d(-50.0, 50.0);
    for (int i = 0; i < 100; ++i) {
        const double t = u(rng), e = d(rng) * t / 100.0;
        CHECK(rate_error(t + e, t) == doctest::Approx(rate_error(t - e, t)));
        CHECK(rate_error(3.0 * (t + e), 3.0 * t) == doctest::Approx(rate_error(t + e, t)));
        CHECK(rate_error(t + e, t) >= 0.0);
    }
}

TEST_CASE("pearson correlation") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> b{2, 4, 6, 8, 10};
    const std::vector<double> c{5, 4, 3, 2, 1};
    CHECK(pcc(a, b) == doctest::Approx(1.0));
    CHECK(pcc(a, c) == doctest::Approx(-1.0));
    CHECK(std::isnan(pcc(a, std::vector<double>(5, 1.0))));
    // Oracle: textbook formula on a small example.
    const std::vector<double> x{1, 3, 2, 5}, y{2, 1, 4, 3};
    const double mx = 2.75, my = 2.5;
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < 4; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    CHECK(pcc(x, y) == doctest::Approx(sxy / std::sqrt(sxx * syy)));
    CHECK_THROWS_AS(pcc(a, x), DomainError);
}

TEST_CASE("property: pcc is invariant to affine maps and symmetric") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> a(40), b(40), c(40);
        for (std::size_t k = 0; k < 40; ++k) {
            a[k] = g(rng);
            b[k] = a[k] + g(rng);
            c[k] = 3.0 * b[k] - 7.0;
        }
        CHECK(pcc(a, b) == doctest::Approx(pcc(b, a)));
        CHECK(pcc(a, c) == doctest::Approx(pcc(a, b)));
        CHECK(std::abs(pcc(a, b)) <= 1.0);
    }
}

TEST_CASE("band-pass FFT rates of clean tones") {
    DisplacementSeries x;
    x.values.resize(300);
    for (std::size_t m = 0; m < 300; ++m)
        x.values[m] = 3e-3 * std::sin(2.0 * kPi * 0.25 * m / 20.0) + 2e-4 * std::sin(2.0 * kPi * 1.2 * m / 20.0);
    const auto e = fft_rates(x);
    // 0.25 Hz falls between the 1/15 Hz bins; the nearest bin is 4/15 Hz.
    CHECK(e.resp_hz == doctest::Approx(4.0 / 15.0));
    CHECK(std::abs(e.resp_hz - 0.25) <= 0.5 / 15.0);
    CHECK(e.heart_hz == doctest::Approx(1.2));
    CHECK(e.resp_bpm() == doctest::Approx(16.0));
    CHECK(e.resp_wave.size() == 300);
}

TEST_CASE("FFT rates of a zero series are undefined") {
    DisplacementSeries x;
    x.values.assign(300, 0.0);
    const auto e = fft_rates(x);
    CHECK(std::isnan(e.resp_hz));
    CHECK(std::isnan(e.heart_hz));
}

TEST_CASE("a respiration line on the shared band edge is not reported as heartbeat") {
    DisplacementSeries x;
    x.values.resize(300);
    for (std::size_t m = 0; m < 300; ++m)
        x.values[m] = 3e-3 * std::sin(2.0 * kPi * 0.8 * m / 20.0) + 1e-4 * std::sin(2.0 * kPi * 1.4 * m / 20.0);
    const auto e = fft_rates(x);
    CHECK(e.heart_hz == doctest::Approx(1.4));
}

TEST_CASE("single-bin baseline picks the moving bin") {
    RadarConfig c;
    SceneSpec s;
    s.motion = {MotionSpec::Kind::Sinusoid, 1e-3, 0.3};
    // A moving and a static scatterer of equal strength, centred on bins 27 and 54.
    s.scatterers = {ScatterPoint{27 * c.range_resolution(), {1.0, 0.0}, 1.0, 0.0},
                    ScatterPoint{54 * c.range_resolution(), {1.0, 0.0}, 0.0, 0.0}};
    const auto map = range_fft(synthesize_if_cube(s, c).cube);
    const auto cand = candidate_bins(map, SelectionConfig{});
    CHECK(std::count(cand.begin(), cand.end(), 27u) == 1);
    CHECK(std::count(cand.begin(), cand.end(), 54u) == 1);
    const auto r = baseline_singlebin_fft(map, c.phase_wavelength());
    CHECK(r.bin == 27);
    CHECK(std::abs(r.estimate.resp_hz - 0.3) <= 0.5 / 15.0 + 1e-9);
    CHECK(max_variance_bin(map, SelectionConfig{}) == 27);
}

TEST_CASE("quantiles rank failures as +inf") {
    const auto q = quantiles_of({1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK(q.min == 1.0);
    CHECK(q.q1 == 2.0);
    CHECK(q.median == 3.0);
    CHECK(q.q3 == 4.0);
    CHECK(q.max == 5.0);
    const auto f = quantiles_of({1.0, kUndefined, kUndefined});
    CHECK(std::isinf(f.median));
}

TEST_CASE("method names") {
    for (Method m : kAllMethods) CHECK(method_from_string(to_string(m)) == m);
    CHECK(method_from_string("bin-fft") == Method::SingleBinFft);
    CHECK(method_from_string("msp-fft") == Method::MspFft);
    CHECK_THROWS_AS(method_from_string("nope"), DomainError);
}

TEST_CASE("pipeline recovers a trackable chest scene with every method") {
    TemplateParams p;
    p.A_res = 3e-3;
    p.T_res = 4.0;
    p.t_off_r = 0.3;
    p.A_h = 2e-4;
    p.T_h = 0.8;
    SceneSpec s = make_chest_scene(1.0, p);
    s.noise_seed = 3;
    RadarConfig c;
    c.noise_std = noise_std_for_snr(s, 20.0);
    const auto sim = synthesize_if_cube(s, c);
    for (Method m : kAllMethods) {
        const auto r = run_pipeline(sim.cube, m);
        CHECK(r.method == m);
        CHECK(rate_error(r.resp_bpm, 15.0) <= 10.0);
        CHECK_FALSE(r.selection.msp_bins.empty());
        CHECK(r.displacement.size() > 200);
    }
    const auto piv = run_pipeline(sim.cube, Method::Pivimo);
    CHECK(piv.fit.has_value());
    CHECK(piv.channel.has_value());
    CHECK(rate_error(piv.heart_bpm, 75.0) <= 10.0);
}

TEST_CASE("ablation grid arithmetic and determinism") {
    AblationGrid grid;
    CHECK(grid.n_cells() == 12);
    CHECK(grid.n_cells() * grid.seeds_per_cell * grid.methods.size() == 1200);

    grid.ranges = {1.0};
    grid.rbm_kinds = {RbmKind::None, RbmKind::Shake};
    grid.seeds_per_cell = 2;
    grid.methods = {Method::Pivimo, Method::SingleBinFft};
    RadarConfig radar;
    const auto a = run_ablation(grid, radar, PipelineConfig{}, 1);
    const auto b = run_ablation(grid, radar, PipelineConfig{}, 2);
    REQUIRE(a.trials.size() == 8);
    REQUIRE(b.trials.size() == 8);
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        CHECK(a.trials[i].seed == b.trials[i].seed);
        CHECK(a.trials[i].method == b.trials[i].method);
        CHECK(a.trials[i].resp_est_bpm == b.trials[i].resp_est_bpm);
        CHECK(a.trials[i].heart_est_bpm == b.trials[i].heart_est_bpm);
    }
    // Ordered by range, rbm, trial, method; both methods of a trial share a seed.
    CHECK(a.trials[0].method == Method::Pivimo);
    CHECK(a.trials[1].method == Method::SingleBinFft);
    CHECK(a.trials[0].seed == a.trials[1].seed);
    CHECK(a.trials[4].rbm == RbmKind::Shake);
    CHECK(a.cells.size() == 4);
    for (const auto& c : a.cells) CHECK(c.n == 2);

    grid.methods.clear();
    CHECK(run_ablation(grid, radar, PipelineConfig{}, 1).trials.empty());
}

TEST_CASE("seed derivation and truth draws") {
    CHECK(derive_seed(1, 0, 0, 0) == derive_seed(1, 0, 0, 0));
    CHECK(derive_seed(1, 0, 0, 1) != derive_seed(1, 0, 0, 0));
    CHECK(derive_seed(1, 1, 0, 0) != derive_seed(1, 0, 1, 0));
    CHECK(derive_seed(2, 0, 0, 0) != derive_seed(1, 0, 0, 0));
    AblationGrid grid;
    const ParamBounds pb;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto p = draw_truth(grid, s);
        CHECK(pb.contains(p));
        CHECK(p == draw_truth(grid, s));
    }
    grid.truth = TruthMode::Fixed;
    CHECK(draw_truth(grid, 5) == TemplateParams::reference_example());
}

TEST_CASE("summaries of a hand-made trial list") {
    std::vector<TrialReport> t(4);
    const double errs[] = {1.0, 3.0, 2.0, kUndefined};
    for (std::size_t i = 0; i < 4; ++i) {
        t[i].range_m = 1.0;
        t[i].resp_error_pct = errs[i];
        t[i].heart_error_pct = 10.0 * (i + 1);
        t[i].pcc_resp = 0.5;
    }
    const auto cells = summarize(t);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].n == 4);
    CHECK(cells[0].failures == 1);
    CHECK(std::isinf(cells[0].mean_resp_error));
    CHECK(cells[0].mean_heart_error == doctest::Approx(25.0));
    CHECK(cells[0].resp_error.min == 1.0);
    CHECK(std::isinf(cells[0].resp_error.max));
    CHECK(cells[0].heart_error.median == doctest::Approx(25.0));
    CHECK(cells[0].median_pcc_resp == doctest::Approx(0.5));
}

}  // TEST_SUITE
