#include <benchmark/benchmark.h>

#include <random>

#include "vimo/binselect.hpp"
#include "vimo/combine.hpp"
#include "vimo/fit.hpp"
#include "vimo/pipeline.hpp"
#include "vimo/preprocess.hpp"
#include "vimo/radar_sim.hpp"

using namespace vimo;

namespace {

TemplateParams trackable() {
    TemplateParams p;
    p.A_res = 3e-3;
    p.T_res = 4.0;
    p.A_h = 2e-4;
    p.T_h = 0.8;
    p.c = 100.0;
    return p;
}

const Simulation& scene() {
    static const Simulation sim = [] {
        SceneSpec s = make_chest_scene(1.0, trackable());
        s.noise_seed = 1;
        RadarConfig c;
        c.noise_std = noise_std_for_snr(s, 20.0);
        return synthesize_if_cube(s, c);
    }();
    return sim;
}

void BM_Synthesize(benchmark::State& state) {
    SceneSpec s = make_chest_scene(1.0, trackable());
    RadarConfig c;
    for (auto _ : state) benchmark::DoNotOptimize(synthesize_if_cube(s, c));
}
BENCHMARK(BM_Synthesize)->Unit(benchmark::kMillisecond);

void BM_RangeFft(benchmark::State& state) {
    const auto& cube = scene().cube;
    for (auto _ : state) benchmark::DoNotOptimize(range_fft(cube));
}
BENCHMARK(BM_RangeFft)->Unit(benchmark::kMillisecond);

void BM_SelectBins(benchmark::State& state) {
    const auto map = range_fft(scene().cube);
    for (auto _ : state) benchmark::DoNotOptimize(select_bins(map, SelectionConfig{}));
}
BENCHMARK(BM_SelectBins)->Unit(benchmark::kMillisecond);

void BM_CombineBins(benchmark::State& state) {
    const auto map = range_fft(scene().cube);
    const auto bins = select_bins(map, SelectionConfig{}).msp_bins;
    const double lambda = scene().cube.config.phase_wavelength();
    for (auto _ : state) benchmark::DoNotOptimize(combine_bins(map, bins, CombineConfig{}, lambda));
}
BENCHMARK(BM_CombineBins)->Unit(benchmark::kMillisecond);

void BM_FitSeries(benchmark::State& state) {
    DisplacementSeries x{render_template(trackable(), TemplateBank::standard(), 20.0, 300).chest, 20.0, 0.0};
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 2e-4);
    for (double& v : x.values) v += g(rng);
    FitConfig cfg;
    cfg.coarse_points = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_series(x, cfg));
}
BENCHMARK(BM_FitSeries)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
    const auto method = kAllMethods[state.range(0)];
    state.SetLabel(to_string(method));
    for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(scene().cube, method));
}
BENCHMARK(BM_Pipeline)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
