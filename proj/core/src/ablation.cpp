#include "vimo/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace vimo {

void AblationGrid::validate() const {
    if (ranges.empty()) throw DomainError("ablation grid needs at least one range");
    for (double r : ranges)
        if (!(r > 0.0)) throw DomainError("ablation ranges must be > 0");
    if (rbm_kinds.empty()) throw DomainError("ablation grid needs at least one rbm kind");
    if (!(sway_amplitude >= 0.0) || !(shake_amplitude >= 0.0)) throw DomainError("rbm amplitudes must be >= 0");
    if (!std::isfinite(snr_db)) throw DomainError("ablation snr_db must be finite");
}

const char* to_string(RbmKind k) {
    switch (k) {
        case RbmKind::None: return "none";
        case RbmKind::Sway: return "sway";
        case RbmKind::Shake: return "shake";
    }
    return "none";
}

RbmKind rbm_kind_from_string(const std::string& s) {
    std::string k = s;
    std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
    if (k == "none" || k == "still") return RbmKind::None;
    if (k == "sway") return RbmKind::Sway;
    if (k == "shake") return RbmKind::Shake;
    throw DomainError("unknown rbm kind '" + s + "' (expected none, sway or shake)");
}

Quantiles quantiles_of(const std::vector<double>& v) {
    Quantiles q;
    if (v.empty()) return q;
    std::vector<double> s = v;
    for (double& x : s)
        if (!std::isfinite(x)) x = std::numeric_limits<double>::infinity();
    q.min = quantile(s, 0.0);
    q.q1 = quantile(s, 0.25);
    q.median = quantile(s, 0.5);
    q.q3 = quantile(s, 0.75);
    q.max = quantile(s, 1.0);
    return q;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double mean_finite(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
        s += x;
    }
    return v.empty() ? kUndefined : s / static_cast<double>(v.size());
}

/// PCC of an estimate against the truth, matching frames by start time.
double aligned_pcc(const DisplacementSeries& est, const std::vector<double>& truth) {
    if (est.size() < 2 || truth.size() < 2) return kUndefined;
    const long offset = std::lround(est.start_time * est.frame_rate);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const long m = offset + static_cast<long>(i);
        if (m < 0 || m >= static_cast<long>(truth.size())) continue;
        a.push_back(est.values[i]);
        b.push_back(truth[static_cast<std::size_t>(m)]);
    }
    if (a.size() < 2) return kUndefined;
    return pcc(a, b);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    return splitmix64(s ^ c);
}

TemplateParams draw_truth(const AblationGrid& grid, std::uint64_t seed) {
    if (grid.truth == TruthMode::Fixed) return grid.fixed_truth;
    std::mt19937_64 rng(seed);
    auto uni = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    TemplateParams p;
    p.T_res = uni(2.5, 6.0);     // 10 to 24 breaths per minute
    p.T_h = uni(0.6, 1.0);       // 60 to 100 beats per minute
    p.A_res = uni(2e-3, 5e-3);
    p.A_h = uni(1.5e-4, 3.5e-4);
    p.c = uni(0.0, 200.0);
    p.t_off_r = uni(0.0, p.T_res);
    p.t_off_h = uni(0.0, p.T_h);
    return p;
}

Simulation simulate_trial(const AblationGrid& grid, const RadarConfig& radar, double range, RbmKind rbm,
                          std::uint64_t seed, const TemplateBank& bank) {
    const TemplateParams truth = draw_truth(grid, derive_seed(seed, 0));
    SceneSpec scene = make_chest_scene(range, truth, grid.geometry);
    scene.noise_seed = derive_seed(seed, 1);
    scene.rbm.kind = rbm;
    scene.rbm.amplitude = rbm == RbmKind::Sway ? grid.sway_amplitude : rbm == RbmKind::Shake ? grid.shake_amplitude : 0.0;
    scene.rbm.seed = derive_seed(seed, 2);
    RadarConfig cfg = radar;
    cfg.noise_std = noise_std_for_snr(scene, grid.snr_db);
    return synthesize_if_cube(scene, cfg, bank);
}

TrialReport score_trial(const PipelineResult& result, const Simulation& sim, const TemplateParams& truth) {
    TrialReport r;
    r.method = result.method;
    r.resp_truth_bpm = 60.0 / truth.T_res;
    r.heart_truth_bpm = 60.0 / truth.T_h;
    r.resp_est_bpm = result.resp_bpm;
    r.heart_est_bpm = result.heart_bpm;
    r.resp_error_pct = rate_error(result.resp_bpm, r.resp_truth_bpm);
    r.heart_error_pct = rate_error(result.heart_bpm, r.heart_truth_bpm);
    r.pcc_resp = aligned_pcc(result.resp_wave, sim.truth_components.resp);
    r.pcc_heart = aligned_pcc(result.heart_wave, sim.truth_components.heart);
    r.n_bins = result.selection.msp_bins.size();
    return r;
}

std::vector<CellSummary> summarize(const std::vector<TrialReport>& trials) {
    std::vector<CellSummary> cells;
    auto same_cell = [](const CellSummary& c, const TrialReport& t) {
        return c.range_m == t.range_m && c.rbm == t.rbm && c.method == t.method;
    };
    std::vector<std::vector<const TrialReport*>> members;
    for (const auto& t : trials) {
        auto it = std::find_if(cells.begin(), cells.end(), [&](const CellSummary& c) { return same_cell(c, t); });
        if (it == cells.end()) {
            CellSummary c;
            c.range_m = t.range_m;
            c.rbm = t.rbm;
            c.method = t.method;
            cells.push_back(c);
            members.emplace_back();
            it = cells.end() - 1;
        }
        members[static_cast<std::size_t>(it - cells.begin())].push_back(&t);
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::vector<double> re, he, pr;
        for (const TrialReport* t : members[i]) {
            re.push_back(t->resp_error_pct);
            he.push_back(t->heart_error_pct);
            if (std::isfinite(t->pcc_resp)) pr.push_back(t->pcc_resp);
            if (!t->error.empty() || !std::isfinite(t->resp_error_pct) || !std::isfinite(t->heart_error_pct))
                ++cells[i].failures;
        }
        cells[i].n = members[i].size();
        cells[i].resp_error = quantiles_of(re);
        cells[i].heart_error = quantiles_of(he);
        cells[i].mean_resp_error = mean_finite(re);
        cells[i].mean_heart_error = mean_finite(he);
        cells[i].median_pcc_resp = pr.empty() ? kUndefined : median(pr);
    }
    std::stable_sort(cells.begin(), cells.end(), [](const CellSummary& a, const CellSummary& b) {
        if (a.range_m != b.range_m) return a.range_m < b.range_m;
        if (a.rbm != b.rbm) return a.rbm < b.rbm;
        return a.method < b.method;
    });
    return cells;
}

AblationReport run_ablation(const AblationGrid& grid, const RadarConfig& radar, const PipelineConfig& pipeline,
                            unsigned threads, const TemplateBank& bank) {
    grid.validate();
    AblationReport report;
    if (grid.methods.empty()) return report;

    struct Task {
        std::size_t range_idx, rbm_idx, trial;
    };
    std::vector<Task> tasks;
    for (std::size_t r = 0; r < grid.ranges.size(); ++r)
        for (std::size_t k = 0; k < grid.rbm_kinds.size(); ++k)
            for (std::size_t t = 0; t < grid.seeds_per_cell; ++t) tasks.push_back({r, k, t});

    const std::size_t n_methods = grid.methods.size();
    std::vector<TrialReport> slots(tasks.size() * n_methods);
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
            const Task& task = tasks[i];
            const double range = grid.ranges[task.range_idx];
            const RbmKind rbm = grid.rbm_kinds[task.rbm_idx];
            const std::uint64_t seed = derive_seed(grid.master_seed, task.range_idx, task.rbm_idx, task.trial);
            const TemplateParams truth = draw_truth(grid, derive_seed(seed, 0));
            std::string sim_error;
            Simulation sim;
            try {
                sim = simulate_trial(grid, radar, range, rbm, seed, bank);
            } catch (const std::exception& e) {
                sim_error = e.what();
            }
            for (std::size_t m = 0; m < n_methods; ++m) {
                TrialReport r;
                if (sim_error.empty()) {
                    try {
                        r = score_trial(run_pipeline(sim.cube, grid.methods[m], pipeline, bank), sim, truth);
                    } catch (const std::exception& e) {
                        r.error = e.what();
                    }
                } else {
                    r.error = sim_error;
                }
                r.method = grid.methods[m];
                r.range_m = range;
                r.rbm = rbm;
                r.trial = task.trial;
                r.seed = seed;
                r.resp_truth_bpm = 60.0 / truth.T_res;
                r.heart_truth_bpm = 60.0 / truth.T_h;
                slots[i * n_methods + m] = std::move(r);
            }
        }
    };

    unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(1, tasks.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    report.trials = std::move(slots);
    report.cells = summarize(report.trials);
    return report;
}

}  // namespace vimo
