#pragma once

// Method comparison over a grid of ranges and body-movement conditions.

#include <cstdint>
#include <string>
#include <vector>

#include "vimo/pipeline.hpp"
#include "vimo/radar_sim.hpp"

namespace vimo {

enum class TruthMode { Fixed, Randomized };

struct AblationGrid {
    std::vector<double> ranges{0.3, 1.0, 2.0, 5.0};  // m
    std::vector<RbmKind> rbm_kinds{RbmKind::None, RbmKind::Sway, RbmKind::Shake};
    double sway_amplitude = 5e-4;   // m RMS
    double shake_amplitude = 2e-4;  // m RMS
    std::size_t seeds_per_cell = 25;
    std::uint64_t master_seed = 1;
    double snr_db = 20.0;
    TruthMode truth = TruthMode::Randomized;
    TemplateParams fixed_truth = TemplateParams::reference_example();
    ChestGeometry geometry;
    std::vector<Method> methods{Method::Pivimo, Method::MspFft, Method::SingleBinTm, Method::SingleBinFft};

    void validate() const;
    std::size_t n_cells() const { return ranges.size() * rbm_kinds.size(); }
};

const char* to_string(RbmKind k);
RbmKind rbm_kind_from_string(const std::string& s);

struct TrialReport {
    Method method = Method::Pivimo;
    double range_m = 0.0;
    RbmKind rbm = RbmKind::None;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double resp_truth_bpm = 0.0;
    double heart_truth_bpm = 0.0;
    double resp_est_bpm = kUndefined;
    double heart_est_bpm = kUndefined;
    double resp_error_pct = kUndefined;
    double heart_error_pct = kUndefined;
    double pcc_resp = kUndefined;
    double pcc_heart = kUndefined;  // extra diagnostic
    std::size_t n_bins = 0;
    std::string error;  // non-empty when the trial threw
};

/// min, lower quartile, median, upper quartile, max.
struct Quantiles {
    double min = kUndefined, q1 = kUndefined, median = kUndefined, q3 = kUndefined, max = kUndefined;
};

/// Non-finite entries (failed estimates) are ranked as +inf, so they push
/// medians up instead of vanishing.
Quantiles quantiles_of(const std::vector<double>& v);

struct CellSummary {
    double range_m = 0.0;
    RbmKind rbm = RbmKind::None;
    Method method = Method::Pivimo;
    std::size_t n = 0;
    std::size_t failures = 0;
    double mean_resp_error = kUndefined;
    double mean_heart_error = kUndefined;
    double median_pcc_resp = kUndefined;
    Quantiles resp_error;
    Quantiles heart_error;
};

struct AblationReport {
    std::vector<TrialReport> trials;  // ordered by range, rbm, trial, method
    std::vector<CellSummary> cells;   // ordered by range, rbm, method
};

/// 64-bit seed for one trial of one cell, derived from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/// Ground truth of one trial: the fixed parameters, or physiological rates,
/// amplitudes and phases drawn from `seed`.
TemplateParams draw_truth(const AblationGrid& grid, std::uint64_t seed);

/// Simulated cube of one trial; every method of a cell sees the same cube.
Simulation simulate_trial(const AblationGrid& grid, const RadarConfig& radar, double range, RbmKind rbm,
                          std::uint64_t seed, const TemplateBank& bank = TemplateBank::standard());

/// Scores one pipeline result against the simulated truth.
TrialReport score_trial(const PipelineResult& result, const Simulation& sim, const TemplateParams& truth);

std::vector<CellSummary> summarize(const std::vector<TrialReport>& trials);

/// Runs every (range, rbm, trial) with all grid methods on `threads` workers
/// (0 = hardware concurrency). Output order does not depend on scheduling.
AblationReport run_ablation(const AblationGrid& grid, const RadarConfig& radar, const PipelineConfig& pipeline,
                            unsigned threads = 0, const TemplateBank& bank = TemplateBank::standard());

}  // namespace vimo
