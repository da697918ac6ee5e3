#pragma once

// Metrics and the single-bin band-pass + FFT baseline.

#include <vector>

#include "vimo/binselect.hpp"
#include "vimo/common.hpp"
#include "vimo/preprocess.hpp"

namespace vimo {

/// 100 |estimate - truth| / truth. NaN estimate gives NaN.
double rate_error(double estimate_bpm, double truth_bpm);

/// Pearson correlation; NaN when either series has zero variance.
double pcc(const std::vector<double>& a, const std::vector<double>& b);

struct BaselineConfig {
    Band resp_band{0.1, 0.8};
    Band heart_band{0.8, 2.0};
    int filter_order = 4;  // per high-pass and low-pass section
};

/// Band-pass + periodogram argmax rates of one displacement series.
/// The heart search excludes its lower edge so that a respiration line
/// sitting exactly on the shared band edge is not reported as heartbeat.
struct FftEstimate {
    double resp_hz = kUndefined;
    double heart_hz = kUndefined;
    DisplacementSeries resp_wave;   // band-passed displacement
    DisplacementSeries heart_wave;

    double resp_bpm() const { return 60.0 * resp_hz; }
    double heart_bpm() const { return 60.0 * heart_hz; }
};

FftEstimate fft_rates(const DisplacementSeries& x, const BaselineConfig& cfg = {});

struct BaselineResult {
    std::size_t bin = 0;
    DisplacementSeries displacement;
    FftEstimate estimate;
};

/// Bin with the largest unwrapped-phase variance among the detector's
/// candidate bins (maximum-energy bin when there are none), converted to
/// displacement with `wavelength`.
std::size_t max_variance_bin(const RangeMap& map, const SelectionConfig& selection);

BaselineResult baseline_singlebin_fft(const RangeMap& map, double wavelength, const SelectionConfig& selection = {},
                                      const BaselineConfig& cfg = {});

}  // namespace vimo
