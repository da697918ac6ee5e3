#pragma once

// Range-bin selection: a CFAR-style detector that keeps whole runs of
// above-threshold bins, followed by a spectral test that keeps only bins
// whose phase carries respiration or heartbeat energy.

#include <vector>

#include "vimo/common.hpp"
#include "vimo/preprocess.hpp"

namespace vimo {

struct SelectionConfig {
    double alpha = 0.20;     // weight of the max bin energy in the candidate threshold
    double th_resp = 5.0;    // in-band / out-band energy ratio for respiration
    double th_heart = 5.0;   // same for heartbeat, after high-passing
    Band resp_band{0.1, 0.8};
    Band heart_band{0.8, 2.0};
    int highpass_order = 4;

    void validate() const;
};

enum class Detection { Rejected, Respiration, Heartbeat, Fallback };

const char* to_string(Detection d);

struct BinDecision {
    std::size_t bin = 0;
    Detection detection = Detection::Rejected;
    double resp_ratio = 0.0;
    double resp_peak_hz = kUndefined;
    double heart_ratio = 0.0;  // only evaluated when the respiration test fails
    double heart_peak_hz = kUndefined;
};

struct BinSelection {
    std::vector<std::size_t> candidates;
    std::vector<std::size_t> msp_bins;
    std::vector<BinDecision> decisions;  // one per candidate, plus the fallback bin if used

    bool used_fallback() const;
    Detection detection_of(std::size_t bin) const;
};

/// Bins above T = mean(E) + alpha * max(E), grouped as contiguous runs around
/// each local maximum. An all-zero map yields no candidates.
std::vector<std::size_t> candidate_bins(const RangeMap& map, const SelectionConfig& cfg);

struct BandRatio {
    double ratio = 0.0;        // E_in / E_out; +inf when E_out = 0 < E_in; 0 for a zero series
    double peak_hz = kUndefined;
};

/// Energy in `in_band` over energy outside `keep_band` (both over (0, nyquist]),
/// and the peak frequency, from the periodogram of the mean-removed series.
BandRatio band_energy_ratio(const std::vector<double>& series, double frame_rate, const Band& in_band,
                            const Band& keep_band);
BandRatio band_energy_ratio(const PhaseSeries& phase, const Band& in_band, const Band& keep_band);

/// Per-candidate respiration test, then heartbeat test on the high-passed
/// phase; falls back to the single maximum-energy bin when nothing passes.
BinSelection msp_select(const RangeMap& map, const std::vector<std::size_t>& candidates, const SelectionConfig& cfg);

/// candidate_bins followed by msp_select.
BinSelection select_bins(const RangeMap& map, const SelectionConfig& cfg);

/// Index of the maximum-energy bin, lowest index on ties.
std::size_t max_energy_bin(const RangeMap& map);

}  // namespace vimo
