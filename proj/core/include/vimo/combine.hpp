#pragma once

// Coherent multi-bin combining: estimate per-bin lags against a reference
// bin, align the complex slow-time series, average them and convert the
// phase of the average to displacement.

#include <vector>

#include "vimo/common.hpp"
#include "vimo/preprocess.hpp"

namespace vimo {

struct XcorrPeak {
    double corr = 0.0;
    double lag = 0.0;  // s; positive when b lags a
};

/// Normalized cross-correlation of mean-removed series over lags in
/// [-max_lag, max_lag]. Each lag is normalized over the overlapping samples
/// so corr(x, x) at lag 0 is 1. Ties go to the smaller |lag|, then to the
/// negative lag.
XcorrPeak pairwise_xcorr(const std::vector<double>& a, const std::vector<double>& b, double frame_rate,
                         double max_lag);
XcorrPeak pairwise_xcorr(const PhaseSeries& a, const PhaseSeries& b, double max_lag);

struct ChannelEstimate {
    std::vector<std::size_t> bins;   // range bins, in input order
    std::size_t reference = 0;       // position of the reference inside `bins`
    std::vector<double> delays;      // s, lag of each bin behind the reference
    std::vector<double> correlations;

    std::size_t reference_bin() const { return bins.at(reference); }
};

/// Reference = argmax over bins of the summed correlation with all other
/// bins (lower position on ties); delays recomputed against it.
ChannelEstimate choose_reference(const std::vector<PhaseSeries>& series, double max_lag);

/// Shifts every bin by its whole-frame delay, rotates it onto the reference
/// phase, averages, unwraps and scales by wavelength / (4 pi). Frames not
/// covered by every shifted series are dropped; start_time records the offset.
DisplacementSeries coherent_combine(const RangeMap& map, const ChannelEstimate& est, double wavelength);

struct CombineConfig {
    double max_lag = 1.0;  // s
};

/// extract_phase on every bin, choose_reference, coherent_combine.
DisplacementSeries combine_bins(const RangeMap& map, const std::vector<std::size_t>& bins, const CombineConfig& cfg,
                                double wavelength, ChannelEstimate* est_out = nullptr);

}  // namespace vimo
