#include "vimo/combine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vimo {

XcorrPeak pairwise_xcorr(const std::vector<double>& a, const std::vector<double>& b, double frame_rate,
                         double max_lag) {
    const std::size_t n = a.size();
    if (b.size() != n) throw DomainError("pairwise_xcorr needs equal-length series");
    if (n < 2) throw DomainError("pairwise_xcorr needs at least 2 samples");
    const double duration = static_cast<double>(n) / frame_rate;
    if (!(max_lag >= 0.0 && max_lag < duration / 2.0)) {
        std::ostringstream msg;
        msg << "max_lag = " << max_lag << " s must lie in [0, " << duration / 2.0 << ")";
        throw DomainError(msg.str());
    }

    std::vector<double> x = a, y = b;
    remove_mean(x);
    remove_mean(y);
    if (variance(x) == 0.0 || variance(y) == 0.0) return {};

    const long max_shift = static_cast<long>(std::floor(max_lag * frame_rate + 1e-9));
    XcorrPeak best{-2.0, 0.0};
    auto eval = [&](long lag) {
        // r(lag) = sum_m x[m] y[m + lag] over the overlap
        const long lo = std::max(0L, -lag);
        const long hi = std::min(static_cast<long>(n), static_cast<long>(n) - lag);
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (long m = lo; m < hi; ++m) {
            const double u = x[m], v = y[m + lag];
            sxy += u * v;
            sxx += u * u;
            syy += v * v;
        }
        const double denom = std::sqrt(sxx * syy);
        const double r = denom > 0.0 ? sxy / denom : 0.0;
        if (r > best.corr) best = {r, static_cast<double>(lag) / frame_rate};
    };
    eval(0);
    for (long s = 1; s <= max_shift; ++s) {
        eval(-s);
        eval(s);
    }
    return best;
}

XcorrPeak pairwise_xcorr(const PhaseSeries& a, const PhaseSeries& b, double max_lag) {
    return pairwise_xcorr(a.values, b.values, a.frame_rate, max_lag);
}

ChannelEstimate choose_reference(const std::vector<PhaseSeries>& series, double max_lag) {
    if (series.empty()) throw DomainError("choose_reference needs at least one series");
    const std::size_t n = series.size();
    ChannelEstimate est;
    for (const auto& s : series) est.bins.push_back(s.bin_index);

    std::vector<double> score(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = pairwise_xcorr(series[i], series[j], max_lag).corr;
            score[i] += r;
            score[j] += r;
        }
    est.reference = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());

    est.delays.assign(n, 0.0);
    est.correlations.assign(n, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == est.reference) continue;
        const auto peak = pairwise_xcorr(series[est.reference], series[j], max_lag);
        est.delays[j] = peak.lag;
        est.correlations[j] = peak.corr;
    }
    return est;
}

DisplacementSeries coherent_combine(const RangeMap& map, const ChannelEstimate& est, double wavelength) {
    const std::size_t n_bins = est.bins.size();
    if (n_bins == 0) throw DomainError("coherent_combine needs at least one bin");
    if (est.delays.size() != n_bins || est.reference >= n_bins)
        throw DomainError("channel estimate is inconsistent with its bin list");
    const long M = static_cast<long>(map.n_frames());

    std::vector<long> shift(n_bins);
    long lo = 0, hi = M;
    for (std::size_t j = 0; j < n_bins; ++j) {
        shift[j] = std::lround(est.delays[j] * map.frame_rate);
        lo = std::max(lo, -shift[j]);
        hi = std::min(hi, M - shift[j]);
    }
    if (hi - lo < 2) throw DomainError("bin delays leave fewer than 2 common frames");
    const std::size_t len = static_cast<std::size_t>(hi - lo);

    std::vector<std::vector<Complex>> aligned(n_bins, std::vector<Complex>(len));
    for (std::size_t j = 0; j < n_bins; ++j) {
        if (est.bins[j] >= map.n_bins()) throw DomainError("coherent_combine bin index out of range");
        for (std::size_t m = 0; m < len; ++m)
            aligned[j][m] = map.bins(static_cast<std::size_t>(lo + static_cast<long>(m) + shift[j]), est.bins[j]);
    }

    const auto& ref = aligned[est.reference];
    std::vector<Complex> sum(len);
    for (std::size_t j = 0; j < n_bins; ++j) {
        Complex w{0.0, 0.0};
        for (std::size_t m = 0; m < len; ++m) w += aligned[j][m] * std::conj(ref[m]);
        const Complex rot = std::abs(w) > 0.0 ? std::conj(w) / std::abs(w) : Complex{1.0, 0.0};
        for (std::size_t m = 0; m < len; ++m) sum[m] += aligned[j][m] * rot;
    }
    for (auto& z : sum) z /= static_cast<double>(n_bins);

    DisplacementSeries out;
    out.frame_rate = map.frame_rate;
    out.start_time = static_cast<double>(lo) / map.frame_rate;
    out.values = unwrapped_phase(sum);
    const double scale = wavelength / (4.0 * kPi);
    for (double& v : out.values) v *= scale;
    remove_mean(out.values);
    return out;
}

DisplacementSeries combine_bins(const RangeMap& map, const std::vector<std::size_t>& bins, const CombineConfig& cfg,
                                double wavelength, ChannelEstimate* est_out) {
    std::vector<PhaseSeries> series;
    series.reserve(bins.size());
    for (std::size_t b : bins) series.push_back(extract_phase(map, b));
    const ChannelEstimate est = choose_reference(series, cfg.max_lag);
    if (est_out) *est_out = est;
    return coherent_combine(map, est, wavelength);
}

}  // namespace vimo
