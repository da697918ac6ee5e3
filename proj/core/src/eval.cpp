#include "vimo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vimo/dsp.hpp"

namespace vimo {

double rate_error(double estimate_bpm, double truth_bpm) {
    if (!(truth_bpm > 0.0)) {
        std::ostringstream msg;
        msg << "rate_error truth = " << truth_bpm << " must be > 0";
        throw DomainError(msg.str());
    }
    return 100.0 * std::abs(estimate_bpm - truth_bpm) / truth_bpm;
}

double pcc(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw DomainError("pcc needs two equal-length series of >= 2 samples");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double u = a[i] - ma, v = b[i] - mb;
        sab += u * v;
        saa += u * u;
        sbb += v * v;
    }
    if (saa == 0.0 || sbb == 0.0) return kUndefined;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

double band_argmax(const dsp::Spectrum& spec, const Band& band, bool include_low) {
    long best = -1;
    for (std::size_t k = 1; k < spec.freq.size(); ++k) {
        const double f = spec.freq[k];
        if (!band.contains(f)) continue;
        if (!include_low && f <= band.low + 1e-9) continue;
        if (spec.power[k] > 0.0 && (best < 0 || spec.power[k] > spec.power[best])) best = static_cast<long>(k);
    }
    return best < 0 ? kUndefined : spec.freq[best];
}

}  // namespace

FftEstimate fft_rates(const DisplacementSeries& x, const BaselineConfig& cfg) {
    FftEstimate est;
    est.resp_wave = DisplacementSeries{{}, x.frame_rate, x.start_time};
    est.heart_wave = est.resp_wave;
    if (x.size() < 2) return est;
    std::vector<double> v = x.values;
    remove_mean(v);

    const auto resp_bp = dsp::butter_bandpass(cfg.filter_order, cfg.resp_band, x.frame_rate);
    const auto heart_bp = dsp::butter_bandpass(cfg.filter_order, cfg.heart_band, x.frame_rate);
    est.resp_wave.values = dsp::filtfilt(resp_bp, v);
    est.heart_wave.values = dsp::filtfilt(heart_bp, v);
    est.resp_hz = band_argmax(dsp::power_spectrum(est.resp_wave.values, x.frame_rate), cfg.resp_band, true);
    est.heart_hz = band_argmax(dsp::power_spectrum(est.heart_wave.values, x.frame_rate), cfg.heart_band, false);
    return est;
}

std::size_t max_variance_bin(const RangeMap& map, const SelectionConfig& selection) {
    const auto candidates = candidate_bins(map, selection);
    if (candidates.empty()) return max_energy_bin(map);
    std::size_t best = candidates.front();
    double best_var = -1.0;
    for (std::size_t b : candidates) {
        const double v = variance(extract_phase(map, b).values);
        if (v > best_var) {
            best_var = v;
            best = b;
        }
    }
    return best;
}

BaselineResult baseline_singlebin_fft(const RangeMap& map, double wavelength, const SelectionConfig& selection,
                                      const BaselineConfig& cfg) {
    BaselineResult r;
    r.bin = max_variance_bin(map, selection);
    const PhaseSeries ph = extract_phase(map, r.bin);
    r.displacement.frame_rate = map.frame_rate;
    r.displacement.values = ph.values;
    for (double& v : r.displacement.values) v *= wavelength / (4.0 * kPi);
    r.estimate = fft_rates(r.displacement, cfg);
    return r;
}

}  // namespace vimo
