#include "vimo/binselect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vimo/dsp.hpp"

namespace vimo {

void SelectionConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("selection alpha must lie in (0, 1)");
    if (!(th_resp > 0.0) || !(th_heart > 0.0)) throw DomainError("selection thresholds must be > 0");
    if (!(resp_band.low >= 0.0 && resp_band.low < resp_band.high && resp_band.high <= heart_band.low &&
          heart_band.low < heart_band.high))
        throw DomainError("selection bands must be ordered and disjoint");
}

const char* to_string(Detection d) {
    switch (d) {
        case Detection::Rejected: return "rejected";
        case Detection::Respiration: return "respiration";
        case Detection::Heartbeat: return "heartbeat";
        case Detection::Fallback: return "fallback";
    }
    return "rejected";
}

bool BinSelection::used_fallback() const {
    return std::any_of(decisions.begin(), decisions.end(),
                       [](const BinDecision& d) { return d.detection == Detection::Fallback; });
}

Detection BinSelection::detection_of(std::size_t bin) const {
    for (const auto& d : decisions)
        if (d.bin == bin && d.detection != Detection::Rejected) return d.detection;
    return Detection::Rejected;
}

std::vector<std::size_t> candidate_bins(const RangeMap& map, const SelectionConfig& cfg) {
    if (map.n_bins() == 0) throw DomainError("candidate_bins needs a non-empty range map");
    const auto e = map.bin_energy();
    const double max_e = *std::max_element(e.begin(), e.end());
    if (max_e <= 0.0) return {};
    const double threshold = mean(e) + cfg.alpha * max_e;

    std::vector<std::size_t> out;
    const std::size_t n = e.size();
    std::size_t i = 0;
    while (i < n) {
        if (!(e[i] > threshold)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && e[j] > threshold) ++j;
        // Every run [i, j) contains its own maximum, which is a local maximum
        // of the profile since the run's neighbours sit below the threshold.
        for (std::size_t k = i; k < j; ++k) out.push_back(k);
        i = j;
    }
    return out;
}

BandRatio band_energy_ratio(const std::vector<double>& series, double frame_rate, const Band& in_band,
                            const Band& keep_band) {
    std::vector<double> x = series;
    remove_mean(x);
    const auto spec = dsp::power_spectrum(x, frame_rate);
    BandRatio r;
    r.peak_hz = spec.peak_frequency();
    const double e_in = spec.energy_in(in_band);
    const double e_out = spec.energy_outside(keep_band);
    if (e_out > 0.0)
        r.ratio = e_in / e_out;
    else
        r.ratio = e_in > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return r;
}

BandRatio band_energy_ratio(const PhaseSeries& phase, const Band& in_band, const Band& keep_band) {
    return band_energy_ratio(phase.values, phase.frame_rate, in_band, keep_band);
}

std::size_t max_energy_bin(const RangeMap& map) {
    const auto e = map.bin_energy();
    return static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
}

BinSelection msp_select(const RangeMap& map, const std::vector<std::size_t>& candidates, const SelectionConfig& cfg) {
    cfg.validate();
    BinSelection sel;
    sel.candidates = candidates;
    const Band resp_keep{cfg.resp_band.low, cfg.heart_band.high};
    const auto highpass = dsp::butter_highpass(cfg.highpass_order, cfg.heart_band.low, map.frame_rate);

    for (std::size_t bin : candidates) {
        BinDecision d;
        d.bin = bin;
        const PhaseSeries phase = extract_phase(map, bin);
        const BandRatio resp = band_energy_ratio(phase, cfg.resp_band, resp_keep);
        d.resp_ratio = resp.ratio;
        d.resp_peak_hz = resp.peak_hz;
        if (!std::isnan(resp.peak_hz) && cfg.resp_band.contains(resp.peak_hz) && resp.ratio >= cfg.th_resp) {
            d.detection = Detection::Respiration;
        } else {
            const auto filtered = dsp::filtfilt(highpass, phase.values);
            const BandRatio heart = band_energy_ratio(filtered, map.frame_rate, cfg.heart_band, cfg.heart_band);
            d.heart_ratio = heart.ratio;
            d.heart_peak_hz = heart.peak_hz;
            if (!std::isnan(heart.peak_hz) && cfg.heart_band.contains(heart.peak_hz) && heart.ratio >= cfg.th_heart)
                d.detection = Detection::Heartbeat;
        }
        if (d.detection != Detection::Rejected) sel.msp_bins.push_back(bin);
        sel.decisions.push_back(d);
    }

    if (sel.msp_bins.empty()) {
        const std::size_t bin = max_energy_bin(map);
        sel.msp_bins.push_back(bin);
        BinDecision d;
        d.bin = bin;
        d.detection = Detection::Fallback;
        // Keep one decision per bin: replace the candidate's rejected entry if present.
        auto it = std::find_if(sel.decisions.begin(), sel.decisions.end(),
                               [bin](const BinDecision& x) { return x.bin == bin; });
        if (it != sel.decisions.end()) {
            it->detection = Detection::Fallback;
        } else {
            sel.decisions.push_back(d);
        }
    }
    return sel;
}

BinSelection select_bins(const RangeMap& map, const SelectionConfig& cfg) {
    return msp_select(map, candidate_bins(map, cfg), cfg);
}

}  // namespace vimo
