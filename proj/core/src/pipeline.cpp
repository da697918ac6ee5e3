#include "vimo/pipeline.hpp"

#include <algorithm>
#include <cctype>

namespace vimo {

const char* to_string(Method m) {
    switch (m) {
        case Method::Pivimo: return "pivimo";
        case Method::MspFft: return "msp_fft";
        case Method::SingleBinTm: return "singlebin_tm";
        case Method::SingleBinFft: return "singlebin_fft";
    }
    return "pivimo";
}

Method method_from_string(const std::string& s) {
    std::string k = s;
    std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
    std::replace(k.begin(), k.end(), '-', '_');
    if (k == "pivimo") return Method::Pivimo;
    if (k == "msp_fft") return Method::MspFft;
    if (k == "singlebin_tm" || k == "bin_tm") return Method::SingleBinTm;
    if (k == "singlebin_fft" || k == "bin_fft") return Method::SingleBinFft;
    throw DomainError("unknown method '" + s + "' (expected pivimo, msp-fft, bin-tm or bin-fft)");
}

PipelineResult run_pipeline(const RangeMap& map, double wavelength, Method method, const PipelineConfig& cfg,
                            const TemplateBank& bank) {
    PipelineResult r;
    r.method = method;
    const bool msp = method == Method::Pivimo || method == Method::MspFft;
    const bool tm = method == Method::Pivimo || method == Method::SingleBinTm;

    if (msp) {
        r.selection = select_bins(map, cfg.selection);
        if (r.selection.used_fallback()) r.warnings.push_back("no bin passed the vital-sign tests; using max-energy bin");
        ChannelEstimate est;
        r.displacement = combine_bins(map, r.selection.msp_bins, cfg.combine, wavelength, &est);
        r.channel = est;
    } else {
        r.selection.candidates = candidate_bins(map, cfg.selection);
        const std::size_t bin = max_variance_bin(map, cfg.selection);
        r.selection.msp_bins = {bin};
        r.displacement.frame_rate = map.frame_rate;
        r.displacement.values = extract_phase(map, bin).values;
        for (double& v : r.displacement.values) v *= wavelength / (4.0 * kPi);
    }

    if (tm) {
        FitResult fit = fit_series(r.displacement, cfg.fit, bank);
        r.resp_bpm = fit.resp_rate_bpm;
        r.heart_bpm = fit.heart_rate_bpm;
        r.resp_wave = fit.resp_wave;
        r.heart_wave = fit.heart_wave;
        r.warnings.insert(r.warnings.end(), fit.warnings.begin(), fit.warnings.end());
        r.fit = std::move(fit);
    } else {
        FftEstimate est = fft_rates(r.displacement, cfg.baseline);
        r.resp_bpm = est.resp_bpm();
        r.heart_bpm = est.heart_bpm();
        r.resp_wave = est.resp_wave;
        r.heart_wave = est.heart_wave;
        r.fft = std::move(est);
    }
    return r;
}

PipelineResult run_pipeline(const IFDataCube& cube, Method method, const PipelineConfig& cfg,
                            const TemplateBank& bank) {
    cube.validate();
    const RangeMap map = cfg.clutter_removal ? preprocess(cube, cfg.window) : range_fft(cube, cfg.window);
    return run_pipeline(map, cube.config.phase_wavelength(), method, cfg, bank);
}

}  // namespace vimo
