#pragma once

// End-to-end wiring of the four estimation methods on one IF cube.

#include <optional>
#include <string>
#include <vector>

#include "vimo/binselect.hpp"
#include "vimo/combine.hpp"
#include "vimo/eval.hpp"
#include "vimo/fit.hpp"
#include "vimo/preprocess.hpp"
#include "vimo/radar_sim.hpp"

namespace vimo {

/// pivimo: MSP bins + coherent combining + template matching.
/// msp_fft: MSP bins + coherent combining + band-pass/FFT.
/// singlebin_tm: one max-variance bin + template matching.
/// singlebin_fft: one max-variance bin + band-pass/FFT.
enum class Method { Pivimo, MspFft, SingleBinTm, SingleBinFft };

inline constexpr Method kAllMethods[] = {Method::Pivimo, Method::MspFft, Method::SingleBinTm, Method::SingleBinFft};

const char* to_string(Method m);
/// Accepts the report names (pivimo, msp_fft, singlebin_tm, singlebin_fft)
/// and the command-line names (msp-fft, bin-tm, bin-fft).
Method method_from_string(const std::string& s);

struct PipelineConfig {
    bool clutter_removal = false;  // slow-time mean subtraction before the range FFT
    Window window = Window::Rectangular;
    SelectionConfig selection;
    CombineConfig combine;
    FitConfig fit;
    BaselineConfig baseline;
};

struct PipelineResult {
    Method method = Method::Pivimo;
    BinSelection selection;            // MSP methods; single-bin methods record only their bin
    std::optional<ChannelEstimate> channel;
    DisplacementSeries displacement;
    std::optional<FitResult> fit;      // template-matching methods
    std::optional<FftEstimate> fft;    // FFT methods
    double resp_bpm = kUndefined;
    double heart_bpm = kUndefined;
    DisplacementSeries resp_wave;
    DisplacementSeries heart_wave;
    std::vector<std::string> warnings;
};

PipelineResult run_pipeline(const IFDataCube& cube, Method method, const PipelineConfig& cfg = {},
                            const TemplateBank& bank = TemplateBank::standard());

/// Same, starting from an already preprocessed range map.
PipelineResult run_pipeline(const RangeMap& map, double wavelength, Method method, const PipelineConfig& cfg = {},
                            const TemplateBank& bank = TemplateBank::standard());

}  // namespace vimo
