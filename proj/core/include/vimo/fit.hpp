#pragma once

// Template matching: initialization heuristics for the respiration and
// heartbeat periods, then a bound-constrained trust-region least-squares
// fit of all nine template parameters.

#include <array>
#include <string>
#include <vector>

#include "vimo/common.hpp"
#include "vimo/templates.hpp"

namespace vimo {

/// Box used by the solver. Periods and amplitudes come from the physiological
/// bounds; offsets and the coupling get wide boxes so they never bind in practice.
struct FitBounds {
    ParamBounds physio;
    double t_off_min = -10.0, t_off_max = 10.0;  // s
    double y_off_min = -0.1, y_off_max = 0.1;    // m
    double c_min = -1e4, c_max = 1e4;            // 1/m

    std::array<double, TemplateParams::kCount> lower() const;
    std::array<double, TemplateParams::kCount> upper() const;
    bool contains(const TemplateParams& p) const;
};

struct FitConfig {
    std::size_t coarse_points = 500;  // heartbeat grid size (T_h x t_off_h)
    double sse_tol = 1e-8;            // relative SSE improvement that ends the descent
    std::size_t max_iters = 200;
    FitBounds bounds;
    double initial_radius = 0.1;      // fraction of each bound span
    double ac_threshold = 0.2;        // minimum autocorrelation of an accepted respiration peak

    void validate() const;
};

struct RespInit {
    double T_res = 0.0;
    double t_off_r = 0.0;
    double A_res = 0.0;
    double y_off_r = 0.0;
    bool used_fallback = false;   // no autocorrelation peak; spectral argmax used
    bool long_period = false;     // window shorter than two periods of the estimate
    std::vector<std::string> warnings;
};

/// Respiration period from the first autocorrelation peak in [1, 10] s, phase
/// from upward zero crossings of the low-passed series against the template's,
/// then a local grid refinement with amplitude and level by least squares.
RespInit init_resp(const DisplacementSeries& x, const FitConfig& cfg = {},
                   const TemplateBank& bank = TemplateBank::standard());

struct HeartInit {
    double T_h = 0.0;
    double t_off_h = 0.0;
    double A_h = 0.0;
    bool weak = false;  // best grid heartbeat explains < 10% of the respiration residual
    std::size_t grid_T = 0, grid_off = 0;
    std::vector<double> grid_sse;  // row-major, T_h major
};

/// Exhaustive (T_h, t_off_h) grid with the respiration part held at `resp`,
/// A_h at mid-bound and c = 0. Ties go to the smallest T_h, then t_off_h.
HeartInit init_heart(const DisplacementSeries& x, const TemplateParams& resp, const FitConfig& cfg = {},
                     const TemplateBank& bank = TemplateBank::standard());

enum class Termination { SseTolerance, RadiusCollapse, ZeroResidual, MaxIterations };

const char* to_string(Termination t);

struct FitIteration {
    std::size_t iter = 0;
    double sse = 0.0;             // SSE of the trial point
    double radius = 0.0;          // scaled radius used for the step
    double ratio = 0.0;           // actual / predicted reduction
    bool accepted = false;
    TemplateParams params;        // trial point
};

struct FitResult {
    TemplateParams params;
    double sse = 0.0;
    DisplacementSeries resp_wave;
    DisplacementSeries heart_wave;
    double resp_rate_bpm = 0.0;
    double heart_rate_bpm = 0.0;
    bool converged = false;
    Termination termination = Termination::MaxIterations;
    double initial_sse = 0.0;
    std::vector<FitIteration> trace;
    std::vector<std::string> warnings;
};

/// Sum of squared residuals of the chest template against x.
double template_sse(const DisplacementSeries& x, const TemplateParams& p,
                    const TemplateBank& bank = TemplateBank::standard());

/// Gradient of template_sse from the solver's central-difference Jacobian,
/// in parameter units.
std::array<double, TemplateParams::kCount> sse_gradient(const DisplacementSeries& x, const TemplateParams& p,
                                                        const FitConfig& cfg = {},
                                                        const TemplateBank& bank = TemplateBank::standard());

/// Bound-constrained trust-region descent from `init`. Never throws on
/// non-convergence; returns the best point found.
FitResult fit_templates(const DisplacementSeries& x, const TemplateParams& init, const FitConfig& cfg = {},
                        const TemplateBank& bank = TemplateBank::standard());

/// init_resp, init_heart and fit_templates in sequence.
FitResult fit_series(const DisplacementSeries& x, const FitConfig& cfg = {},
                     const TemplateBank& bank = TemplateBank::standard());

struct Rates {
    double resp_bpm = 0.0;
    double heart_bpm = 0.0;
    bool resp_at_bound = false;
    bool heart_at_bound = false;
};

Rates extract_rates(const FitResult& result, const ParamBounds& bounds = {});

}  // namespace vimo
