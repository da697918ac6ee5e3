#pragma once

// Physiological waveform templates: an RC-circuit respiration pulse with a
// closed-form lung volume, a Van der Pol relaxation oscillator for the
// heartbeat, and the coupled chest-wall template built from both.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "vimo/common.hpp"

namespace vimo {

/// Shape constants of the respiration pulse. Times are fractions of one
/// breathing period, so the pulse shape is independent of the period.
struct RespirationModelCoeffs {
    // Inspiratory driving pressure P(t) = a0 + a1 t + a2 t^2.
    double a0 = 0.0;
    double a1 = 1.0;
    double a2 = -1.25;
    double tau = 0.18;    // expiratory pressure discharge constant
    double tau_rs = 0.1;  // R_rs * C_rs
    double r_rs = 1.0;    // flow resistance; cancels after normalization
    double insp_fraction = 0.4;

    /// Defaults: P(0) = 0, P peaking at the end of inspiration, tau = 0.3 of
    /// the expiratory duration, tau_rs = 0.1 of the period.
    static RespirationModelCoeffs defaults() { return {}; }
    /// Same construction for another inspiratory fraction.
    static RespirationModelCoeffs with_insp_fraction(double insp_fraction);

    void validate() const;
};

/// Closed-form respiration pulse over one unit period, peak-normalized.
///
/// Inspiration (0 <= s <= t1):  a1 s^2 + a2 s + a3 exp(-s / tau_rs) + a4
/// Expiration  (t1 <= s <= 1):  b1 exp(-(s - t1) / tau) + b2 exp(-(s - t1) / tau_rs)
///
/// The constants follow from solving P = R_rs V' + E_rs V with the
/// periodic initial volume V(0) = V(1); all are divided by the peak volume.
class RespirationPulse {
public:
    explicit RespirationPulse(const RespirationModelCoeffs& coeffs = RespirationModelCoeffs::defaults());

    /// Value at phase in [0, 1]; phases outside are wrapped.
    double operator()(double phase) const;
    /// Unnormalized lung volume from the closed form, s in [0, 1].
    double volume(double s) const;

    const RespirationModelCoeffs& coeffs() const { return coeffs_; }
    double peak_volume() const { return peak_; }
    double junction_gap() const;
    double mean() const { return mean_; }

    // Closed-form constants in the piecewise form documented above (unnormalized).
    double a1() const { return c_a1_; }
    double a2() const { return c_a2_; }
    double a3() const { return c_a3_; }
    double a4() const { return c_a4_; }
    double b1() const { return c_b1_; }
    double b2() const { return c_b2_; }
    double v0() const { return v0_; }

private:
    double insp_volume(double s) const;
    double exp_volume(double s) const;

    RespirationModelCoeffs coeffs_;
    double c_a1_ = 0, c_a2_ = 0, c_a3_ = 0, c_a4_ = 0;
    double c_b1_ = 0, c_b2_ = 0;
    double v0_ = 0;
    double v_t1_ = 0;
    double peak_ = 1.0;
    double mean_ = 0.0;
};

/// Van der Pol heartbeat model V'' - eps (1 - V^2) V' + V = 0.
struct HeartModelCoeffs {
    double epsilon = 5.0;
    double solver_step = 1e-3;  // in the oscillator's own time units
    int settle_cycles = 5;

    void validate() const;
};

/// One limit-cycle period of the Van der Pol oscillator, as extracted by the solver.
struct LimitCycle {
    double period = 0.0;     // oscillator time units
    double amplitude = 0.0;  // max |V| over the period, before normalization
    std::vector<double> samples;  // n_points over [0, 1], starting at an upward zero crossing
};

LimitCycle solve_limit_cycle(const HeartModelCoeffs& coeffs, std::size_t n_points);

/// Respiration unit pulse sampled at phases i / (n_points - 1), i.e. over the closed period [0, 1].
std::vector<double> respiration_unit_pulse(const RespirationModelCoeffs& coeffs, std::size_t n_points);

/// Heartbeat unit pulse: one limit-cycle period resampled to n_points over
/// the closed period [0, 1] and normalized to unit peak magnitude.
std::vector<double> heartbeat_unit_pulse(const HeartModelCoeffs& coeffs, std::size_t n_points);

/// Periodic table with Catmull-Rom interpolation in phase.
class SampledPulse {
public:
    SampledPulse() = default;
    /// `closed_samples` covers [0, 1] inclusive; the last sample repeats the first.
    explicit SampledPulse(std::vector<double> closed_samples);

    double operator()(double phase) const;
    std::span<const double> samples() const { return samples_; }
    double mean() const { return mean_; }

private:
    std::vector<double> samples_;
    double mean_ = 0.0;
};

/// The two unit pulses used to render chest templates.
struct TemplateBank {
    RespirationPulse respiration;
    SampledPulse heartbeat;

    static TemplateBank make(const RespirationModelCoeffs& resp, const HeartModelCoeffs& heart,
                             std::size_t heart_points = 4096);
    /// Process-wide bank built from default coefficients (computed once).
    static const TemplateBank& standard();
};

/// Control parameters of the combined chest template.
struct TemplateParams {
    double A_h = 0.0;      // m
    double A_res = 0.0;    // m
    double T_h = 1.0;      // s
    double T_res = 4.0;    // s
    double t_off_h = 0.0;  // s
    double t_off_r = 0.0;  // s
    double y_off_h = 0.0;  // m
    double y_off_r = 0.0;  // m
    double c = 0.0;        // 1/m

    static constexpr std::size_t kCount = 9;
    static constexpr std::array<const char*, kCount> kNames = {
        "A_h", "A_res", "T_h", "T_res", "t_off_h", "t_off_r", "y_off_h", "y_off_r", "c"};

    std::array<double, kCount> to_array() const;
    static TemplateParams from_array(const std::array<double, kCount>& a);

    /// Parameters of the template shown for the coupled-template example:
    /// A_h = 0.25 mm, A_res = 3 mm, T_h = 0.59 s, T_res = 1.25 s, c = 2500.
    static TemplateParams reference_example();

    bool operator==(const TemplateParams&) const = default;
};

/// The physiological constraint box on periods and amplitudes.
struct ParamBounds {
    double T_res_min = 1.0, T_res_max = 10.0;
    double T_h_min = 0.5, T_h_max = 1.25;
    double A_res_min = 0.0, A_res_max = 1e-2;
    double A_h_min = 0.0, A_h_max = 1e-3;

    /// Throws DomainError naming the first violated bound.
    void check(const TemplateParams& p) const;
    bool contains(const TemplateParams& p) const;
};

/// Template components at one instant.
struct ChestSample {
    double resp = 0.0;
    double heart = 0.0;
    double chest = 0.0;
};

ChestSample evaluate_chest(const TemplateParams& p, const TemplateBank& bank, double t);

struct ChestWaveforms {
    std::vector<double> resp;
    std::vector<double> heart;
    std::vector<double> chest;
};

/// Renders the template at t_m = start_time + m / frame_rate for m < n_samples.
ChestWaveforms render_template(const TemplateParams& p, const TemplateBank& bank, double frame_rate,
                               std::size_t n_samples, double start_time = 0.0);

/// Renders `duration` seconds (rounded to whole frames) after checking the constraint box.
ChestWaveforms render_template(const TemplateParams& p, double frame_rate, double duration,
                               const TemplateBank& bank = TemplateBank::standard());

/// Ground-truth chest motion generator. Validates the constraint box and the
/// sampling margin frame_rate >= 4 / T_h.
DisplacementSeries synthesize_chest_motion(const TemplateParams& p, double frame_rate, std::size_t n_frames,
                                           const TemplateBank& bank = TemplateBank::standard());

}  // namespace vimo
