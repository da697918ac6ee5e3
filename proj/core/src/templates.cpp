#include "vimo/templates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vimo {
namespace {

double wrap_phase(double x) { return x - std::floor(x); }

}  // namespace

// ---------------------------------------------------------------- respiration

RespirationModelCoeffs RespirationModelCoeffs::with_insp_fraction(double insp_fraction) {
    RespirationModelCoeffs c;
    c.insp_fraction = insp_fraction;
    c.a0 = 0.0;
    c.a1 = 1.0;
    c.a2 = -1.0 / (2.0 * insp_fraction);
    c.tau = 0.3 * (1.0 - insp_fraction);
    c.tau_rs = 0.1;
    return c;
}

void RespirationModelCoeffs::validate() const {
    if (!(tau > 0.0)) throw DomainError("respiration tau must be > 0");
    if (!(tau_rs > 0.0)) throw DomainError("respiration tau_rs must be > 0");
    if (!(r_rs > 0.0)) throw DomainError("respiration r_rs must be > 0");
    if (!(insp_fraction > 0.0 && insp_fraction < 1.0))
        throw DomainError("respiration insp_fraction must lie in (0, 1)");
    if (std::abs(tau - tau_rs) < 1e-12) throw DomainError("respiration tau and tau_rs must differ");
}

RespirationPulse::RespirationPulse(const RespirationModelCoeffs& coeffs) : coeffs_(coeffs) {
    coeffs_.validate();
    const double t1 = coeffs_.insp_fraction;
    const double t2 = 1.0 - t1;
    const double tr = coeffs_.tau_rs;
    const double td = coeffs_.tau;
    const double k = tr / coeffs_.r_rs;

    const double A1 = coeffs_.a2;
    const double A2 = coeffs_.a1 - 2.0 * coeffs_.a2 * tr;
    const double A3 = coeffs_.a0 - coeffs_.a1 * tr + 2.0 * coeffs_.a2 * tr * tr;

    const double p1 = coeffs_.a0 + coeffs_.a1 * t1 + coeffs_.a2 * t1 * t1;
    const double drive = p1 / (coeffs_.r_rs * (1.0 / tr - 1.0 / td));

    // Volume at t1 when starting from V(0) = 0; the periodic V0 then follows
    // from V(1) = V0 being linear in V0.
    const double c1 = k * (A1 * t1 * t1 + A2 * t1 + A3 * (1.0 - std::exp(-t1 / tr)));
    v0_ = (drive * (std::exp(-t2 / td) - std::exp(-t2 / tr)) + c1 * std::exp(-t2 / tr)) /
          (1.0 - std::exp(-1.0 / tr));

    c_a1_ = k * A1;
    c_a2_ = k * A2;
    c_a3_ = v0_ - k * A3;
    c_a4_ = k * A3;
    v_t1_ = insp_volume(t1);
    c_b1_ = drive;
    c_b2_ = v_t1_ - drive;

    // Peak: dense scan, then golden-section refinement around the best sample.
    constexpr int kScan = 20000;
    double best_s = 0.0, best_v = volume(0.0), sum = 0.0;
    for (int i = 0; i <= kScan; ++i) {
        const double s = static_cast<double>(i) / kScan;
        const double v = volume(s);
        if (v > best_v) {
            best_v = v;
            best_s = s;
        }
        // Trapezoid weights for the mean.
        sum += (i == 0 || i == kScan) ? 0.5 * v : v;
    }
    double lo = std::max(0.0, best_s - 1.0 / kScan), hi = std::min(1.0, best_s + 1.0 / kScan);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 80; ++it) {
        const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        if (volume(x1) > volume(x2))
            hi = x2;
        else
            lo = x1;
    }
    peak_ = std::max(best_v, volume(0.5 * (lo + hi)));
    mean_ = sum / kScan / peak_;
}

double RespirationPulse::insp_volume(double s) const {
    return c_a1_ * s * s + c_a2_ * s + c_a3_ * std::exp(-s / coeffs_.tau_rs) + c_a4_;
}

double RespirationPulse::exp_volume(double s) const {
    const double u = s - coeffs_.insp_fraction;
    return c_b1_ * std::exp(-u / coeffs_.tau) + c_b2_ * std::exp(-u / coeffs_.tau_rs);
}

double RespirationPulse::volume(double s) const {
    return s <= coeffs_.insp_fraction ? insp_volume(s) : exp_volume(s);
}

double RespirationPulse::operator()(double phase) const {
    // Phase exactly 1 maps to the end of expiration, which equals V0 by periodicity.
    const double s = phase == 1.0 ? 1.0 : wrap_phase(phase);
    return volume(s) / peak_;
}

double RespirationPulse::junction_gap() const {
    return std::abs(insp_volume(coeffs_.insp_fraction) - exp_volume(coeffs_.insp_fraction)) / peak_;
}

std::vector<double> respiration_unit_pulse(const RespirationModelCoeffs& coeffs, std::size_t n_points) {
    if (n_points < 2) throw DomainError("respiration_unit_pulse needs n_points >= 2");
    const RespirationPulse pulse(coeffs);
    if (pulse.junction_gap() > 1e-9) {
        std::ostringstream msg;
        msg << "respiration coefficients inconsistent: junction gap " << pulse.junction_gap();
        throw DomainError(msg.str());
    }
    std::vector<double> out(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        out[i] = pulse(static_cast<double>(i) / static_cast<double>(n_points - 1));
    return out;
}

// ------------------------------------------------------------------ heartbeat

void HeartModelCoeffs::validate() const {
    if (!(epsilon >= 1.0)) throw DomainError("heartbeat epsilon must be >= 1");
    if (!(solver_step > 0.0 && solver_step < 0.05)) throw DomainError("heartbeat solver_step must lie in (0, 0.05)");
    if (settle_cycles < 1) throw DomainError("heartbeat settle_cycles must be >= 1");
}

namespace {

struct VdpState {
    double v;
    double w;  // dv/dt
};

VdpState vdp_rhs(const VdpState& s, double eps) { return {s.w, eps * (1.0 - s.v * s.v) * s.w - s.v}; }

VdpState rk4_step(const VdpState& s, double h, double eps) {
    const VdpState k1 = vdp_rhs(s, eps);
    const VdpState k2 = vdp_rhs({s.v + 0.5 * h * k1.v, s.w + 0.5 * h * k1.w}, eps);
    const VdpState k3 = vdp_rhs({s.v + 0.5 * h * k2.v, s.w + 0.5 * h * k2.w}, eps);
    const VdpState k4 = vdp_rhs({s.v + h * k3.v, s.w + h * k3.w}, eps);
    return {s.v + h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v), s.w + h / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w)};
}

// Cubic Hermite on one step of length h, u in [0, 1].
double hermite(const VdpState& a, const VdpState& b, double h, double u) {
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * a.v + (u3 - 2 * u2 + u) * h * a.w + (-2 * u3 + 3 * u2) * b.v +
           (u3 - u2) * h * b.w;
}

double hermite_slope(const VdpState& a, const VdpState& b, double h, double u) {
    const double u2 = u * u;
    return ((6 * u2 - 6 * u) * a.v + (3 * u2 - 4 * u + 1) * h * a.w + (-6 * u2 + 6 * u) * b.v +
            (3 * u2 - 2 * u) * h * b.w) /
           h;
}

// Root of the Hermite interpolant in a step where v goes from < 0 to >= 0.
double crossing_fraction(const VdpState& a, const VdpState& b, double h) {
    double u = -a.v / (b.v - a.v);
    for (int i = 0; i < 20; ++i) {
        const double f = hermite(a, b, h, u);
        const double df = hermite_slope(a, b, h, u) * h;
        if (df == 0.0) break;
        const double next = std::clamp(u - f / df, 0.0, 1.0);
        if (std::abs(next - u) < 1e-15) break;
        u = next;
    }
    return u;
}

}  // namespace

LimitCycle solve_limit_cycle(const HeartModelCoeffs& coeffs, std::size_t n_points) {
    coeffs.validate();
    if (n_points < 2) throw DomainError("heartbeat pulse needs n_points >= 2");
    const double eps = coeffs.epsilon;
    const double h = coeffs.solver_step;
    // Relaxation period grows like (3 - 2 ln 2) eps; this bound is generous.
    const double horizon = (coeffs.settle_cycles + 3) * (2.0 * eps + 10.0);
    const auto max_steps = static_cast<std::size_t>(horizon / h) + 1;

    VdpState s{2.0, 0.0};
    int crossings = 0;
    bool recording = false;
    double t_start = 0.0;
    double cycle_t0 = 0.0;
    std::vector<VdpState> cycle;  // states at cycle_t0 + i h

    for (std::size_t step = 0; step < max_steps; ++step) {
        const double t = static_cast<double>(step) * h;
        const VdpState next = rk4_step(s, h, eps);
        if (recording) cycle.push_back(next);
        if (s.v < 0.0 && next.v >= 0.0) {
            const double tc = t + h * crossing_fraction(s, next, h);
            ++crossings;
            if (crossings == coeffs.settle_cycles + 1) {
                recording = true;
                t_start = tc;
                cycle_t0 = t;
                cycle = {s, next};
            } else if (crossings == coeffs.settle_cycles + 2) {
                LimitCycle lc;
                lc.period = tc - t_start;
                for (const auto& st : cycle) lc.amplitude = std::max(lc.amplitude, std::abs(st.v));
                lc.samples.resize(n_points);
                for (std::size_t j = 0; j < n_points; ++j) {
                    const double tj =
                        t_start + lc.period * static_cast<double>(j) / static_cast<double>(n_points - 1);
                    const double x = (tj - cycle_t0) / h;
                    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(x)));
                    i = std::min(i, cycle.size() - 2);
                    lc.samples[j] = hermite(cycle[i], cycle[i + 1], h, x - static_cast<double>(i));
                }
                // Endpoints sit on the two detected zero crossings.
                lc.samples.front() = 0.0;
                lc.samples.back() = 0.0;
                return lc;
            }
        }
        s = next;
    }
    throw SolverError("Van der Pol solver found no stable period within the integration horizon");
}

std::vector<double> heartbeat_unit_pulse(const HeartModelCoeffs& coeffs, std::size_t n_points) {
    LimitCycle lc = solve_limit_cycle(coeffs, n_points);
    double peak = 0.0;
    for (double v : lc.samples) peak = std::max(peak, std::abs(v));
    for (double& v : lc.samples) v /= peak;
    return lc.samples;
}

// -------------------------------------------------------------- sampled pulse

SampledPulse::SampledPulse(std::vector<double> closed_samples) {
    if (closed_samples.size() < 3) throw DomainError("sampled pulse needs at least 3 samples");
    closed_samples.pop_back();
    samples_ = std::move(closed_samples);
    mean_ = vimo::mean(samples_);
}

double SampledPulse::operator()(double phase) const {
    const auto n = static_cast<long>(samples_.size());
    const double x = wrap_phase(phase) * static_cast<double>(n);
    const auto i = static_cast<long>(std::floor(x));
    const double u = x - static_cast<double>(i);
    auto at = [&](long k) { return samples_[static_cast<std::size_t>(((k % n) + n) % n)]; };
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return p1 + 0.5 * u * (p2 - p0 + u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + u * (3.0 * (p1 - p2) + p3 - p0)));
}

TemplateBank TemplateBank::make(const RespirationModelCoeffs& resp, const HeartModelCoeffs& heart,
                                std::size_t heart_points) {
    return TemplateBank{RespirationPulse(resp), SampledPulse(heartbeat_unit_pulse(heart, heart_points + 1))};
}

const TemplateBank& TemplateBank::standard() {
    static const TemplateBank bank = make(RespirationModelCoeffs::defaults(), HeartModelCoeffs{});
    return bank;
}

// ------------------------------------------------------------ chest template

std::array<double, TemplateParams::kCount> TemplateParams::to_array() const {
    return {A_h, A_res, T_h, T_res, t_off_h, t_off_r, y_off_h, y_off_r, c};
}

TemplateParams TemplateParams::from_array(const std::array<double, kCount>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]};
}

TemplateParams TemplateParams::reference_example() {
    TemplateParams p;
    p.A_h = 0.00025;
    p.A_res = 0.003;
    p.T_h = 0.59;
    p.T_res = 1.25;
    p.c = 2500.0;
    return p;
}

namespace {

void check_range(const char* name, double v, double lo, double hi) {
    if (!(v >= lo && v <= hi)) {
        std::ostringstream msg;
        msg << name << " = " << v << " outside [" << lo << ", " << hi << "]";
        throw DomainError(msg.str());
    }
}

}  // namespace

void ParamBounds::check(const TemplateParams& p) const {
    check_range("A_h", p.A_h, A_h_min, A_h_max);
    check_range("A_res", p.A_res, A_res_min, A_res_max);
    check_range("T_h", p.T_h, T_h_min, T_h_max);
    check_range("T_res", p.T_res, T_res_min, T_res_max);
}

bool ParamBounds::contains(const TemplateParams& p) const {
    try {
        check(p);
        return true;
    } catch (const DomainError&) {
        return false;
    }
}

ChestSample evaluate_chest(const TemplateParams& p, const TemplateBank& bank, double t) {
    ChestSample s;
    s.resp = p.A_res * bank.respiration(wrap_phase((t - p.t_off_r) / p.T_res)) + p.y_off_r;
    s.heart = p.A_h * bank.heartbeat(wrap_phase((t - p.t_off_h) / p.T_h)) + p.y_off_h;
    s.chest = s.resp + s.heart + p.c * s.resp * s.heart;
    return s;
}

ChestWaveforms render_template(const TemplateParams& p, const TemplateBank& bank, double frame_rate,
                               std::size_t n_samples, double start_time) {
    ChestWaveforms w;
    w.resp.resize(n_samples);
    w.heart.resize(n_samples);
    w.chest.resize(n_samples);
    for (std::size_t m = 0; m < n_samples; ++m) {
        const ChestSample s = evaluate_chest(p, bank, start_time + static_cast<double>(m) / frame_rate);
        w.resp[m] = s.resp;
        w.heart[m] = s.heart;
        w.chest[m] = s.chest;
    }
    return w;
}

ChestWaveforms render_template(const TemplateParams& p, double frame_rate, double duration,
                               const TemplateBank& bank) {
    ParamBounds{}.check(p);
    if (!(duration >= std::max(p.T_res, p.T_h)))
        throw DomainError("template duration must cover at least one period of each component");
    const auto n = static_cast<std::size_t>(std::llround(duration * frame_rate));
    return render_template(p, bank, frame_rate, n);
}

DisplacementSeries synthesize_chest_motion(const TemplateParams& p, double frame_rate, std::size_t n_frames,
                                           const TemplateBank& bank) {
    ParamBounds{}.check(p);
    if (!(frame_rate >= 4.0 / p.T_h)) {
        std::ostringstream msg;
        msg << "frame_rate = " << frame_rate << " below 4 / T_h = " << 4.0 / p.T_h;
        throw DomainError(msg.str());
    }
    DisplacementSeries out;
    out.frame_rate = frame_rate;
    out.values = render_template(p, bank, frame_rate, n_frames).chest;
    return out;
}

}  // namespace vimo
