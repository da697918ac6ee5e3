#include "vimo/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vimo/dsp.hpp"

namespace vimo {

namespace {

constexpr std::size_t kP = TemplateParams::kCount;
using Vec = Eigen::Matrix<double, kP, 1>;
using Mat = Eigen::Matrix<double, kP, kP>;

double wrap_into(double v, double period) {
    double r = std::fmod(v, period);
    if (r < 0.0) r += period;
    if (r >= period) r -= period;
    return r;
}

std::vector<double> chest_values(const DisplacementSeries& x, const TemplateParams& p, const TemplateBank& bank) {
    return render_template(p, bank, x.frame_rate, x.size(), x.start_time).chest;
}

/// Upward crossings of the mean level, linearly interpolated, in seconds.
std::vector<double> upward_crossings(const std::vector<double>& v, const DisplacementSeries& ref) {
    std::vector<double> out;
    const double mu = mean(v);
    for (std::size_t m = 0; m + 1 < v.size(); ++m) {
        const double a = v[m] - mu, b = v[m + 1] - mu;
        if (a < 0.0 && b >= 0.0) {
            const double frac = a / (a - b);
            out.push_back(ref.time(m) + frac / ref.frame_rate);
        }
    }
    return out;
}

double circular_mean(const std::vector<double>& v, double period) {
    double s = 0.0, c = 0.0;
    for (double t : v) {
        const double ang = 2.0 * kPi * t / period;
        s += std::sin(ang);
        c += std::cos(ang);
    }
    return wrap_into(std::atan2(s, c) / (2.0 * kPi) * period, period);
}

struct LinearFit {
    double gain = 0.0;
    double level = 0.0;
    double sse = 0.0;
};

/// Least-squares x ~ gain * u + level.
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& u) {
    const double mx = mean(x), mu = mean(u);
    double suu = 0.0, sux = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        suu += (u[i] - mu) * (u[i] - mu);
        sux += (u[i] - mu) * (x[i] - mx);
    }
    LinearFit f;
    f.gain = suu > 0.0 ? sux / suu : 0.0;
    f.level = mx - f.gain * mu;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = x[i] - f.gain * u[i] - f.level;
        f.sse += e * e;
    }
    return f;
}

std::vector<double> unit_resp(const DisplacementSeries& x, double T, double t_off, const TemplateBank& bank) {
    std::vector<double> u(x.size());
    for (std::size_t m = 0; m < x.size(); ++m) {
        double ph = (x.time(m) - t_off) / T;
        ph -= std::floor(ph);
        u[m] = bank.respiration(ph);
    }
    return u;
}

}  // namespace

std::array<double, kP> FitBounds::lower() const {
    return {physio.A_h_min, physio.A_res_min, physio.T_h_min, physio.T_res_min, t_off_min, t_off_min,
            y_off_min,      y_off_min,        c_min};
}

std::array<double, kP> FitBounds::upper() const {
    return {physio.A_h_max, physio.A_res_max, physio.T_h_max, physio.T_res_max, t_off_max, t_off_max,
            y_off_max,      y_off_max,        c_max};
}

bool FitBounds::contains(const TemplateParams& p) const {
    const auto v = p.to_array();
    const auto lo = lower(), hi = upper();
    for (std::size_t i = 0; i < kP; ++i)
        if (!(v[i] >= lo[i] && v[i] <= hi[i])) return false;
    return true;
}

void FitConfig::validate() const {
    if (coarse_points < 1) throw DomainError("coarse_points must be >= 1");
    if (!(sse_tol > 0.0)) throw DomainError("sse_tol must be > 0");
    if (!(initial_radius > 0.0 && initial_radius <= 1.0)) throw DomainError("initial_radius must lie in (0, 1]");
    const auto lo = bounds.lower(), hi = bounds.upper();
    for (std::size_t i = 0; i < kP; ++i)
        if (!(lo[i] < hi[i])) {
            std::ostringstream msg;
            msg << "fit bound for " << TemplateParams::kNames[i] << " is empty";
            throw DomainError(msg.str());
        }
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::SseTolerance: return "sse_tolerance";
        case Termination::RadiusCollapse: return "radius_collapse";
        case Termination::ZeroResidual: return "zero_residual";
        case Termination::MaxIterations: return "max_iterations";
    }
    return "max_iterations";
}

// ---------------------------------------------------------------- init_resp

RespInit init_resp(const DisplacementSeries& x, const FitConfig& cfg, const TemplateBank& bank) {
    const std::size_t n = x.size();
    const double fs = x.frame_rate;
    if (n < 8) throw DomainError("init_resp needs at least 8 samples");
    const ParamBounds& pb = cfg.bounds.physio;

    std::vector<double> xs = x.values;
    remove_mean(xs);
    RespInit out;

    // Biased autocorrelation r(l) = sum x[m] x[m + l] / sum x^2; lags up to two thirds of the window.
    const long l_min = static_cast<long>(std::ceil(pb.T_res_min * fs));
    const long l_max = std::min(static_cast<long>(std::floor(pb.T_res_max * fs)), static_cast<long>(2 * n / 3));
    const long kNeighborhood = 5;
    double energy = 0.0;
    for (double v : xs) energy += v * v;
    auto ac = [&](long lag) {
        double sxy = 0.0;
        for (std::size_t m = 0; m + static_cast<std::size_t>(lag) < n; ++m) sxy += xs[m] * xs[m + lag];
        return energy > 0.0 ? sxy / energy : 0.0;
    };

    double T = kUndefined;
    if (l_max > l_min) {
        const long lo = std::max(1L, l_min - kNeighborhood);
        const long hi = std::min(static_cast<long>(n) - 2, l_max + kNeighborhood);
        std::vector<double> r(static_cast<std::size_t>(hi + 2), 0.0);
        for (long l = lo - 1; l <= hi + 1; ++l) r[l] = ac(l);
        for (long l = l_min; l <= l_max; ++l) {
            if (r[l] < cfg.ac_threshold) continue;
            bool peak = r[l] > r[l - 1] && r[l] >= r[l + 1];
            for (long k = std::max(lo, l - kNeighborhood); peak && k <= std::min(hi, l + kNeighborhood); ++k)
                if (r[k] > r[l]) peak = false;
            if (!peak) continue;
            // Parabolic interpolation of the peak lag.
            const double y0 = r[l - 1], y1 = r[l], y2 = r[l + 1];
            const double den = y0 - 2.0 * y1 + y2;
            const double delta = den < 0.0 ? 0.5 * (y0 - y2) / den : 0.0;
            T = (static_cast<double>(l) + std::clamp(delta, -0.5, 0.5)) / fs;
            break;
        }
    }

    if (std::isnan(T)) {
        out.used_fallback = true;
        const auto spec = dsp::padded_spectrum(xs, fs, 8);
        const Band band{1.0 / pb.T_res_max, 1.0 / pb.T_res_min};
        double best = -1.0, f_best = kUndefined;
        for (std::size_t k = 1; k < spec.freq.size(); ++k)
            if (band.contains(spec.freq[k]) && spec.power[k] > best) {
                best = spec.power[k];
                f_best = spec.freq[k];
            }
        T = std::isnan(f_best) || best <= 0.0 ? 0.5 * (pb.T_res_min + pb.T_res_max) : 1.0 / f_best;
        out.warnings.push_back("low periodicity: no autocorrelation peak above threshold, using spectral argmax");
    }
    T = std::clamp(T, pb.T_res_min, pb.T_res_max);

    // Phase from upward zero crossings of the low-passed series and template.
    const double fc = std::min(1.5 / T, 0.45 * fs);
    const auto lp = dsp::butter_lowpass(4, fc, fs);
    const auto xf = dsp::filtfilt(lp, xs);
    const auto uf = dsp::filtfilt(lp, unit_resp(x, T, 0.0, bank));
    const auto cx = upward_crossings(xf, x);
    const auto cu = upward_crossings(uf, x);
    double t_off = 0.0;
    if (!cx.empty() && !cu.empty()) {
        if (cx.size() >= 2) {
            // Slope of crossing times against cycle index refines the period.
            std::vector<double> k(cx.size());
            for (std::size_t i = 0; i < cx.size(); ++i) k[i] = std::round((cx[i] - cx[0]) / T);
            const double mk = mean(k), mt = mean(cx);
            double skk = 0.0, skt = 0.0;
            for (std::size_t i = 0; i < cx.size(); ++i) {
                skk += (k[i] - mk) * (k[i] - mk);
                skt += (k[i] - mk) * (cx[i] - mt);
            }
            if (skk > 0.0) {
                const double slope = skt / skk;
                if (std::abs(slope - T) < 0.2 * T) T = std::clamp(slope, pb.T_res_min, pb.T_res_max);
            }
        }
        const double phase_u = circular_mean(cu, T);
        std::vector<double> d(cx.size());
        for (std::size_t i = 0; i < cx.size(); ++i) d[i] = cx[i] - phase_u;
        t_off = circular_mean(d, T);
    }

    // Local refinement: +-10% in period and phase, amplitude by least squares.
    double best_sse = std::numeric_limits<double>::infinity();
    RespInit best = out;
    for (int i = -10; i <= 10; ++i) {
        const double Ti = std::clamp(T * (1.0 + 0.01 * i), pb.T_res_min, pb.T_res_max);
        for (int j = -10; j <= 10; ++j) {
            const double oj = wrap_into(t_off + 0.01 * j * Ti, Ti);
            const auto fitlin = fit_linear(x.values, unit_resp(x, Ti, oj, bank));
            if (fitlin.gain <= 0.0) continue;
            if (fitlin.sse < best_sse) {
                best_sse = fitlin.sse;
                best.T_res = Ti;
                best.t_off_r = oj;
                best.A_res = fitlin.gain;
                best.y_off_r = fitlin.level;
            }
        }
    }
    if (!std::isfinite(best_sse)) {
        // No positive-gain fit anywhere: keep the crossing estimate, amplitude from the range.
        best.T_res = T;
        best.t_off_r = t_off;
        const auto [mn, mx] = std::minmax_element(xf.begin(), xf.end());
        best.A_res = *mx - *mn;
        best.y_off_r = mean(x.values) - best.A_res * bank.respiration.mean();
    }
    best.A_res = std::clamp(best.A_res, pb.A_res_min, pb.A_res_max);
    best.y_off_r = std::clamp(best.y_off_r, cfg.bounds.y_off_min, cfg.bounds.y_off_max);
    if (2.0 * best.T_res > static_cast<double>(n) / fs) {
        best.long_period = true;
        best.warnings.push_back("window shorter than two respiration periods");
    }
    return best;
}

// --------------------------------------------------------------- init_heart

HeartInit init_heart(const DisplacementSeries& x, const TemplateParams& resp, const FitConfig& cfg,
                     const TemplateBank& bank) {
    cfg.validate();
    const ParamBounds& pb = cfg.bounds.physio;
    HeartInit out;
    out.grid_T = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(cfg.coarse_points) * 1.25))));
    out.grid_off = std::max<std::size_t>(1, cfg.coarse_points / out.grid_T);
    out.A_h = 0.5 * (pb.A_h_min + pb.A_h_max);

    TemplateParams p = resp;
    p.A_h = out.A_h;
    p.c = 0.0;
    p.y_off_h = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.grid_T; ++i) {
        p.T_h = out.grid_T == 1 ? pb.T_h_min
                                : pb.T_h_min + (pb.T_h_max - pb.T_h_min) * static_cast<double>(i) /
                                                   static_cast<double>(out.grid_T - 1);
        for (std::size_t j = 0; j < out.grid_off; ++j) {
            p.t_off_h = p.T_h * static_cast<double>(j) / static_cast<double>(out.grid_off);
            const double s = template_sse(x, p, bank);
            out.grid_sse.push_back(s);
            if (s < best) {
                best = s;
                out.T_h = p.T_h;
                out.t_off_h = p.t_off_h;
            }
        }
    }
    // Share of the respiration residual explained by the best grid heartbeat at its least-squares gain.
    TemplateParams r0 = resp;
    r0.A_h = 0.0;
    r0.c = 0.0;
    r0.y_off_h = 0.0;
    TemplateParams pb_best = r0;
    pb_best.A_h = out.A_h;
    pb_best.T_h = out.T_h;
    pb_best.t_off_h = out.t_off_h;
    const auto y0 = chest_values(x, r0, bank);
    const auto y1 = chest_values(x, pb_best, bank);
    double rd = 0.0, dd = 0.0, rr = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) {
        const double r = x.values[m] - y0[m], d = y1[m] - y0[m];
        rd += r * d;
        dd += d * d;
        rr += r * r;
    }
    out.weak = !(dd > 0.0 && rr > 0.0) || rd * rd / (dd * rr) < 0.1;
    return out;
}

// ----------------------------------------------------------- trust region

double template_sse(const DisplacementSeries& x, const TemplateParams& p, const TemplateBank& bank) {
    const auto y = chest_values(x, p, bank);
    double s = 0.0;
    for (std::size_t m = 0; m < y.size(); ++m) {
        const double e = y[m] - x.values[m];
        s += e * e;
    }
    return s;
}

namespace {

struct Problem {
    const DisplacementSeries& x;
    const TemplateBank& bank;
    std::array<double, kP> lo, hi, span;

    TemplateParams to_params(const Vec& z) const {
        std::array<double, kP> a;
        for (std::size_t i = 0; i < kP; ++i) a[i] = lo[i] + span[i] * z[i];
        return TemplateParams::from_array(a);
    }
    Vec to_scaled(const TemplateParams& p) const {
        const auto a = p.to_array();
        Vec z;
        for (std::size_t i = 0; i < kP; ++i) z[i] = std::clamp((a[i] - lo[i]) / span[i], 0.0, 1.0);
        return z;
    }
    Eigen::VectorXd residual(const Vec& z) const {
        const auto y = chest_values(x, to_params(z), bank);
        Eigen::VectorXd e(y.size());
        for (std::size_t m = 0; m < y.size(); ++m) e[m] = y[m] - x.values[m];
        return e;
    }
    /// Central differences in scaled coordinates, one-sided against a bound.
    Eigen::MatrixXd jacobian(const Vec& z) const {
        constexpr double h = 1e-6;
        Eigen::MatrixXd J(x.size(), kP);
        for (std::size_t i = 0; i < kP; ++i) {
            const double hp = std::min(h, 1.0 - z[i]);
            const double hm = std::min(h, z[i]);
            Vec zp = z, zm = z;
            zp[i] += hp;
            zm[i] -= hm;
            J.col(i) = (residual(zp) - residual(zm)) / (hp + hm);
        }
        return J;
    }
};

Problem make_problem(const DisplacementSeries& x, const FitConfig& cfg, const TemplateBank& bank) {
    Problem pr{x, bank, cfg.bounds.lower(), cfg.bounds.upper(), {}};
    for (std::size_t i = 0; i < kP; ++i) pr.span[i] = pr.hi[i] - pr.lo[i];
    return pr;
}

}  // namespace

std::array<double, kP> sse_gradient(const DisplacementSeries& x, const TemplateParams& p, const FitConfig& cfg,
                                    const TemplateBank& bank) {
    const Problem pr = make_problem(x, cfg, bank);
    const Vec z = pr.to_scaled(p);
    const Eigen::VectorXd g = 2.0 * pr.jacobian(z).transpose() * pr.residual(z);
    std::array<double, kP> out;
    for (std::size_t i = 0; i < kP; ++i) out[i] = g[i] / pr.span[i];
    return out;
}

FitResult fit_templates(const DisplacementSeries& x, const TemplateParams& init, const FitConfig& cfg,
                        const TemplateBank& bank) {
    cfg.validate();
    if (x.size() < 2) throw DomainError("fit_templates needs at least 2 samples");
    if (!cfg.bounds.contains(init)) {
        cfg.bounds.physio.check(init);
        throw DomainError("initial offsets or coupling outside the fit box");
    }
    const Problem pr = make_problem(x, cfg, bank);

    FitResult res;
    Vec z = pr.to_scaled(init);
    // The first residual uses init itself; the scaled round trip is not bit-exact.
    TemplateParams current = init;
    Eigen::VectorXd e;
    {
        const auto y = chest_values(x, init, bank);
        e.resize(static_cast<Eigen::Index>(y.size()));
        for (std::size_t m = 0; m < y.size(); ++m) e[static_cast<Eigen::Index>(m)] = y[m] - x.values[m];
    }
    double f = e.squaredNorm();
    res.initial_sse = f;
    double radius = cfg.initial_radius;
    res.termination = Termination::MaxIterations;

    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        if (f == 0.0) {
            res.termination = Termination::ZeroResidual;
            break;
        }
        const Eigen::MatrixXd J = pr.jacobian(z);
        const Vec g = J.transpose() * e;
        const Mat H = J.transpose() * J;
        if (g.norm() == 0.0) {
            res.termination = Termination::SseTolerance;
            break;
        }
        const Eigen::SelfAdjointEigenSolver<Mat> eig(H);
        const Vec lam = eig.eigenvalues().cwiseMax(0.0);
        const Vec gt = eig.eigenvectors().transpose() * g;
        const double cutoff = 1e-12 * std::max(lam.maxCoeff(), 1e-300);
        auto step = [&](double mu) {
            Vec w;
            for (std::size_t i = 0; i < kP; ++i) {
                const double d = lam[i] + mu;
                w[i] = d > cutoff ? -gt[i] / d : 0.0;
            }
            return Vec(eig.eigenvectors() * w);
        };

        Vec s = step(0.0);
        if (s.norm() > radius) {
            // Levenberg parameter with ||s(mu)|| = radius; ||s(mu)|| <= ||g|| / mu bounds the bracket.
            double mu_lo = 0.0, mu_hi = g.norm() / radius;
            for (int k = 0; k < 100; ++k) {
                const double mu = 0.5 * (mu_lo + mu_hi);
                if (step(mu).norm() > radius)
                    mu_lo = mu;
                else
                    mu_hi = mu;
            }
            s = step(mu_hi);
        }

        Vec z_trial = (z + s).cwiseMax(0.0).cwiseMin(1.0);
        const Vec s_eff = z_trial - z;
        const double pred = -(g.dot(s_eff) + 0.5 * s_eff.dot(H * s_eff));
        const Eigen::VectorXd e_trial = pr.residual(z_trial);
        const double f_trial = e_trial.squaredNorm();
        const double actual = 0.5 * (f - f_trial);
        const double rho = pred > 0.0 ? actual / pred : -1.0;

        FitIteration it;
        it.iter = iter;
        it.sse = f_trial;
        it.radius = radius;
        it.ratio = rho;
        it.params = pr.to_params(z_trial);
        it.accepted = f_trial < f && rho > 1e-4;
        res.trace.push_back(it);

        const double step_norm = s_eff.norm();
        if (it.accepted) {
            const double rel = (f - f_trial) / f;
            z = z_trial;
            current = it.params;
            e = e_trial;
            f = f_trial;
            if (rel < cfg.sse_tol) {
                res.termination = Termination::SseTolerance;
                break;
            }
        }
        if (rho < 0.25)
            radius = 0.25 * std::max(step_norm, 1e-3 * radius);
        else if (rho > 0.75 && step_norm > 0.9 * radius)
            radius = std::min(2.0 * radius, 1.0);
        if (radius < 1e-10) {
            res.termination = Termination::RadiusCollapse;
            break;
        }
    }

    res.params = current;
    res.sse = f;
    res.converged = res.termination != Termination::MaxIterations;
    const auto w = render_template(res.params, bank, x.frame_rate, x.size(), x.start_time);
    res.resp_wave = DisplacementSeries{w.resp, x.frame_rate, x.start_time};
    res.heart_wave = DisplacementSeries{w.heart, x.frame_rate, x.start_time};
    res.resp_rate_bpm = 60.0 / res.params.T_res;
    res.heart_rate_bpm = 60.0 / res.params.T_h;
    if (!res.converged) res.warnings.push_back("trust region reached max_iters before the SSE tolerance");
    return res;
}

FitResult fit_series(const DisplacementSeries& x, const FitConfig& cfg, const TemplateBank& bank) {
    const RespInit ri = init_resp(x, cfg, bank);
    TemplateParams p;
    p.T_res = ri.T_res;
    p.t_off_r = ri.t_off_r;
    p.A_res = ri.A_res;
    p.y_off_r = ri.y_off_r;
    const HeartInit hi = init_heart(x, p, cfg, bank);
    p.T_h = hi.T_h;
    p.t_off_h = hi.t_off_h;
    p.A_h = hi.A_h;
    FitResult res = fit_templates(x, p, cfg, bank);
    res.warnings.insert(res.warnings.begin(), ri.warnings.begin(), ri.warnings.end());
    if (hi.weak) res.warnings.push_back("weak heartbeat: grid SSE nearly flat in T_h");
    return res;
}

Rates extract_rates(const FitResult& result, const ParamBounds& bounds) {
    Rates r;
    r.resp_bpm = 60.0 / result.params.T_res;
    r.heart_bpm = 60.0 / result.params.T_h;
    constexpr double eps = 1e-9;
    r.resp_at_bound = std::abs(result.params.T_res - bounds.T_res_min) < eps ||
                      std::abs(result.params.T_res - bounds.T_res_max) < eps;
    r.heart_at_bound =
        std::abs(result.params.T_h - bounds.T_h_min) < eps || std::abs(result.params.T_h - bounds.T_h_max) < eps;
    return r;
}

}  // namespace vimo
