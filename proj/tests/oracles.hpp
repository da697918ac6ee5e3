#pragma once

// Reference implementations used as test oracles. They share no code with
// the library: plain O(N^2) transforms, textbook RK4, brute-force searches.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;

inline std::vector<cd> naive_dft(const std::vector<cd>& x) {
    const std::size_t n = x.size();
    std::vector<cd> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cd s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += x[i] * std::polar(1.0, -2.0 * kPi * static_cast<double>((k * i) % n) / static_cast<double>(n));
        out[k] = s;
    }
    return out;
}

/// One-sided |X_k|^2, k = 0..n/2, of the mean-removed series.
struct Periodogram {
    std::vector<double> freq, power;
};

inline Periodogram periodogram(std::vector<double> x, double fs) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    for (double& v : x) v -= m;
    const std::size_t n = x.size();
    Periodogram p;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = 2.0 * kPi * static_cast<double>((k * i) % n) / static_cast<double>(n);
            re += x[i] * std::cos(a);
            im -= x[i] * std::sin(a);
        }
        p.freq.push_back(static_cast<double>(k) * fs / static_cast<double>(n));
        p.power.push_back(re * re + im * im);
    }
    return p;
}

/// Frequency of the largest periodogram bin in (lo, hi].
inline double peak_in(const Periodogram& p, double lo, double hi) {
    double best = -1.0, f = 0.0;
    for (std::size_t k = 1; k < p.freq.size(); ++k)
        if (p.freq[k] > lo && p.freq[k] <= hi && p.power[k] > best) {
            best = p.power[k];
            f = p.freq[k];
        }
    return f;
}

/// Amplitude of a real sinusoid at frequency f (single-bin DTFT).
inline double tone_amplitude(const std::vector<double>& x, double fs, double f) {
    cd s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * std::polar(1.0, -2.0 * kPi * f * static_cast<double>(i) / fs);
    return 2.0 * std::abs(s) / static_cast<double>(x.size());
}

/// Lag (in samples) maximizing the correlation of a[i] with b[i + lag] for
/// |lag| <= max_lag: whole-series means removed, energy normalized over the
/// overlap. Ties to smaller |lag|, then the negative lag.
struct Xcorr {
    double corr = 0.0;
    long lag = 0;
};

inline Xcorr brute_xcorr(const std::vector<double>& a, const std::vector<double>& b, long max_lag) {
    Xcorr best{-2.0, 0};
    const long n = static_cast<long>(a.size());
    double ma = 0, mb = 0;
    for (long i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    for (long d = 0; d <= max_lag; ++d) {
        for (long lag : {-d, d}) {
            if (d == 0 && lag != 0) continue;
            std::vector<double> u, v;
            for (long i = 0; i < n; ++i)
                if (i + lag >= 0 && i + lag < n) {
                    u.push_back(a[i] - ma);
                    v.push_back(b[i + lag] - mb);
                }
            double suv = 0, suu = 0, svv = 0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                suv += u[i] * v[i];
                suu += u[i] * u[i];
                svv += v[i] * v[i];
            }
            const double c = (suu > 0 && svv > 0) ? suv / std::sqrt(suu * svv) : 0.0;
            if (c > best.corr + 1e-12) best = {c, lag};
        }
    }
    return best;
}

/// Van der Pol by fixed-step RK4 from (2, 0): amplitude and period of the
/// settled cycle, period from linearly interpolated upward zero crossings.
struct VdpCycle {
    double amplitude = 0.0, period = 0.0;
};

inline VdpCycle vdp_rk4(double eps, double h, int cycles = 12) {
    auto f = [eps](double v, double w, double& dv, double& dw) {
        dv = w;
        dw = eps * (1 - v * v) * w - v;
    };
    double v = 2.0, w = 0.0, t = 0.0;
    std::vector<double> ups;
    double amp = 0.0;
    while (static_cast<int>(ups.size()) < cycles) {
        double k1v, k1w, k2v, k2w, k3v, k3w, k4v, k4w;
        f(v, w, k1v, k1w);
        f(v + h / 2 * k1v, w + h / 2 * k1w, k2v, k2w);
        f(v + h / 2 * k2v, w + h / 2 * k2w, k3v, k3w);
        f(v + h * k3v, w + h * k3w, k4v, k4w);
        const double nv = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        const double nw = w + h / 6 * (k1w + 2 * k2w + 2 * k3w + k4w);
        if (v < 0 && nv >= 0) ups.push_back(t + h * (-v) / (nv - v));
        if (ups.size() >= static_cast<std::size_t>(cycles) - 2) amp = std::max(amp, std::abs(nv));
        v = nv;
        w = nw;
        t += h;
    }
    return {amp, ups[cycles - 1] - ups[cycles - 2]};
}

/// Respiration ODE r V' + (r / tau_rs) V = P(s) over unit periods, with
/// P = a0 + a1 s + a2 s^2 on [0, t1] and P(t1) exp(-(s - t1) / tau) after.
/// Integrated from V = 0 for `periods` periods by RK4 with n steps per
/// period; returns V at s = i / n of the last period (n + 1 samples).
struct RespCoeffs {
    double a0, a1, a2, tau, tau_rs, r, t1;
};

inline std::vector<double> resp_rk4(const RespCoeffs& c, std::size_t n, int periods = 4) {
    const double p1 = c.a0 + c.a1 * c.t1 + c.a2 * c.t1 * c.t1;
    auto P = [&](double s) {
        return s <= c.t1 ? c.a0 + c.a1 * s + c.a2 * s * s : p1 * std::exp(-(s - c.t1) / c.tau);
    };
    auto rhs = [&](double s, double V) { return (P(s) - c.r / c.tau_rs * V) / c.r; };
    const double h = 1.0 / static_cast<double>(n);
    double V = 0.0;
    std::vector<double> out;
    for (int p = 0; p < periods; ++p) {
        if (p == periods - 1) out.push_back(V);
        for (std::size_t i = 0; i < n; ++i) {
            // Stay on one side of the junction so P is smooth inside each step.
            const double s = static_cast<double>(i) * h;
            const double k1 = rhs(s, V);
            const double k2 = rhs(s + h / 2, V + h / 2 * k1);
            const double k3 = rhs(s + h / 2, V + h / 2 * k2);
            const double k4 = rhs(s + h - 1e-15, V + h * k3);
            V += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            if (p == periods - 1) out.push_back(V);
        }
    }
    return out;
}

/// Direct piecewise closed form of the same ODE, constants obtained by
/// matching polynomial/exponential coefficients and the periodic condition.
struct RespClosedForm {
    RespCoeffs c;
    double a1, a2, a3, a4, b1, b2;

    explicit RespClosedForm(const RespCoeffs& k) : c(k) {
        const double tr = k.tau_rs, r = k.r, t1 = k.t1, t2 = 1.0 - k.t1;
        // Particular solution a1 s^2 + a2 s + a4 of r V' + (r / tr) V = a0 + a1' s + a2' s^2.
        a1 = tr * k.a2 / r;
        a2 = tr * (k.a1 - 2.0 * r * a1) / r;
        a4 = tr * (k.a0 - r * a2) / r;
        const double p1 = k.a0 + k.a1 * t1 + k.a2 * t1 * t1;
        b1 = p1 / (r * (1.0 / tr - 1.0 / k.tau));
        const double alpha = a1 * t1 * t1 + a2 * t1 + a4 * (1.0 - std::exp(-t1 / tr));
        const double V0 =
            (b1 * (std::exp(-t2 / k.tau) - std::exp(-t2 / tr)) + alpha * std::exp(-t2 / tr)) / (1.0 - std::exp(-1.0 / tr));
        a3 = V0 - a4;
        const double Vt1 = a1 * t1 * t1 + a2 * t1 + a3 * std::exp(-t1 / tr) + a4;
        b2 = Vt1 - b1;
    }

    double operator()(double s) const {
        if (s <= c.t1) return a1 * s * s + a2 * s + a3 * std::exp(-s / c.tau_rs) + a4;
        const double u = s - c.t1;
        return b1 * std::exp(-u / c.tau) + b2 * std::exp(-u / c.tau_rs);
    }

    double peak(std::size_t n = 200000) const {
        double m = 0.0;
        for (std::size_t i = 0; i <= n; ++i) m = std::max(m, (*this)(static_cast<double>(i) / n));
        return m;
    }
};

/// IF samples of one point target: exp(j 4 pi R / lambda_max + j 2 pi f_b t_k),
/// f_b = 2 S R / c, written directly from the FMCW mixing model.
inline std::vector<cd> if_chirp(double R, double f_min, double slope, double chirp_duration, std::size_t K,
                                cd amplitude = 1.0) {
    const double c = 3.0e8;
    std::vector<cd> out(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double t = chirp_duration * static_cast<double>(k) / static_cast<double>(K);
        out[k] = amplitude * std::polar(1.0, 4.0 * kPi * R * f_min / c + 2.0 * kPi * (2.0 * slope * R / c) * t);
    }
    return out;
}

}  // namespace oracle
