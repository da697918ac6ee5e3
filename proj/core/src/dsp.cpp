#include "vimo/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace vimo::fft {
namespace {

// fftw_plan creation is not thread-safe; execution of an existing plan on new
// arrays is. Plans are made once per (length, direction) and kept for the
// process lifetime. Buffers always come from fftw_malloc so the alignment
// matches the alignment the plan was created with.
struct Buffer {
    explicit Buffer(std::size_t n) : ptr(fftw_alloc_complex(std::max<std::size_t>(n, 1))) {}
    ~Buffer() { fftw_free(ptr); }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    fftw_complex* ptr;
};

fftw_plan plan_for(std::size_t n, int sign) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, int>, fftw_plan> plans;
    std::lock_guard lock(mu);
    auto key = std::make_pair(n, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    Buffer in(n), out(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in.ptr, out.ptr, sign, FFTW_ESTIMATE);
    plans.emplace(key, p);
    return p;
}

std::vector<Complex> run(std::span<const Complex> x, int sign) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    Buffer in(n), out(n);
    static_assert(sizeof(Complex) == sizeof(fftw_complex));
    std::memcpy(in.ptr, x.data(), n * sizeof(fftw_complex));
    fftw_execute_dft(plan_for(n, sign), in.ptr, out.ptr);
    std::vector<Complex> result(n);
    for (std::size_t i = 0; i < n; ++i) result[i] = {out.ptr[i][0], out.ptr[i][1]};
    return result;
}

}  // namespace

std::vector<Complex> forward(std::span<const Complex> x) { return run(x, FFTW_FORWARD); }

std::vector<Complex> inverse(std::span<const Complex> x) {
    auto y = run(x, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(x.size());
    for (auto& v : y) v *= scale;
    return y;
}

std::vector<Complex> forward_real(std::span<const double> x) {
    std::vector<Complex> c(x.begin(), x.end());
    return forward(c);
}

}  // namespace vimo::fft

namespace vimo::dsp {

long Spectrum::peak_index() const {
    long best = -1;
    double best_power = 0.0;
    for (std::size_t k = 1; k < power.size(); ++k) {
        if (power[k] > best_power) {
            best_power = power[k];
            best = static_cast<long>(k);
        }
    }
    return best;
}

double Spectrum::peak_frequency() const {
    const long k = peak_index();
    return k < 0 ? kUndefined : freq[static_cast<std::size_t>(k)];
}

double Spectrum::energy_in(const Band& band) const {
    double e = 0.0;
    for (std::size_t k = 1; k < power.size(); ++k)
        if (band.contains(freq[k])) e += power[k];
    return e;
}

double Spectrum::energy_outside(const Band& band) const {
    double e = 0.0;
    for (std::size_t k = 1; k < power.size(); ++k)
        if (!band.contains(freq[k])) e += power[k];
    return e;
}

Spectrum power_spectrum(std::span<const double> x, double fs) { return padded_spectrum(x, fs, 1); }

Spectrum padded_spectrum(std::span<const double> x, double fs, std::size_t pad_factor) {
    const std::size_t n = x.size() * std::max<std::size_t>(pad_factor, 1);
    Spectrum s;
    if (n == 0) return s;
    std::vector<Complex> buf(n);
    std::copy(x.begin(), x.end(), buf.begin());
    const auto spec = fft::forward(buf);
    const std::size_t half = n / 2;
    s.freq.resize(half + 1);
    s.power.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        s.freq[k] = static_cast<double>(k) * fs / static_cast<double>(n);
        s.power[k] = std::norm(spec[k]);
    }
    return s;
}

namespace {

double section_q(int order, int k) {
    return 1.0 / (2.0 * std::cos(kPi * (2.0 * k + 1.0) / (2.0 * order)));
}

void check_design(int order, double cutoff_hz, double fs) {
    if (order < 2 || order % 2 != 0) throw DomainError("butterworth order must be even and >= 2");
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs / 2.0))
        throw DomainError("butterworth cutoff must lie in (0, nyquist)");
}

}  // namespace

SosFilter butter_lowpass(int order, double cutoff_hz, double fs) {
    check_design(order, cutoff_hz, fs);
    SosFilter sos;
    const double w0 = 2.0 * kPi * cutoff_hz / fs;
    const double cw = std::cos(w0), sw = std::sin(w0);
    for (int k = 0; k < order / 2; ++k) {
        const double alpha = sw / (2.0 * section_q(order, k));
        const double a0 = 1.0 + alpha;
        sos.push_back({(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0, -2.0 * cw / a0,
                       (1.0 - alpha) / a0});
    }
    return sos;
}

SosFilter butter_highpass(int order, double cutoff_hz, double fs) {
    check_design(order, cutoff_hz, fs);
    SosFilter sos;
    const double w0 = 2.0 * kPi * cutoff_hz / fs;
    const double cw = std::cos(w0), sw = std::sin(w0);
    for (int k = 0; k < order / 2; ++k) {
        const double alpha = sw / (2.0 * section_q(order, k));
        const double a0 = 1.0 + alpha;
        sos.push_back({(1.0 + cw) / 2.0 / a0, -(1.0 + cw) / a0, (1.0 + cw) / 2.0 / a0, -2.0 * cw / a0,
                       (1.0 - alpha) / a0});
    }
    return sos;
}

SosFilter butter_bandpass(int order, const Band& band, double fs) {
    if (!(band.low < band.high)) throw DomainError("band-pass requires low < high");
    SosFilter sos = butter_highpass(order, band.low, fs);
    const SosFilter lp = butter_lowpass(order, band.high, fs);
    sos.insert(sos.end(), lp.begin(), lp.end());
    return sos;
}

std::vector<double> filter(const SosFilter& sos, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    for (const Biquad& s : sos) {
        double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + s.b1 * x1 + s.b2 * x2 - s.a1 * y1 - s.a2 * y2;
            x2 = x1;
            x1 = in;
            y2 = y1;
            y1 = out;
            v = out;
        }
    }
    return y;
}

std::vector<double> filtfilt(const SosFilter& sos, std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) return {x.begin(), x.end()};
    const std::size_t pad = std::min<std::size_t>(n - 1, 6 * sos.size() + 3);
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    auto y = filter(sos, ext);
    std::reverse(y.begin(), y.end());
    y = filter(sos, y);
    std::reverse(y.begin(), y.end());
    return {y.begin() + static_cast<long>(pad), y.begin() + static_cast<long>(pad + n)};
}

std::vector<double> unwrap(std::span<const double> phase) {
    std::vector<double> out(phase.begin(), phase.end());
    double offset = 0.0;
    for (std::size_t i = 1; i < phase.size(); ++i) {
        const double d = phase[i] - phase[i - 1];
        if (d > kPi)
            offset -= 2.0 * kPi * std::ceil((d - kPi) / (2.0 * kPi));
        else if (d < -kPi)
            offset += 2.0 * kPi * std::ceil((-d - kPi) / (2.0 * kPi));
        out[i] = phase[i] + offset;
    }
    return out;
}

}  // namespace vimo::dsp
