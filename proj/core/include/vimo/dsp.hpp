#pragma once

// Spectral and filtering primitives shared by the processing modules.

#include <span>
#include <vector>

#include "vimo/common.hpp"

namespace vimo::fft {

/// Unnormalized forward DFT, X[n] = sum_k x[k] exp(-j 2 pi n k / N). Any length.
std::vector<Complex> forward(std::span<const Complex> x);
/// Inverse DFT including the 1/N factor.
std::vector<Complex> inverse(std::span<const Complex> x);
std::vector<Complex> forward_real(std::span<const double> x);

}  // namespace vimo::fft

namespace vimo::dsp {

/// One-sided periodogram |X[k]|^2 for k = 0..N/2 with bin frequencies k * fs / N.
struct Spectrum {
    std::vector<double> freq;
    std::vector<double> power;

    /// Index of the largest bin with freq in (0, nyquist]; -1 if all zero or empty.
    long peak_index() const;
    double peak_frequency() const;
    double energy_in(const Band& band) const;
    /// Energy over (0, nyquist] outside `band`.
    double energy_outside(const Band& band) const;
};

Spectrum power_spectrum(std::span<const double> x, double fs);

/// Zero-padded magnitude spectrum, used where a finer frequency grid helps peak picking.
Spectrum padded_spectrum(std::span<const double> x, double fs, std::size_t pad_factor);

/// Direct-form-I biquad with a0 normalized to 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

using SosFilter = std::vector<Biquad>;

/// Butterworth designs via the bilinear transform; `order` must be even and >= 2.
SosFilter butter_lowpass(int order, double cutoff_hz, double fs);
SosFilter butter_highpass(int order, double cutoff_hz, double fs);
/// Band-pass as a high-pass at `band.low` cascaded with a low-pass at `band.high`, each of `order`.
SosFilter butter_bandpass(int order, const Band& band, double fs);

std::vector<double> filter(const SosFilter& sos, std::span<const double> x);
/// Zero-phase forward-backward filtering with odd reflection padding at both ends.
std::vector<double> filtfilt(const SosFilter& sos, std::span<const double> x);

/// Unwrap a phase sequence: jumps larger than pi are folded by multiples of 2 pi.
std::vector<double> unwrap(std::span<const double> phase);

}  // namespace vimo::dsp
