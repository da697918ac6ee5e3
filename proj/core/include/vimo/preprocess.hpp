#pragma once

#include <string>
#include <vector>

#include "vimo/common.hpp"
#include "vimo/radar_sim.hpp"

namespace vimo {

/// Complex slow-time series per range bin: frames x bins.
struct RangeMap {
    ComplexMatrix bins;
    double bin_spacing = 0.0;  // m
    double frame_rate = 20.0;  // Hz

    std::size_t n_frames() const { return bins.rows(); }
    std::size_t n_bins() const { return bins.cols(); }
    /// Slow-time energy sum_m |X[m][n]|^2 of every bin.
    std::vector<double> bin_energy() const;
};

/// Unwrapped, mean-removed slow-time phase of one range bin, in radians.
struct PhaseSeries {
    std::vector<double> values;
    std::size_t bin_index = 0;
    double frame_rate = 20.0;
};

enum class Window { Rectangular, Hann };

/// Subtracts the slow-time mean of every fast-time sample (static background).
IFDataCube remove_clutter(const IFDataCube& cube);

/// Unitary FFT along fast time for every frame; bin n sits at range n * c / (2 B).
RangeMap range_fft(const IFDataCube& cube, Window window = Window::Rectangular);

PhaseSeries extract_phase(const RangeMap& map, std::size_t bin);

/// Unwrap + mean removal on an arbitrary complex slow-time series.
std::vector<double> unwrapped_phase(const std::vector<Complex>& series);

/// Full chain used by the pipeline: clutter removal then range FFT.
RangeMap preprocess(const IFDataCube& cube, Window window = Window::Rectangular);

/// Debug dump: one phase column per bin, header "frame,bin_<n>,...".
std::string phase_csv(const RangeMap& map, const std::vector<std::size_t>& bins);

}  // namespace vimo
