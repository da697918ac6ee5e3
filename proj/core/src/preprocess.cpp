#include "vimo/preprocess.hpp"

#include <cmath>
#include <sstream>

#include "vimo/dsp.hpp"

namespace vimo {

std::vector<double> RangeMap::bin_energy() const {
    std::vector<double> e(n_bins(), 0.0);
    for (std::size_t m = 0; m < n_frames(); ++m) {
        const Complex* row = bins.row(m);
        for (std::size_t n = 0; n < n_bins(); ++n) e[n] += std::norm(row[n]);
    }
    return e;
}

IFDataCube remove_clutter(const IFDataCube& cube) {
    const std::size_t M = cube.samples.rows(), K = cube.samples.cols();
    if (M < 2) throw DomainError("clutter removal needs at least 2 frames");
    std::vector<Complex> mu(K);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = 0; k < K; ++k) mu[k] += cube.samples(m, k);
    for (auto& v : mu) v /= static_cast<double>(M);

    IFDataCube out = cube;
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = 0; k < K; ++k) out.samples(m, k) -= mu[k];
    return out;
}

RangeMap range_fft(const IFDataCube& cube, Window window) {
    const std::size_t M = cube.samples.rows(), K = cube.samples.cols();
    std::vector<double> w(K, 1.0);
    if (window == Window::Hann && K > 1)
        for (std::size_t k = 0; k < K; ++k) w[k] = 0.5 - 0.5 * std::cos(2.0 * kPi * k / static_cast<double>(K - 1));

    RangeMap map;
    map.bins = ComplexMatrix(M, K);
    map.bin_spacing = cube.config.range_resolution();
    map.frame_rate = cube.config.frame_rate;
    const double scale = 1.0 / std::sqrt(static_cast<double>(K));
    std::vector<Complex> buf(K);
    for (std::size_t m = 0; m < M; ++m) {
        const Complex* row = cube.samples.row(m);
        for (std::size_t k = 0; k < K; ++k) buf[k] = row[k] * w[k];
        const auto spec = fft::forward(buf);
        Complex* out = map.bins.row(m);
        for (std::size_t n = 0; n < K; ++n) out[n] = spec[n] * scale;
    }
    return map;
}

std::vector<double> unwrapped_phase(const std::vector<Complex>& series) {
    std::vector<double> ph(series.size());
    for (std::size_t m = 0; m < series.size(); ++m) ph[m] = std::arg(series[m]);
    auto out = dsp::unwrap(ph);
    remove_mean(out);
    return out;
}

PhaseSeries extract_phase(const RangeMap& map, std::size_t bin) {
    if (bin >= map.n_bins()) {
        std::ostringstream msg;
        msg << "range bin " << bin << " out of range (map has " << map.n_bins() << " bins)";
        throw DomainError(msg.str());
    }
    PhaseSeries p;
    p.bin_index = bin;
    p.frame_rate = map.frame_rate;
    p.values = unwrapped_phase(map.bins.column(bin));
    return p;
}

RangeMap preprocess(const IFDataCube& cube, Window window) { return range_fft(remove_clutter(cube), window); }

std::string phase_csv(const RangeMap& map, const std::vector<std::size_t>& bins) {
    std::vector<PhaseSeries> cols;
    for (std::size_t b : bins) cols.push_back(extract_phase(map, b));
    std::ostringstream out;
    out.precision(10);
    out << "frame";
    for (std::size_t b : bins) out << ",bin_" << b;
    out << '\n';
    for (std::size_t m = 0; m < map.n_frames(); ++m) {
        out << m;
        for (const auto& c : cols) out << ',' << c.values[m];
        out << '\n';
    }
    return out.str();
}

}  // namespace vimo
