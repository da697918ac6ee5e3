#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace vimo {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 3.0e8;  // m/s

/// Sentinel for undefined quantities (peak frequency of a zero series, PCC of a constant, ...).
inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

/// A parameter or input violated a documented bound.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or truncated file contents.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a result (e.g. no stable period found).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed frequency interval in Hz.
struct Band {
    double low = 0.0;
    double high = 0.0;

    bool contains(double f, double eps = 1e-9) const { return f >= low - eps && f <= high + eps; }
    double width() const { return high - low; }
};

/// Dense row-major complex matrix. Rows are slow time (frames), columns fast time or range bins.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    Complex* row(std::size_t r) { return data_.data() + r * cols_; }
    const Complex* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<Complex> column(std::size_t c) const {
        std::vector<Complex> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    std::vector<Complex>& data() { return data_; }
    const std::vector<Complex>& data() const { return data_; }

    bool operator==(const ComplexMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

/// Chest-wall displacement in meters sampled at the frame rate.
/// `start_time` is the time of values[0]; combining may drop edge frames so it can be > 0.
struct DisplacementSeries {
    std::vector<double> values;
    double frame_rate = 20.0;
    double start_time = 0.0;

    std::size_t size() const { return values.size(); }
    double time(std::size_t m) const { return start_time + static_cast<double>(m) / frame_rate; }
};

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);
void remove_mean(std::vector<double>& v);
double median(std::vector<double> v);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);

}  // namespace vimo
