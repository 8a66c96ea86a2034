#pragma once

#include "ridlab/sigmodel.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace ridlab::tfa {

using cdouble = std::complex<double>;

enum class WindowKind { Hann, Rect, Gauss };

struct StftConfig {
    WindowKind window = WindowKind::Hann;
    double gauss_sigma = 8.0;  // samples, Gauss window only
    int window_length = 64;
    int hop = 1;
    int nfft = 128;

    void validate() const;
};

/// Uniform axis: value(i) = start + i * step.
struct Axis {
    double start = 0.0;
    double step = 1.0;
    double at(std::size_t i) const { return start + static_cast<double>(i) * step; }
    /// Fractional index of value v.
    double index_of(double v) const { return (v - start) / step; }
};

enum class Normalization { Raw, UnitMax };

/// Nonnegative time-frequency magnitude grid. Row r is frequency freq_axis.at(r), column c is
/// time time_axis.at(c); values are stored row-major, rows() x cols().
class TimeFrequencyGrid {
  public:
    TimeFrequencyGrid() = default;
    TimeFrequencyGrid(std::size_t rows, std::size_t cols, Axis time_axis, Axis freq_axis,
                      Normalization tag = Normalization::Raw);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& at(std::size_t row, std::size_t col) { return values_[row * cols_ + col]; }
    double at(std::size_t row, std::size_t col) const { return values_[row * cols_ + col]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    Axis time_axis;
    Axis freq_axis;
    Normalization tag = Normalization::Raw;

    /// Span of the frequency axis; Doppler grids here always cover one full PRF so this is
    /// also the aliasing period.
    double freq_period() const { return static_cast<double>(rows_) * freq_axis.step; }
    double max_value() const;
    void validate() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// STFT output: rows = nfft frequency bins (DC centred), cols = frames; row-major.
struct StftMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<cdouble> values;
    Axis time_axis;
    Axis freq_axis;

    cdouble& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    cdouble at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

std::vector<double> make_window(const StftConfig& config);

/// Row index holding unshifted DFT bin k after centring.
std::size_t shifted_row(int k, int nfft);

/// Frame count floor((len - L) / hop) + 1.
std::size_t frame_count(std::size_t signal_length, const StftConfig& config);

StftMatrix stft(const sigmodel::ComplexSeries& signal, const StftConfig& config);

/// Elementwise |STFT|^2.
TimeFrequencyGrid spectrogram(const StftMatrix& stft_output);

TimeFrequencyGrid normalize_unit_max(const TimeFrequencyGrid& grid);

/// Resampling with half-pixel centres, so the axes keep the same physical span
/// (a full-PRF Doppler axis stays periodic with the same period).
TimeFrequencyGrid resample_bilinear(const TimeFrequencyGrid& grid, std::size_t rows,
                                    std::size_t cols);

/// Axes of a grid resampled to (rows, cols) by resample_bilinear.
Axis resampled_axis(const Axis& axis, std::size_t from, std::size_t to);

struct IdealCurve {
    std::vector<double> frequency;  // Hz, one value per time column
    double weight = 1.0;
};

struct RasterResult {
    TimeFrequencyGrid grid;
    std::size_t clamped = 0;  // samples outside the frequency span
};

/// Deposits every curve into its nearest frequency row (spread_bins = 0) or as a Gaussian of
/// width spread_bins rows centred on the exact frequency. When `periodic` the frequency axis
/// wraps with period freq_period(); otherwise out-of-span samples are clamped and counted.
/// Output is UnitMax-normalized (left all-zero when no curve deposits energy).
RasterResult rasterize_ideal_tfr(const std::vector<IdealCurve>& curves, std::size_t rows,
                                 const Axis& time_axis, const Axis& freq_axis,
                                 double spread_bins = 0.0, bool periodic = false);

}  // namespace ridlab::tfa
