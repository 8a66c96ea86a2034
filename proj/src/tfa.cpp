#include "ridlab/tfa.hpp"

#include "ridlab/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>

namespace ridlab::tfa {

namespace {

constexpr double kPi = sigmodel::kPi;

// FFTW planning is not thread-safe; execution with new-array execute is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

struct FftwPlan {
    fftw_plan plan = nullptr;
    ~FftwPlan() {
        if (plan) {
            std::lock_guard lock(plan_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

}  // namespace

void StftConfig::validate() const {
    require(window_length > 0 && window_length <= nfft, "need 0 < window_length <= nfft");
    require(hop > 0 && hop <= window_length, "need 0 < hop <= window_length");
    if (window == WindowKind::Gauss) require(gauss_sigma > 0.0, "gauss sigma must be positive");
}

TimeFrequencyGrid::TimeFrequencyGrid(std::size_t rows, std::size_t cols, Axis time_axis_,
                                     Axis freq_axis_, Normalization tag_)
    : time_axis(time_axis_), freq_axis(freq_axis_), tag(tag_), rows_(rows), cols_(cols),
      values_(rows * cols, 0.0) {}

double TimeFrequencyGrid::max_value() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

void TimeFrequencyGrid::validate() const {
    require(rows_ >= 1 && cols_ >= 1, "grid must be at least 1x1");
    require(time_axis.step > 0.0 && freq_axis.step > 0.0, "grid axes must be increasing");
    for (double v : values_) require(std::isfinite(v) && v >= 0.0, "grid values must be finite and >= 0");
}

std::vector<double> make_window(const StftConfig& config) {
    config.validate();
    const int n = config.window_length;
    std::vector<double> w(n, 1.0);
    switch (config.window) {
        case WindowKind::Rect:
            break;
        case WindowKind::Hann:
            if (n > 1)
                for (int m = 0; m < n; ++m) w[m] = 0.5 - 0.5 * std::cos(2.0 * kPi * m / (n - 1));
            break;
        case WindowKind::Gauss: {
            const double centre = 0.5 * (n - 1);
            for (int m = 0; m < n; ++m) {
                const double u = (m - centre) / config.gauss_sigma;
                w[m] = std::exp(-0.5 * u * u);
            }
            break;
        }
    }
    return w;
}

std::size_t shifted_row(int k, int nfft) {
    const int half = nfft / 2;
    int row = k + half;
    row %= nfft;
    if (row < 0) row += nfft;
    return static_cast<std::size_t>(row);
}

std::size_t frame_count(std::size_t signal_length, const StftConfig& config) {
    if (signal_length < static_cast<std::size_t>(config.window_length)) return 0;
    return (signal_length - config.window_length) / config.hop + 1;
}

StftMatrix stft(const sigmodel::ComplexSeries& signal, const StftConfig& config) {
    config.validate();
    if (signal.size() < static_cast<std::size_t>(config.window_length))
        throw PreconditionError("signal shorter than the STFT window");
    const auto window = make_window(config);
    const int nfft = config.nfft;
    const int len = config.window_length;
    const std::size_t frames = frame_count(signal.size(), config);

    StftMatrix out;
    out.rows = static_cast<std::size_t>(nfft);
    out.cols = frames;
    out.values.assign(out.rows * out.cols, cdouble(0.0));
    const double fs = signal.sample_rate;
    out.time_axis = Axis{signal.start_time + 0.5 * (len - 1) / fs, config.hop / fs};
    out.freq_axis = Axis{-static_cast<double>(nfft / 2) * fs / nfft, fs / nfft};

    FftwBuffer in(nfft), spec(nfft);
    FftwPlan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan.plan = fftw_plan_dft_1d(nfft, in.data, spec.data, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t t = 0; t < frames; ++t) {
        const std::size_t offset = t * static_cast<std::size_t>(config.hop);
        for (int m = 0; m < nfft; ++m) {
            if (m < len) {
                const cdouble v = signal.samples[offset + m] * window[m];
                in.data[m][0] = v.real();
                in.data[m][1] = v.imag();
            } else {
                in.data[m][0] = 0.0;
                in.data[m][1] = 0.0;
            }
        }
        fftw_execute_dft(plan.plan, in.data, spec.data);
        for (int k = 0; k < nfft; ++k) {
            const int signed_k = k < nfft - nfft / 2 ? k : k - nfft;
            out.at(shifted_row(signed_k, nfft), t) = cdouble(spec.data[k][0], spec.data[k][1]);
        }
    }
    return out;
}

TimeFrequencyGrid spectrogram(const StftMatrix& s) {
    require(s.values.size() == s.rows * s.cols && s.rows > 0 && s.cols > 0, "malformed STFT matrix");
    TimeFrequencyGrid g(s.rows, s.cols, s.time_axis, s.freq_axis, Normalization::Raw);
    for (std::size_t i = 0; i < s.values.size(); ++i) g.values()[i] = std::norm(s.values[i]);
    return g;
}

TimeFrequencyGrid normalize_unit_max(const TimeFrequencyGrid& grid) {
    const double peak = grid.max_value();
    if (!(peak > 0.0)) throw PreconditionError("cannot normalize an all-zero grid");
    TimeFrequencyGrid out = grid;
    if (grid.tag == Normalization::UnitMax && peak == 1.0) return out;
    for (double& v : out.values()) v /= peak;
    out.tag = Normalization::UnitMax;
    return out;
}

Axis resampled_axis(const Axis& axis, std::size_t from, std::size_t to) {
    const double ratio = static_cast<double>(from) / static_cast<double>(to);
    return Axis{axis.start + 0.5 * (ratio - 1.0) * axis.step, axis.step * ratio};
}

TimeFrequencyGrid resample_bilinear(const TimeFrequencyGrid& grid, std::size_t rows,
                                    std::size_t cols) {
    require(rows >= 1 && cols >= 1, "target size must be positive");
    require(grid.rows() >= 1 && grid.cols() >= 1, "source grid is empty");
    TimeFrequencyGrid out(rows, cols, resampled_axis(grid.time_axis, grid.cols(), cols),
                          resampled_axis(grid.freq_axis, grid.rows(), rows), grid.tag);
    if (rows == grid.rows() && cols == grid.cols()) {
        out.values() = grid.values();
        out.time_axis = grid.time_axis;
        out.freq_axis = grid.freq_axis;
        return out;
    }
    struct Tap {
        std::size_t lo, hi;
        double frac;
    };
    auto taps = [](std::size_t from, std::size_t to) {
        std::vector<Tap> t(to);
        const double ratio = static_cast<double>(from) / static_cast<double>(to);
        for (std::size_t i = 0; i < to; ++i) {
            double x = (static_cast<double>(i) + 0.5) * ratio - 0.5;
            x = std::clamp(x, 0.0, static_cast<double>(from - 1));
            const auto lo = static_cast<std::size_t>(std::floor(x));
            t[i] = {lo, std::min(lo + 1, from - 1), x - static_cast<double>(lo)};
        }
        return t;
    };
    const auto rt = taps(grid.rows(), rows);
    const auto ct = taps(grid.cols(), cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double a = grid.at(rt[r].lo, ct[c].lo);
            const double b = grid.at(rt[r].lo, ct[c].hi);
            const double d = grid.at(rt[r].hi, ct[c].lo);
            const double e = grid.at(rt[r].hi, ct[c].hi);
            const double top = a + (b - a) * ct[c].frac;
            const double bottom = d + (e - d) * ct[c].frac;
            out.at(r, c) = top + (bottom - top) * rt[r].frac;
        }
    }
    return out;
}

RasterResult rasterize_ideal_tfr(const std::vector<IdealCurve>& curves, std::size_t rows,
                                 const Axis& time_axis, const Axis& freq_axis, double spread_bins,
                                 bool periodic) {
    require(rows >= 1, "raster needs at least one row");
    require(spread_bins >= 0.0, "spread must be non-negative");
    std::size_t cols = 0;
    for (const auto& c : curves) {
        if (cols == 0) cols = c.frequency.size();
        require(c.frequency.size() == cols, "curves must share the time axis length");
        require(c.weight >= 0.0, "curve weights must be non-negative");
    }
    require(cols >= 1, "at least one curve with one sample is required");

    RasterResult result;
    result.grid = TimeFrequencyGrid(rows, cols, time_axis, freq_axis, Normalization::Raw);
    auto& g = result.grid;
    const auto n_rows = static_cast<long>(rows);
    for (const auto& curve : curves) {
        for (std::size_t c = 0; c < cols; ++c) {
            double pos = freq_axis.index_of(curve.frequency[c]);
            if (periodic) {
                pos = std::fmod(pos, static_cast<double>(rows));
                if (pos < 0.0) pos += static_cast<double>(rows);
            } else if (pos < -0.5 || pos > static_cast<double>(rows) - 0.5) {
                ++result.clamped;
                pos = std::clamp(pos, 0.0, static_cast<double>(rows - 1));
            }
            if (spread_bins == 0.0) {
                long r = std::lround(pos);
                r = periodic ? ((r % n_rows) + n_rows) % n_rows : std::clamp(r, 0L, n_rows - 1);
                g.at(static_cast<std::size_t>(r), c) += curve.weight;
                continue;
            }
            const long reach = static_cast<long>(std::ceil(4.0 * spread_bins));
            const long centre = std::lround(pos);
            for (long r = centre - reach; r <= centre + reach; ++r) {
                long row = r;
                if (periodic) {
                    row = ((r % n_rows) + n_rows) % n_rows;
                } else if (r < 0 || r >= n_rows) {
                    continue;
                }
                const double u = (static_cast<double>(r) - pos) / spread_bins;
                g.at(static_cast<std::size_t>(row), c) += curve.weight * std::exp(-0.5 * u * u);
            }
        }
    }
    if (g.max_value() > 0.0) g = normalize_unit_max(g);
    else g.tag = Normalization::UnitMax;
    return result;
}

}  // namespace ridlab::tfa
