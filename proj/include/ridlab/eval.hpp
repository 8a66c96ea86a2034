#pragma once

#include "ridlab/dataset.hpp"
#include "ridlab/net/generator.hpp"
#include "ridlab/tfa.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ridlab::eval {

/// Per-component frequency tracks (Hz) on a grid's time columns.
struct RidgeSet {
    tfa::Axis time_axis;
    std::vector<std::vector<double>> tracks;  // [component][column]
    std::vector<std::vector<bool>> valid;     // [component][column]

    std::size_t components() const { return tracks.size(); }
    std::size_t columns() const { return tracks.empty() ? 0 : tracks.front().size(); }
};

struct RidgeOptions {
    double gate_bins = 5.0;
    bool periodic = true;  // frequency axis wraps with the grid's period
};

/// Top-n local maxima per column (ties to the lower bin), linked across columns by minimal
/// total frequency distance. A component whose jump exceeds the gate is masked for that column.
/// Tracks are ordered by mean frequency.
RidgeSet extract_ridges(const tfa::TimeFrequencyGrid& grid, int n_components,
                        const RidgeOptions& options = {});

/// Truth tracks from ideal curves. Columns where two curves lie closer than `crossing_hz`
/// are masked for both. Tracks are ordered by mean frequency.
RidgeSet ridges_from_curves(const std::vector<tfa::IdealCurve>& curves, const tfa::Axis& time_axis,
                            double crossing_hz = 0.0, double period = 0.0);

struct RmseResult {
    double rmse_hz = 0.0;
    double invalid_fraction = 0.0;
    std::size_t samples = 0;
};

/// In every column the valid estimates are matched to the valid truths by exhaustive
/// assignment (most pairs, then least squared error); RMSE is taken over all matched pairs.
/// With period > 0 the frequency difference is circular. Throws PreconditionError when no
/// column has a matched pair.
RmseResult rmse_frequency(const RidgeSet& estimate, const RidgeSet& truth, double period = 0.0);

enum class Method { Stft, Enhanced, Ideal };
std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct SweepRow {
    double snr_db = 0.0;
    Method method = Method::Stft;
    double rmse_hz = 0.0;
    int trials = 0;
    double runtime_ms = 0.0;  // mean wall-clock per TFR
    double invalid_fraction = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;

    const SweepRow* find(double snr_db, Method method) const;
    /// Header: snr_db,method,rmse_hz,trials,runtime_ms
    std::string csv(bool include_runtime = true) const;
    /// One line per SNR: snr followed by the RMSE of each method in `methods` order.
    std::string gnuplot(const std::vector<Method>& methods) const;
};

struct SweepConfig {
    std::vector<double> snr_db{0, 2, 4, 6, 8, 10, 12, 14, 16};
    std::vector<Method> methods{Method::Stft, Method::Enhanced};
    int seeds = 10;
    std::uint64_t root_seed = 0;
    RidgeOptions ridge;
    double crossing_bins = 1.0;  // truth crossing mask, raster rows
    int threads = 1;
};

/// The 0..16 dB grid in 2 dB steps.
std::vector<double> default_snr_grid();

/// For each (snr, method): mean RMSE over scenarios x seeds. `gen` is required when the
/// Enhanced method is requested; its input size must equal the dataset raster.
SweepReport snr_sweep(const std::vector<dataset::ScenarioSignal>& scenarios,
                      const dataset::DatasetConfig& data, const SweepConfig& config,
                      const net::Generator* gen);

}  // namespace ridlab::eval
