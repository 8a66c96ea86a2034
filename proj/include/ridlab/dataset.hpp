#pragma once

#include "ridlab/sigmodel.hpp"
#include "ridlab/tfa.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ridlab::dataset {

/// Which slow-time signal a scenario contributes: the range cell holding the most
/// scatterers ("auto"), the whole target ("all"), or an explicit cell index.
struct CellChoice {
    enum class Mode { Auto, All, Index } mode = Mode::Auto;
    int index = 0;

    static CellChoice parse(const std::string& text);
    std::string str() const;
};

struct DatasetConfig {
    int raster = 128;            // S and Q are raster x raster
    double dwell = 0.512;        // seconds of slow time per scenario
    tfa::StftConfig stft;
    CellChoice cell;
    double q_spread = 1.0;       // Gaussian width of the ideal curves, raster rows

    std::size_t samples(double prf) const;
    void validate() const;
};

/// Scatterers contributing to one slow-time signal and the range cell they occupy
/// (-1 for the whole target).
struct CellSelection {
    int cell = -1;
    std::vector<int> scatterers;
};

CellSelection select_cell(const sigmodel::TargetScenario& scenario,
                          const std::vector<double>& times, const CellChoice& choice);
/// Same rule over a precomputed cell -> scatterers map.
CellSelection select_cell(const std::map<int, std::vector<int>>& cells, const CellChoice& choice);

/// Spectrogram -> UnitMax -> bilinear resample to raster x raster.
tfa::TimeFrequencyGrid stft_raster(const sigmodel::ComplexSeries& series,
                                   const tfa::StftConfig& stft, int raster);

/// Folded truth curves at the columns of `time_axis`, interpolated from per-sample Doppler.
std::vector<tfa::IdealCurve> truth_curves(const std::vector<std::vector<double>>& doppler,
                                          double sample_rate, double start_time,
                                          const tfa::Axis& time_axis, std::size_t cols);

/// Noise-free slow-time signal of one scenario's selected scatterers with the true
/// (unfolded) Doppler of each scatterer at every sample time.
struct ScenarioSignal {
    std::string id;
    sigmodel::ComplexSeries echo;
    CellSelection selection;
    std::vector<std::vector<double>> doppler;  // [selected scatterer][sample]
};

ScenarioSignal scenario_signal(const sigmodel::TargetScenario& scenario,
                               const DatasetConfig& config, const std::string& id = "");

struct PairSample {
    tfa::TimeFrequencyGrid s;
    tfa::TimeFrequencyGrid q;
    std::vector<tfa::IdealCurve> truth;  // folded Doppler on the raster time axis
};

/// S from the first samples(prf) echo samples with noise at `snr_db`; Q from the truth curves
/// rasterized on S's axes. Truth is interpolated linearly between samples, then folded.
PairSample build_pair(const ScenarioSignal& signal, const DatasetConfig& config, double snr_db,
                      std::uint64_t noise_seed);

}  // namespace ridlab::dataset
