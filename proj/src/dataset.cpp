#include "ridlab/dataset.hpp"

#include "ridlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ridlab::dataset {

CellChoice CellChoice::parse(const std::string& text) {
    if (text == "auto") return {};
    if (text == "all") return {Mode::All, 0};
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw PreconditionError("cell must be auto, all or an integer, got '" + text + "'");
    return {Mode::Index, v};
}

std::string CellChoice::str() const {
    switch (mode) {
        case Mode::Auto: return "auto";
        case Mode::All: return "all";
        case Mode::Index: return std::to_string(index);
    }
    return "auto";
}

std::size_t DatasetConfig::samples(double prf) const {
    return static_cast<std::size_t>(std::llround(dwell * prf));
}

void DatasetConfig::validate() const {
    stft.validate();
    require(raster >= 8, "raster must be at least 8");
    require(dwell > 0.0, "dwell must be positive");
    require(q_spread >= 0.0, "q_spread must be non-negative");
}

CellSelection select_cell(const std::map<int, std::vector<int>>& cells, const CellChoice& choice) {
    CellSelection sel;
    if (choice.mode == CellChoice::Mode::All) {
        for (const auto& [cell, members] : cells)
            sel.scatterers.insert(sel.scatterers.end(), members.begin(), members.end());
        std::sort(sel.scatterers.begin(), sel.scatterers.end());
        return sel;
    }
    if (choice.mode == CellChoice::Mode::Index) {
        sel.cell = choice.index;
        const auto it = cells.find(choice.index);
        if (it != cells.end()) sel.scatterers = it->second;
        return sel;
    }
    // most scatterers wins; ties go to the lowest cell index
    for (const auto& [cell, members] : cells)
        if (members.size() > sel.scatterers.size()) {
            sel.cell = cell;
            sel.scatterers = members;
        }
    return sel;
}

CellSelection select_cell(const sigmodel::TargetScenario& scenario,
                          const std::vector<double>& times, const CellChoice& choice) {
    return select_cell(sigmodel::range_cells(scenario, times), choice);
}

tfa::TimeFrequencyGrid stft_raster(const sigmodel::ComplexSeries& series,
                                   const tfa::StftConfig& stft, int raster) {
    const auto spec = tfa::spectrogram(tfa::stft(series, stft));
    return tfa::resample_bilinear(tfa::normalize_unit_max(spec), raster, raster);
}

std::vector<tfa::IdealCurve> truth_curves(const std::vector<std::vector<double>>& doppler,
                                          double sample_rate, double start_time,
                                          const tfa::Axis& time_axis, std::size_t cols) {
    std::vector<tfa::IdealCurve> curves;
    for (const auto& track : doppler) {
        require(track.size() >= 2, "truth track needs at least two samples");
        tfa::IdealCurve c;
        c.frequency.resize(cols);
        for (std::size_t k = 0; k < cols; ++k) {
            const double x = (time_axis.at(k) - start_time) * sample_rate;
            const double base = std::clamp(std::floor(x), 0.0, static_cast<double>(track.size() - 2));
            const auto i = static_cast<std::size_t>(base);
            const double w = std::clamp(x - base, 0.0, 1.0);
            c.frequency[k] = sigmodel::alias_frequency((1.0 - w) * track[i] + w * track[i + 1], sample_rate);
        }
        curves.push_back(std::move(c));
    }
    return curves;
}

ScenarioSignal scenario_signal(const sigmodel::TargetScenario& scenario,
                               const DatasetConfig& config, const std::string& id) {
    config.validate();
    const auto times = sigmodel::slow_times(scenario.radar.prf, config.samples(scenario.radar.prf));
    ScenarioSignal sig;
    sig.id = id;
    sig.selection = select_cell(scenario, times, config.cell);
    if (sig.selection.scatterers.empty())
        throw PreconditionError("selected range cell holds no scatterer");
    sig.echo = sigmodel::synthesize_scatterers_echo(scenario, sig.selection.scatterers, times);
    for (int idx : sig.selection.scatterers) {
        std::vector<double> d(times.size());
        for (std::size_t m = 0; m < times.size(); ++m)
            d[m] = sigmodel::instantaneous_doppler(scenario, idx, times[m]);
        sig.doppler.push_back(std::move(d));
    }
    return sig;
}

PairSample build_pair(const ScenarioSignal& signal, const DatasetConfig& config, double snr_db,
                      std::uint64_t noise_seed) {
    config.validate();
    const std::size_t n = config.samples(signal.echo.sample_rate);
    if (signal.echo.size() < n)
        throw PreconditionError("scenario " + signal.id + " holds " + std::to_string(signal.echo.size()) +
                                " samples, dataset dwell needs " + std::to_string(n));
    sigmodel::ComplexSeries clean = signal.echo;
    clean.samples.resize(n);
    PairSample pair;
    pair.s = stft_raster(sigmodel::add_noise(clean, snr_db, noise_seed), config.stft, config.raster);
    const auto cols = static_cast<std::size_t>(config.raster);
    pair.truth = truth_curves(signal.doppler, signal.echo.sample_rate, signal.echo.start_time,
                              pair.s.time_axis, cols);
    pair.q = tfa::rasterize_ideal_tfr(pair.truth, cols, pair.s.time_axis, pair.s.freq_axis,
                                      config.q_spread, true)
                 .grid;
    return pair;
}

}  // namespace ridlab::dataset
