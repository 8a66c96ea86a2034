#pragma once

#include "ridlab/net/generator.hpp"
#include "ridlab/sigmodel.hpp"
#include "ridlab/tfa.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ridlab::rid {

enum class Source { Stft, Enhanced };
std::string to_string(Source s);

/// Range x Doppler images, one per slow-time column. Row i of every frame is range cell
/// first_cell + i; column j is Doppler freq_axis.at(j).
struct FrameStack {
    std::vector<std::vector<double>> frames;  // row-major, ranges() x dopplers()
    int first_cell = 0;
    std::size_t range_count = 0;
    std::size_t doppler_count = 0;
    tfa::Axis slow_time_axis;
    tfa::Axis range_axis;    // metres relative to the standoff range
    tfa::Axis doppler_axis;  // Hz
    Source source = Source::Stft;

    double at(std::size_t frame, std::size_t range, std::size_t doppler) const {
        return frames[frame][range * doppler_count + doppler];
    }
};

using CellGrids = std::map<int, tfa::TimeFrequencyGrid>;

/// Frame t, row of cell r = column t of cell r's TFR. Cells between the smallest and largest
/// key without a grid stay zero. Throws PreconditionError when axes or shapes disagree.
FrameStack assemble_rid_frames(const CellGrids& cells, double range_resolution,
                               Source source = Source::Stft);

/// Generator output for one grid: resampled to the network raster, passed through the
/// generator, resampled back. Axes and shape of `grid` are preserved.
tfa::TimeFrequencyGrid enhance_grid(const net::Generator& gen, const tfa::TimeFrequencyGrid& grid);
CellGrids enhance_cells(const CellGrids& cells, const net::Generator& gen, int threads = 1);

/// Per-cell spectrograms, each echo corrupted at `snr_db` (noise seed derived from `seed` and
/// the cell index), all normalised by the common peak.
CellGrids cell_spectrograms(const std::map<int, sigmodel::ComplexSeries>& echoes,
                            const tfa::StftConfig& stft, double snr_db, std::uint64_t seed);
/// Noise-free per-cell echoes of a scenario.
std::map<int, sigmodel::ComplexSeries> cell_echoes(const sigmodel::TargetScenario& scenario,
                                                   std::size_t samples);

/// Writes frame_NNNNN.png for every `stride`-th frame plus frames.json. All frames share one
/// grey scale (the stack maximum). Returns the written paths, manifest last.
std::vector<std::filesystem::path> export_frames(const FrameStack& stack,
                                                 const std::filesystem::path& directory,
                                                 std::size_t stride = 1);

}  // namespace ridlab::rid
