#include "ridlab/rid.hpp"

#include "ridlab/errors.hpp"
#include "ridlab/io.hpp"
#include "ridlab/seed.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <thread>

namespace ridlab::rid {

namespace {

bool same_axis(const tfa::Axis& a, const tfa::Axis& b) {
    return a.start == b.start && a.step == b.step;
}

net::Tensor to_tensor(const tfa::TimeFrequencyGrid& g) {
    net::Tensor t(1, static_cast<int>(g.rows()), static_cast<int>(g.cols()));
    t.data = g.values();
    return t;
}

}  // namespace

std::string to_string(Source s) { return s == Source::Stft ? "stft" : "enhanced"; }

FrameStack assemble_rid_frames(const CellGrids& cells, double range_resolution, Source source) {
    require(!cells.empty(), "no range cells to assemble");
    const auto& ref = cells.begin()->second;
    for (const auto& [cell, g] : cells)
        if (g.rows() != ref.rows() || g.cols() != ref.cols() || !same_axis(g.time_axis, ref.time_axis) ||
            !same_axis(g.freq_axis, ref.freq_axis))
            throw PreconditionError("range cell " + std::to_string(cell) + " has inconsistent TFR axes");
    FrameStack s;
    s.first_cell = cells.begin()->first;
    s.range_count = static_cast<std::size_t>(cells.rbegin()->first - s.first_cell + 1);
    s.doppler_count = ref.rows();
    s.slow_time_axis = ref.time_axis;
    s.doppler_axis = ref.freq_axis;
    s.range_axis = tfa::Axis{s.first_cell * range_resolution, range_resolution};
    s.source = source;
    s.frames.assign(ref.cols(), std::vector<double>(s.range_count * s.doppler_count, 0.0));
    for (const auto& [cell, g] : cells) {
        const auto r = static_cast<std::size_t>(cell - s.first_cell);
        for (std::size_t t = 0; t < g.cols(); ++t)
            for (std::size_t f = 0; f < g.rows(); ++f) s.frames[t][r * s.doppler_count + f] = g.at(f, t);
    }
    return s;
}

tfa::TimeFrequencyGrid enhance_grid(const net::Generator& gen, const tfa::TimeFrequencyGrid& grid) {
    const auto n = static_cast<std::size_t>(gen.config().input_size);
    const bool native = grid.rows() == n && grid.cols() == n;
    const auto input = native ? grid : tfa::resample_bilinear(grid, n, n);
    const net::Tensor out = gen.forward(to_tensor(input));
    tfa::TimeFrequencyGrid result(n, n, input.time_axis, input.freq_axis, tfa::Normalization::Raw);
    result.values() = out.data;
    if (native) return result;
    auto back = tfa::resample_bilinear(result, grid.rows(), grid.cols());
    back.time_axis = grid.time_axis;
    back.freq_axis = grid.freq_axis;
    return back;
}

CellGrids enhance_cells(const CellGrids& cells, const net::Generator& gen, int threads) {
    std::vector<int> keys;
    for (const auto& kv : cells) keys.push_back(kv.first);
    std::vector<tfa::TimeFrequencyGrid> out(keys.size());
    auto work = [&](std::size_t i) { out[i] = enhance_grid(gen, cells.at(keys[i])); };
    const std::size_t t = static_cast<std::size_t>(std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(keys.size(), 1))));
    if (t == 1) {
        for (std::size_t i = 0; i < keys.size(); ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < t; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < keys.size(); i += t) work(i);
            });
        for (auto& th : pool) th.join();
    }
    CellGrids result;
    for (std::size_t i = 0; i < keys.size(); ++i) result.emplace(keys[i], std::move(out[i]));
    return result;
}

std::map<int, sigmodel::ComplexSeries> cell_echoes(const sigmodel::TargetScenario& scenario,
                                                   std::size_t samples) {
    const auto times = sigmodel::slow_times(scenario.radar.prf, samples);
    std::map<int, sigmodel::ComplexSeries> echoes;
    for (const auto& [cell, members] : sigmodel::range_cells(scenario, times))
        echoes.emplace(cell, sigmodel::synthesize_scatterers_echo(scenario, members, times));
    return echoes;
}

CellGrids cell_spectrograms(const std::map<int, sigmodel::ComplexSeries>& echoes,
                            const tfa::StftConfig& stft, double snr_db, std::uint64_t seed) {
    CellGrids grids;
    double peak = 0.0;
    for (const auto& [cell, echo] : echoes) {
        const auto noisy = sigmodel::add_noise(echo, snr_db, mix64(seed + static_cast<std::uint64_t>(cell)));
        auto g = tfa::spectrogram(tfa::stft(noisy, stft));
        peak = std::max(peak, g.max_value());
        grids.emplace(cell, std::move(g));
    }
    if (peak > 0.0)
        for (auto& [cell, g] : grids)
            for (double& v : g.values()) v /= peak;
    return grids;
}

std::vector<std::filesystem::path> export_frames(const FrameStack& stack,
                                                 const std::filesystem::path& directory,
                                                 std::size_t stride) {
    require(stride >= 1, "frame stride must be at least 1");
    double peak = 0.0;
    for (const auto& f : stack.frames)
        for (double v : f) peak = std::max(peak, v);
    std::filesystem::create_directories(directory);
    nlohmann::json manifest;
    manifest["source"] = to_string(stack.source);
    manifest["range_axis"] = {{"start", stack.range_axis.start}, {"step", stack.range_axis.step}, {"count", stack.range_count}};
    manifest["doppler_axis"] = {{"start", stack.doppler_axis.start}, {"step", stack.doppler_axis.step}, {"count", stack.doppler_count}};
    manifest["first_cell"] = stack.first_cell;
    manifest["scale_max"] = peak;
    manifest["frames"] = nlohmann::json::array();
    std::vector<std::filesystem::path> written;
    for (std::size_t t = 0; t < stack.frames.size(); t += stride) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%05zu.png", t);
        const auto path = directory / name;
        io::write_png(path, io::to_gray(stack.frames[t], static_cast<int>(stack.doppler_count),
                                        static_cast<int>(stack.range_count), peak));
        manifest["frames"].push_back({{"index", t}, {"file", name}, {"slow_time", stack.slow_time_axis.at(t)}});
        written.push_back(path);
    }
    const auto mpath = directory / "frames.json";
    io::write_file(mpath, manifest.dump(2) + "\n");
    written.push_back(mpath);
    return written;
}

}  // namespace ridlab::rid
