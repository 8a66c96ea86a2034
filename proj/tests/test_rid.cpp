#include <doctest.h>

#include "ridlab/errors.hpp"
#include "ridlab/io.hpp"
#include "ridlab/rid.hpp"

#include <json.hpp>

#include <filesystem>
#include <random>

using namespace ridlab;
using namespace ridlab::rid;
namespace fs = std::filesystem;

namespace {

tfa::TimeFrequencyGrid random_grid(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    tfa::TimeFrequencyGrid g(rows, cols, tfa::Axis{0.01, 0.001}, tfa::Axis{-500.0, 1000.0 / rows});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : g.values()) v = u(rng);
    return g;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("ridlab_rid_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_SUITE("rid") {

TEST_CASE("assembly is a pure reindexing") {
    std::mt19937_64 rng(1);
    CellGrids cells{{-2, random_grid(16, 9, rng)}, {0, random_grid(16, 9, rng)}, {1, random_grid(16, 9, rng)}};
    const auto stack = assemble_rid_frames(cells, 0.375);
    CHECK(stack.frames.size() == 9);
    CHECK(stack.first_cell == -2);
    CHECK(stack.range_count == 4);
    CHECK(stack.doppler_count == 16);
    double frame_sum = 0.0, cell_sum = 0.0;
    for (const auto& f : stack.frames)
        for (double v : f) frame_sum += v;
    for (const auto& [c, g] : cells)
        for (double v : g.values()) cell_sum += v;
    CHECK(frame_sum == doctest::Approx(cell_sum).epsilon(1e-12));
    for (std::size_t t = 0; t < 9; ++t)
        for (std::size_t d = 0; d < 16; ++d) {
            CHECK(stack.at(t, 0, d) == cells.at(-2).at(d, t));
            CHECK(stack.at(t, 1, d) == 0.0);  // cell -1 is empty
            CHECK(stack.at(t, 3, d) == cells.at(1).at(d, t));
        }
    CHECK(stack.range_axis.start == doctest::Approx(-0.75));
    CHECK(stack.range_axis.step == doctest::Approx(0.375));
}

TEST_CASE("insertion order does not matter and zero input gives zero frames") {
    std::mt19937_64 rng(2);
    const auto a = random_grid(8, 5, rng), b = random_grid(8, 5, rng);
    CellGrids one, two;
    one.emplace(3, a);
    one.emplace(1, b);
    two.emplace(1, b);
    two.emplace(3, a);
    CHECK(assemble_rid_frames(one, 1.0).frames == assemble_rid_frames(two, 1.0).frames);

    CellGrids zero{{0, tfa::TimeFrequencyGrid(8, 5, a.time_axis, a.freq_axis)}};
    for (const auto& f : assemble_rid_frames(zero, 1.0).frames)
        for (double v : f) CHECK(v == 0.0);
}

TEST_CASE("inconsistent axes are rejected") {
    std::mt19937_64 rng(3);
    auto a = random_grid(8, 5, rng), b = random_grid(8, 5, rng);
    b.freq_axis.step *= 2;
    CHECK_THROWS_AS(assemble_rid_frames(CellGrids{{0, a}, {1, b}}, 1.0), PreconditionError);
    CHECK_THROWS_AS(assemble_rid_frames(CellGrids{{0, a}, {1, random_grid(8, 6, rng)}}, 1.0), PreconditionError);
    CHECK_THROWS_AS(assemble_rid_frames(CellGrids{}, 1.0), PreconditionError);
}

TEST_CASE("one scatterer in one cell: the frame peak follows its Doppler") {
    sigmodel::TargetScenario s;
    s.amplitudes.fill(0.0);
    s.amplitudes[0] = 1.0;
    const auto echoes = cell_echoes(s, 512);
    REQUIRE(echoes.size() >= 1);
    tfa::StftConfig st;
    st.window_length = 32;  // the ring sweeps too fast for one-bin accuracy with 64 samples
    const auto grids = cell_spectrograms(echoes, st, sigmodel::kNoNoise, 1);
    const auto stack = assemble_rid_frames(grids, s.radar.range_resolution());
    const auto times = sigmodel::slow_times(s.radar.prf, 512);
    const int cell = sigmodel::scatterer_cells(s, times)[0];
    std::size_t hits = 0;
    for (std::size_t t = 0; t < stack.frames.size(); ++t) {
        const auto& f = stack.frames[t];
        const auto best = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
        const double truth = sigmodel::alias_frequency(
            sigmodel::instantaneous_doppler(s, 0, stack.slow_time_axis.at(t)), s.radar.prf);
        const double got = stack.doppler_axis.at(best % stack.doppler_count);
        const double diff = std::abs(sigmodel::alias_frequency(got - truth, s.radar.prf));
        if (static_cast<int>(best / stack.doppler_count) + stack.first_cell == cell && diff <= stack.doppler_axis.step)
            ++hits;
    }
    CHECK(hits >= 0.95 * stack.frames.size());
}

TEST_CASE("export writes one PNG per frame, a manifest, and re-exports identically") {
    std::mt19937_64 rng(4);
    CellGrids cells{{0, random_grid(10, 3, rng)}, {1, random_grid(10, 3, rng)}};
    for (auto& [c, g] : cells)
        for (double& v : g.values()) v *= 0.5;
    for (std::size_t t = 0; t < 3; ++t) cells.at(1).at(t + 2, t) = 1.0;  // one clear peak per frame
    const auto stack = assemble_rid_frames(cells, 1.0);
    const auto dir = scratch("export");
    const auto files = export_frames(stack, dir);
    CHECK(files.size() == 4);
    const auto manifest = nlohmann::json::parse(io::read_file(files.back()));
    CHECK(manifest.at("frames").size() == 3);
    std::vector<std::string> first;
    for (const auto& f : files) first.push_back(io::read_file(f));
    const auto again = export_frames(stack, dir);
    for (std::size_t i = 0; i < files.size(); ++i) CHECK(io::read_file(again[i]) == first[i]);

    for (std::size_t t = 0; t < 3; ++t) {
        const auto img = io::read_png(files[t]);
        const auto& f = stack.frames[t];
        const auto want = std::max_element(f.begin(), f.end()) - f.begin();
        // PNG rows hold range cells, columns hold Doppler
        const auto got = std::max_element(img.pixels.begin(), img.pixels.end()) - img.pixels.begin();
        CHECK(img.width == static_cast<int>(stack.doppler_count));
        CHECK(got == want);
    }
    CHECK(export_frames(stack, scratch("stride"), 2).size() == 3);
    fs::remove_all(dir);
}

TEST_CASE("enhancing with an untouched adapter set equals the frozen base") {
    net::ParameterStore store;
    net::GeneratorConfig gc;
    gc.input_size = 16;
    gc.channels = {3, 4};
    net::Generator gen(store, gc, 5);
    std::mt19937_64 rng(6);
    CellGrids cells{{0, tfa::normalize_unit_max(random_grid(32, 20, rng))}, {2, tfa::normalize_unit_max(random_grid(32, 20, rng))}};
    const auto out = enhance_cells(cells, gen, 2);
    for (const auto& [c, g] : cells) {
        const auto& e = out.at(c);
        CHECK(e.rows() == g.rows());
        CHECK(e.cols() == g.cols());
        CHECK(e.time_axis.start == g.time_axis.start);
        const auto small = tfa::resample_bilinear(g, 16, 16);
        net::Tensor x(1, 16, 16);
        x.data = small.values();
        const auto base = gen.forward_base(x);
        auto grid = small;
        grid.values() = base.data;
        const auto back = tfa::resample_bilinear(grid, g.rows(), g.cols());
        for (std::size_t i = 0; i < back.values().size(); ++i) CHECK(e.values()[i] == doctest::Approx(back.values()[i]).epsilon(1e-12));
    }
    tfa::TimeFrequencyGrid zero(32, 20, tfa::Axis{}, tfa::Axis{});
    const auto z1 = enhance_grid(gen, zero), z2 = enhance_grid(gen, zero);
    CHECK(z1.values() == z2.values());
    for (double v : z1.values()) CHECK(std::isfinite(v));
}

}
