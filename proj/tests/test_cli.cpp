#include <doctest.h>

#include "ridlab/cli/commands.hpp"
#include "ridlab/io.hpp"
#include "ridlab/net/checkpoint.hpp"
#include "ridlab/rid.hpp"

#include <json.hpp>

#include <filesystem>

using namespace ridlab;
namespace fs = std::filesystem;

namespace {

const char* kTiny =
    "seed = 3\n"
    "grid = spin,precession\n"
    "scenario_count = 6\n"
    "duration = 0.8\n"
    "raster = 16\n"
    "channels = 3,4\n"
    "disc_channels = 2,3,3,4\n"
    "corpus_count = 8\n"
    "pretrain_epochs = 1\n"
    "disc_pretrain_epochs = 1\n"
    "epochs = 0\n"
    "eval_seeds = 1\n"
    "dataset_snr_db = 0,10\n";

struct Workspace {
    fs::path root;
    explicit Workspace(const std::string& name) : root(fs::temp_directory_path() / ("ridlab_cli_" + name)) {
        fs::remove_all(root);
        fs::create_directories(root);
        io::write_file(root / "tiny.cfg", kTiny);
    }
    ~Workspace() { fs::remove_all(root); }
    std::string cfg() const { return (root / "tiny.cfg").string(); }
    std::string at(const std::string& sub) const { return (root / sub).string(); }
    int run(std::vector<std::string> args) const {
        args.insert(args.begin(), {"--config", cfg()});
        return cli::run(args);
    }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes distinguish config, missing input and usage errors") {
    Workspace w("codes");
    io::write_file(w.root / "bad.cfg", "seed = 1\nwhat = 2\n");
    CHECK(cli::run({"--config", w.at("bad.cfg"), "simulate"}) == 1);
    CHECK(cli::run({"--config", w.at("none.cfg"), "simulate"}) == 2);
    CHECK(w.run({"--in", w.at("nowhere"), "--out", w.at("o"), "make-dataset"}) == 2);
    CHECK(w.run({"--in", w.at("nowhere"), "--out", w.at("o"), "train"}) == 2);
    CHECK(cli::run({"--set", "lora_rank=0", "--out", w.at("o"), "simulate"}) == 1);
    CHECK(cli::run({"frobnicate"}) == 1);
    CHECK(cli::run(std::vector<std::string>{}) == 1);
}

TEST_CASE("simulate writes per-cell echoes, curves and a manifest") {
    Workspace w("sim");
    REQUIRE(w.run({"--out", w.at("sim"), "simulate"}) == 0);
    const auto m = nlohmann::json::parse(io::read_file(w.root / "sim/manifest.json"));
    CHECK(m.at("command") == "simulate");
    CHECK(m.at("seed") == 3);
    for (const auto& out : m.at("outputs"))
        CHECK(io::sha256_file(w.root / "sim" / out.at("path").get<std::string>()) == out.at("sha256"));
    CHECK(fs::exists(w.root / "sim/timing.json"));
    const auto echo = io::read_cser(w.root / "sim/scenarios/spin_0" /
                                    ("cell_" + std::to_string(nlohmann::json::parse(io::read_file(w.root / "sim/scenarios/spin_0/scenario.json"))
                                                                  .at("cells")[0].at("cell").get<int>()) + ".cser"));
    CHECK(echo.size() == 800);
}

TEST_CASE("pipeline stages hand off through files") {
    Workspace w("pipe");
    REQUIRE(w.run({"--out", w.at("sim"), "simulate"}) == 0);
    REQUIRE(w.run({"--in", w.at("sim"), "--out", w.at("ds"), "make-dataset"}) == 0);
    const auto pairs = io::read_file(w.root / "ds/pairs.csv");
    CHECK(std::count(pairs.begin(), pairs.end(), '\n') == 1 + 6 * 2);
    const auto s = io::read_tfrb(w.root / "ds/pairs/spin_0_n0_S.tfrb");
    CHECK(s.rows() == 16);
    CHECK(s.cols() == 16);

    // zero epochs: the final checkpoint is the initial one
    REQUIRE(w.run({"--in", w.at("ds"), "--out", w.at("tr"), "train"}) == 0);
    CHECK(io::read_file(w.root / "tr/final.lsdw") == io::read_file(w.root / "tr/init.lsdw"));

    // enhancing with the initial checkpoint equals the frozen base
    REQUIRE(w.run({"--in", w.at("ds/pairs/spin_0_n0_S.tfrb"), "--checkpoint", w.at("tr/init.lsdw"), "--out", w.at("en"), "enhance"}) == 0);
    net::ParameterStore store;
    net::GeneratorConfig gc;
    gc.input_size = 16;
    gc.channels = {3, 4};
    net::Generator gen(store, gc, 0);
    net::load_checkpoint(w.root / "tr/init.lsdw", store, "gen.");
    net::Tensor x(1, 16, 16);
    x.data = s.values();
    const auto base = gen.forward_base(x);
    const auto enhanced = io::read_tfrb(w.root / "en/spin_0_n0_S_enhanced.tfrb");
    for (std::size_t i = 0; i < base.data.size(); ++i)
        CHECK(enhanced.values()[i] == doctest::Approx(static_cast<float>(base.data[i])).epsilon(1e-6));

    REQUIRE(w.run({"--in", w.at("ds"), "--checkpoint", w.at("tr/final.lsdw"), "--out", w.at("ev"), "eval"}) == 0);
    const auto report = io::read_file(w.root / "ev/report.csv");
    CHECK(std::count(report.begin(), report.end(), '\n') == 1 + 9 * 2);
    CHECK(fs::exists(w.root / "ev/report.dat"));
    CHECK(w.run({"--in", w.at("ds"), "--out", w.at("ev2"), "eval"}) == 2);  // enhanced needs a checkpoint

    REQUIRE(w.run({"--in", w.at("sim/scenarios/spin_0"), "--set", "frame_stride=100", "--out", w.at("im"), "image"}) == 0);
    const auto frames = nlohmann::json::parse(io::read_file(w.root / "im/frames/frames.json"));
    CHECK(frames.at("source") == "stft");
    CHECK(frames.at("frames").size() >= 1);
}

TEST_CASE("deleting an intermediate and re-running restores identical digests") {
    Workspace w("restore");
    REQUIRE(w.run({"--out", w.at("sim"), "simulate"}) == 0);
    REQUIRE(w.run({"--in", w.at("sim"), "--out", w.at("ds"), "make-dataset"}) == 0);
    const auto before = io::read_file(w.root / "ds/manifest.json");
    fs::remove_all(w.root / "ds");
    REQUIRE(w.run({"--in", w.at("sim"), "--out", w.at("ds"), "make-dataset"}) == 0);
    CHECK(io::read_file(w.root / "ds/manifest.json") == before);
}

}
