#include "ridlab/cli/commands.hpp"

#include "ridlab/errors.hpp"
#include "ridlab/io.hpp"
#include "ridlab/net/checkpoint.hpp"
#include "ridlab/rid.hpp"
#include "ridlab/seed.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

namespace ridlab::cli {

namespace {

using Json = nlohmann::ordered_json;

void log(const Context& ctx, const std::string& msg) {
    if (ctx.verbose) std::cerr << "[ridlab] " << msg << '\n';
}

void require_path(const fs::path& p, const std::string& what) {
    if (p.empty()) throw MissingInputError(what + " not given");
    if (!fs::exists(p)) throw MissingInputError(what + " not found: " + p.string());
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::istringstream in(io::read_file(path));
    std::string line;
    std::vector<std::vector<std::string>> rows;
    std::getline(in, line);  // header
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(split_csv_line(line));
    return rows;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::istringstream in(io::read_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

std::string cell_file(int cell) { return "cell_" + std::to_string(cell) + ".cser"; }

/// time column followed by one Doppler column per track.
std::string truth_csv(const std::vector<std::string>& names, const sigmodel::ComplexSeries& timing,
                      const std::vector<std::vector<double>>& tracks) {
    std::string out = "time";
    for (const auto& n : names) out += "," + n;
    out += '\n';
    const std::size_t len = tracks.empty() ? 0 : tracks.front().size();
    for (std::size_t m = 0; m < len; ++m) {
        out += fmt(timing.time(m));
        for (const auto& t : tracks) out += "," + fmt(t[m]);
        out += '\n';
    }
    return out;
}

std::vector<std::vector<double>> read_truth_columns(const fs::path& path, const std::vector<int>& columns) {
    const auto rows = read_csv(path);
    std::vector<std::vector<double>> tracks(columns.size());
    for (const auto& r : rows)
        for (std::size_t k = 0; k < columns.size(); ++k) {
            const auto c = static_cast<std::size_t>(columns[k]) + 1;
            if (c >= r.size()) throw MissingInputError(path.string() + ": missing truth column");
            tracks[k].push_back(std::stod(r[c]));
        }
    return tracks;
}

struct Nets {
    net::ParameterStore store;
    std::unique_ptr<net::Generator> gen;
    std::unique_ptr<net::Discriminator> disc;
};

std::unique_ptr<Nets> build_nets(const config::RunConfig& cfg, bool with_disc) {
    auto n = std::make_unique<Nets>();
    n->gen = std::make_unique<net::Generator>(n->store, cfg.generator, derive_seed(cfg.seed, Stage::Init, 1), "gen");
    if (with_disc)
        n->disc = std::make_unique<net::Discriminator>(n->store, cfg.discriminator,
                                                       derive_seed(cfg.seed, Stage::Init, 2), "disc");
    return n;
}

std::unique_ptr<Nets> load_generator(const Context& ctx, RunManifest& manifest) {
    require_path(ctx.checkpoint, "checkpoint");
    auto nets = build_nets(ctx.config, false);
    net::load_checkpoint(ctx.checkpoint, nets->store, "gen.");
    manifest.add_input(ctx.checkpoint.parent_path(), ctx.checkpoint);
    return nets;
}

net::Tensor to_tensor(const tfa::TimeFrequencyGrid& g) {
    net::Tensor t(1, static_cast<int>(g.rows()), static_cast<int>(g.cols()));
    t.data = g.values();
    return t;
}

std::string split_name(bool train) { return train ? "train" : "test"; }

std::vector<dataset::ScenarioSignal> load_signals(const fs::path& dir, const std::string& split,
                                                  RunManifest& manifest) {
    require_path(dir / "scenarios.csv", "dataset index");
    manifest.add_input(dir, dir / "scenarios.csv");
    std::vector<dataset::ScenarioSignal> out;
    for (const auto& row : read_csv(dir / "scenarios.csv")) {
        if (row.size() < 4) throw MissingInputError("malformed scenarios.csv");
        if (!split.empty() && row[1] != split) continue;
        dataset::ScenarioSignal sig;
        sig.id = row[0];
        sig.selection.cell = std::stoi(row[2]);
        std::stringstream ss(row[3]);
        std::string item;
        while (std::getline(ss, item, ' ')) sig.selection.scatterers.push_back(std::stoi(item));
        const fs::path echo = dir / "signals" / (sig.id + ".cser");
        const fs::path truth = dir / "signals" / (sig.id + ".truth.csv");
        require_path(echo, "signal");
        require_path(truth, "truth curves");
        sig.echo = io::read_cser(echo);
        std::vector<int> cols(sig.selection.scatterers.size());
        for (std::size_t k = 0; k < cols.size(); ++k) cols[k] = static_cast<int>(k);
        sig.doppler = read_truth_columns(truth, cols);
        manifest.add_input(dir, echo);
        manifest.add_input(dir, truth);
        out.push_back(std::move(sig));
    }
    if (out.empty()) throw MissingInputError("no " + split + " scenarios in " + dir.string());
    return out;
}

}  // namespace

RunManifest::RunManifest(std::string command, const Context& ctx) : command_(std::move(command)), ctx_(ctx) {}

void RunManifest::add_input(const fs::path& root, const fs::path& file) {
    inputs_.push_back({fs::relative(file, root).generic_string(), io::sha256_file(file), ""});
}

void RunManifest::add_output(const fs::path& file) {
    outputs_.push_back({fs::relative(file, ctx_.out).generic_string(), io::sha256_file(file), ""});
}

void RunManifest::add_output(const fs::path& file, const std::string& digest_bytes, std::string masked) {
    outputs_.push_back({fs::relative(file, ctx_.out).generic_string(), io::sha256_hex(digest_bytes),
                        std::move(masked)});
}

std::string RunManifest::json() const {
    Json j;
    j["tool"] = "ridlab";
    j["version"] = kToolVersion;
    j["command"] = command_;
    if (ctx_.config_path.empty()) {
        j["config"] = nullptr;
    } else {
        j["config"] = {{"file", ctx_.config_path.filename().string()},
                       {"sha256", io::sha256_file(ctx_.config_path)}};
    }
    j["seed"] = ctx_.config.seed;
    Json params = Json::object();
    for (const auto& [k, v] : ctx_.config.snapshot()) params[k] = v;
    j["parameters"] = params;
    auto list = [](const std::vector<Artifact>& items) {
        Json a = Json::array();
        for (const auto& it : items) {
            Json e{{"path", it.path}, {"sha256", it.sha256}};
            if (!it.masked.empty()) e["digest_excludes"] = it.masked;
            a.push_back(e);
        }
        return a;
    };
    j["inputs"] = list(inputs_);
    j["outputs"] = list(outputs_);
    return j.dump(2) + "\n";
}

void RunManifest::write(double elapsed_seconds) const {
    io::write_file(ctx_.out / "manifest.json", json());
    Json t{{"command", command_}, {"wall_clock_seconds", elapsed_seconds}};
    io::write_file(ctx_.out / "timing.json", t.dump(2) + "\n");
}

void cmd_simulate(const Context& ctx) {
    const auto& cfg = ctx.config;
    RunManifest manifest("simulate", ctx);
    const auto scenarios = config::expand_scenarios(cfg);
    const auto samples = static_cast<std::size_t>(std::llround(cfg.duration * cfg.scenario.radar.prf));
    require(samples >= 2, "duration too short for the PRF");
    std::string index;
    for (const auto& [id, scenario] : scenarios) {
        scenario.validate();
        const fs::path dir = ctx.out / "scenarios" / id;
        const auto times = sigmodel::slow_times(scenario.radar.prf, samples);
        const auto cells = sigmodel::range_cells(scenario, times);
        const auto echoes = rid::cell_echoes(scenario, samples);
        Json cell_list = Json::array();
        for (const auto& [cell, echo] : echoes) {
            io::write_cser(dir / cell_file(cell), echo);
            manifest.add_output(dir / cell_file(cell));
            cell_list.push_back({{"cell", cell}, {"file", cell_file(cell)}, {"scatterers", cells.at(cell)}});
        }
        std::vector<std::string> names;
        std::vector<std::vector<double>> tracks;
        for (int i = 0; i < sigmodel::kScattererCount; ++i) {
            names.push_back(sigmodel::scatterer_name(i));
            std::vector<double> d(samples);
            for (std::size_t m = 0; m < samples; ++m) d[m] = sigmodel::instantaneous_doppler(scenario, i, times[m]);
            tracks.push_back(std::move(d));
        }
        io::write_file(dir / "curves.csv", truth_csv(names, echoes.begin()->second, tracks));
        manifest.add_output(dir / "curves.csv");
        const auto& m = scenario.motion;
        Json meta;
        meta["id"] = id;
        meta["motion"] = sigmodel::to_string(m.kind);
        meta["spin_frequency"] = m.spin_frequency;
        meta["coning_frequency"] = m.coning_frequency;
        meta["nutation_frequency"] = m.nutation_frequency;
        meta["spin_phase"] = m.spin_phase;
        meta["prf"] = scenario.radar.prf;
        meta["samples"] = samples;
        meta["range_resolution"] = scenario.radar.range_resolution();
        meta["cells"] = cell_list;
        io::write_file(dir / "scenario.json", meta.dump(2) + "\n");
        manifest.add_output(dir / "scenario.json");
        index += id + "\n";
        log(ctx, "simulated " + id);
    }
    io::write_file(ctx.out / "scenarios.txt", index);
    manifest.add_output(ctx.out / "scenarios.txt");
    manifest.write(0.0);
}

namespace {

struct SimScenario {
    std::string id;
    std::map<int, std::vector<int>> cells;
    std::map<int, std::string> files;
    double range_resolution = 0.0;
};

SimScenario read_sim_scenario(const fs::path& dir) {
    require_path(dir / "scenario.json", "scenario description");
    const Json meta = Json::parse(io::read_file(dir / "scenario.json"));
    SimScenario s;
    s.id = meta.at("id").get<std::string>();
    s.range_resolution = meta.at("range_resolution").get<double>();
    for (const auto& c : meta.at("cells")) {
        const int cell = c.at("cell").get<int>();
        s.cells[cell] = c.at("scatterers").get<std::vector<int>>();
        s.files[cell] = c.at("file").get<std::string>();
    }
    return s;
}

}  // namespace

void cmd_make_dataset(const Context& ctx) {
    const auto& cfg = ctx.config;
    RunManifest manifest("make-dataset", ctx);
    require_path(ctx.in / "scenarios.txt", "simulation index");
    manifest.add_input(ctx.in, ctx.in / "scenarios.txt");
    const auto ids = read_lines(ctx.in / "scenarios.txt");
    std::vector<dataset::ScenarioSignal> signals;
    for (const auto& id : ids) {
        const fs::path dir = ctx.in / "scenarios" / id;
        const SimScenario sim = read_sim_scenario(dir);
        manifest.add_input(ctx.in, dir / "scenario.json");
        dataset::ScenarioSignal sig;
        sig.id = id;
        sig.selection = dataset::select_cell(sim.cells, cfg.dataset.cell);
        if (sig.selection.scatterers.empty())
            throw PreconditionError("scenario " + id + ": selected cell holds no scatterer");
        bool first = true;
        for (const auto& [cell, members] : sim.cells) {
            if (cfg.dataset.cell.mode != dataset::CellChoice::Mode::All && cell != sig.selection.cell) continue;
            const fs::path f = dir / sim.files.at(cell);
            require_path(f, "echo");
            const auto echo = io::read_cser(f);
            manifest.add_input(ctx.in, f);
            if (first) {
                sig.echo = echo;
                first = false;
            } else {
                if (echo.size() != sig.echo.size()) throw MissingInputError(f.string() + ": length mismatch");
                for (std::size_t m = 0; m < echo.size(); ++m) sig.echo.samples[m] += echo.samples[m];
            }
        }
        require_path(dir / "curves.csv", "truth curves");
        manifest.add_input(ctx.in, dir / "curves.csv");
        sig.doppler = read_truth_columns(dir / "curves.csv", sig.selection.scatterers);
        signals.push_back(std::move(sig));
    }
    const auto split = train::split_dataset(signals.size(), derive_seed(cfg.seed, Stage::Dataset, 0));
    std::vector<bool> is_train(signals.size(), false);
    for (auto k : split.train) is_train[k] = true;

    std::string scen_csv = "scenario,split,cell,scatterers\n";
    std::string pair_csv = "pair,scenario,snr_db,split,s_file,q_file\n";
    for (std::size_t k = 0; k < signals.size(); ++k) {
        const auto& sig = signals[k];
        std::vector<std::string> names;
        std::string members;
        for (int i : sig.selection.scatterers) {
            names.push_back(sigmodel::scatterer_name(i));
            members += (members.empty() ? "" : " ") + std::to_string(i);
        }
        const fs::path echo = ctx.out / "signals" / (sig.id + ".cser");
        const fs::path truth = ctx.out / "signals" / (sig.id + ".truth.csv");
        io::write_cser(echo, sig.echo);
        io::write_file(truth, truth_csv(names, sig.echo, sig.doppler));
        manifest.add_output(echo);
        manifest.add_output(truth);
        scen_csv += sig.id + "," + split_name(is_train[k]) + "," + std::to_string(sig.selection.cell) + "," + members + "\n";
        for (std::size_t j = 0; j < cfg.dataset_snr_db.size(); ++j) {
            const auto pair = dataset::build_pair(sig, cfg.dataset, cfg.dataset_snr_db[j],
                                                  derive_seed(cfg.seed, Stage::Dataset, 1 + k * 1024 + j));
            const std::string name = sig.id + "_n" + std::to_string(j);
            const fs::path s = ctx.out / "pairs" / (name + "_S.tfrb");
            const fs::path q = ctx.out / "pairs" / (name + "_Q.tfrb");
            io::write_tfrb(s, pair.s);
            io::write_tfrb(q, pair.q);
            manifest.add_output(s);
            manifest.add_output(q);
            pair_csv += name + "," + sig.id + "," + fmt(cfg.dataset_snr_db[j]) + "," + split_name(is_train[k]) +
                        ",pairs/" + name + "_S.tfrb,pairs/" + name + "_Q.tfrb\n";
        }
        log(ctx, "dataset pairs for " + sig.id);
    }
    io::write_file(ctx.out / "scenarios.csv", scen_csv);
    io::write_file(ctx.out / "pairs.csv", pair_csv);
    manifest.add_output(ctx.out / "scenarios.csv");
    manifest.add_output(ctx.out / "pairs.csv");
    manifest.write(0.0);
}

void cmd_train(const Context& ctx) {
    const auto& cfg = ctx.config;
    RunManifest manifest("train", ctx);
    require_path(ctx.in / "pairs.csv", "dataset index");
    manifest.add_input(ctx.in, ctx.in / "pairs.csv");
    std::vector<train::TrainingPair> pairs;
    train::Split split;
    for (const auto& row : read_csv(ctx.in / "pairs.csv")) {
        if (row.size() < 6) throw MissingInputError("malformed pairs.csv");
        const auto s = io::read_tfrb(ctx.in / row[4]);
        const auto q = io::read_tfrb(ctx.in / row[5]);
        manifest.add_input(ctx.in, ctx.in / row[4]);
        manifest.add_input(ctx.in, ctx.in / row[5]);
        const auto n = static_cast<std::size_t>(cfg.dataset.raster);
        if (s.rows() != n || s.cols() != n || q.rows() != n || q.cols() != n)
            throw ConfigError("dataset rasters differ from raster = " + std::to_string(n));
        (row[3] == "train" ? split.train : split.test).push_back(pairs.size());
        pairs.push_back({to_tensor(s), to_tensor(q), row[1], std::stod(row[2])});
    }
    if (split.train.empty()) throw MissingInputError("dataset has no training pairs");

    auto nets = build_nets(cfg, true);
    Json pre;
    if (!ctx.init.empty()) {
        require_path(ctx.init, "initial checkpoint");
        net::load_checkpoint(ctx.init, nets->store);
        manifest.add_input(ctx.init.parent_path(), ctx.init);
        pre["source"] = "checkpoint";
    } else {
        log(ctx, "pretraining the base networks on the generic corpus");
        const auto corpus = net::make_generic_corpus(cfg.corpus, derive_seed(cfg.seed, Stage::Pretrain, 0));
        auto report = net::pretrain_base(*nets->gen, nets->store, corpus, cfg.pretrain,
                                         derive_seed(cfg.seed, Stage::Pretrain, 1));
        net::pretrain_discriminator(*nets->disc, nets->store, corpus, cfg.pretrain,
                                    derive_seed(cfg.seed, Stage::Pretrain, 2), &report);
        pre["source"] = "generic corpus";
        pre["initial_val_l2"] = report.initial_val_l2;
        pre["final_val_l2"] = report.final_val_l2;
        pre["disc_initial_loss"] = report.disc_initial_loss;
        pre["disc_final_loss"] = report.disc_final_loss;
        pre["disc_accuracy"] = report.disc_accuracy;
    }
    nets->store.seal();
    const auto part = nets->store.partition();
    pre["frozen_parameters"] = part.frozen_count;
    pre["trainable_parameters"] = part.trainable_count;
    pre["frozen_sha256"] = nets->store.frozen_digest();
    net::save_checkpoint(ctx.out / "init.lsdw", nets->store);
    manifest.add_output(ctx.out / "init.lsdw");

    train::Trainer trainer(*nets->gen, *nets->disc, nets->store, cfg.train);
    const auto history = trainer.fit(pairs, split, [&](const train::HistoryRow& row) {
        log(ctx, "epoch " + std::to_string(row.epoch) + " gen_l2 " + fmt(row.gen_l2) + " test_l2 " + fmt(row.test_l2));
        if (cfg.checkpoint_interval > 0 && row.epoch > 0 && row.epoch % cfg.checkpoint_interval == 0 &&
            row.epoch < cfg.train.epochs) {
            char name[32];
            std::snprintf(name, sizeof name, "epoch_%04d.lsdw", row.epoch);
            net::save_checkpoint(ctx.out / name, nets->store);
            manifest.add_output(ctx.out / name);
        }
    });
    if (nets->store.frozen_digest() != pre["frozen_sha256"].get<std::string>())
        throw NumericalError("frozen partition changed during training");
    net::save_checkpoint(ctx.out / "final.lsdw", nets->store);
    manifest.add_output(ctx.out / "final.lsdw");
    io::write_file(ctx.out / "history.csv", train::history_csv(history));
    manifest.add_output(ctx.out / "history.csv");
    io::write_file(ctx.out / "pretrain.json", pre.dump(2) + "\n");
    manifest.add_output(ctx.out / "pretrain.json");
    manifest.write(0.0);
}

void cmd_enhance(const Context& ctx) {
    RunManifest manifest("enhance", ctx);
    auto nets = load_generator(ctx, manifest);
    require_path(ctx.in, "input");
    std::vector<std::pair<fs::path, fs::path>> jobs;  // input, output
    fs::path root = ctx.in;
    if (fs::is_directory(ctx.in)) {
        require_path(ctx.in / "pairs.csv", "dataset index");
        manifest.add_input(ctx.in, ctx.in / "pairs.csv");
        for (const auto& row : read_csv(ctx.in / "pairs.csv"))
            jobs.emplace_back(ctx.in / row.at(4), ctx.out / "enhanced" / (row.at(0) + ".tfrb"));
    } else {
        root = ctx.in.parent_path();
        jobs.emplace_back(ctx.in, ctx.out / (ctx.in.stem().string() + "_enhanced.tfrb"));
    }
    for (const auto& [src, dst] : jobs) {
        const auto grid = io::read_tfrb(src);
        manifest.add_input(root, src);
        io::write_tfrb(dst, rid::enhance_grid(*nets->gen, grid));
        manifest.add_output(dst);
    }
    log(ctx, "enhanced " + std::to_string(jobs.size()) + " grids");
    manifest.write(0.0);
}

void cmd_image(const Context& ctx) {
    const auto& cfg = ctx.config;
    RunManifest manifest("image", ctx);
    const SimScenario sim = read_sim_scenario(ctx.in);
    manifest.add_input(ctx.in, ctx.in / "scenario.json");
    std::map<int, sigmodel::ComplexSeries> echoes;
    for (const auto& [cell, file] : sim.files) {
        require_path(ctx.in / file, "echo");
        echoes.emplace(cell, io::read_cser(ctx.in / file));
        manifest.add_input(ctx.in, ctx.in / file);
    }
    auto grids = rid::cell_spectrograms(echoes, cfg.dataset.stft, cfg.image_snr_db,
                                        derive_seed(cfg.seed, Stage::Simulate, 7));
    rid::Source source = rid::Source::Stft;
    if (!ctx.checkpoint.empty()) {
        auto nets = load_generator(ctx, manifest);
        for (auto& [cell, g] : grids)
            if (g.max_value() > 0.0) g = tfa::normalize_unit_max(g);
        grids = rid::enhance_cells(grids, *nets->gen, cfg.threads);
        source = rid::Source::Enhanced;
    }
    for (const auto& [cell, g] : grids) {
        const fs::path p = ctx.out / "cells" / ("cell_" + std::to_string(cell) + ".tfrb");
        io::write_tfrb(p, g);
        manifest.add_output(p);
    }
    const auto stack = rid::assemble_rid_frames(grids, sim.range_resolution, source);
    for (const auto& p : rid::export_frames(stack, ctx.out / "frames", static_cast<std::size_t>(cfg.frame_stride)))
        manifest.add_output(p);
    log(ctx, "wrote " + std::to_string(stack.frames.size()) + " frames");
    manifest.write(0.0);
}

void cmd_eval(const Context& ctx) {
    const auto& cfg = ctx.config;
    RunManifest manifest("eval", ctx);
    const auto signals = load_signals(ctx.in, "test", manifest);
    std::unique_ptr<Nets> nets;
    const bool wants_gen = std::find(cfg.sweep.methods.begin(), cfg.sweep.methods.end(),
                                     eval::Method::Enhanced) != cfg.sweep.methods.end();
    if (wants_gen || !ctx.checkpoint.empty()) nets = load_generator(ctx, manifest);
    const auto report = eval::snr_sweep(signals, cfg.dataset, cfg.sweep, nets ? nets->gen.get() : nullptr);
    io::write_file(ctx.out / "report.csv", report.csv(true));
    manifest.add_output(ctx.out / "report.csv", report.csv(false), "runtime_ms");
    io::write_file(ctx.out / "report.dat", report.gnuplot(cfg.sweep.methods));
    manifest.add_output(ctx.out / "report.dat");
    log(ctx, "evaluated " + std::to_string(signals.size()) + " test scenarios");
    manifest.write(0.0);
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Desk-scale LoRA-enhanced ISAR range-instantaneous-Doppler lab", "ridlab"};
    app.require_subcommand(1);
    std::string config_path, out = "out", in, checkpoint, init;
    std::uint64_t seed = 0;
    int threads = 0;
    bool verbose = false;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "Configuration file (key = value lines)");
    auto* seed_opt = app.add_option("--seed", seed, "Root seed (overrides the config)");
    app.add_option("--out", out, "Output directory")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (overrides the config)")->check(CLI::NonNegativeNumber);
    app.add_flag("--verbose,-v", verbose, "Progress messages on stderr");
    app.add_option("--set", sets, "Extra key=value settings applied after the config file");
    app.add_option("--in", in, "Input file or directory of the previous stage");
    app.add_option("--checkpoint", checkpoint, "Generator checkpoint (LSDW)");
    app.add_option("--init", init, "Pretrained starting checkpoint for train (skips pretraining)");
    using Command = void (*)(const Context&);
    const std::vector<std::tuple<std::string, std::string, Command>> commands{
        {"simulate", "Simulate per-range-cell echoes and truth curves", cmd_simulate},
        {"make-dataset", "Build (S, Q) raster pairs and the 8:2 split", cmd_make_dataset},
        {"train", "Pretrain the base, then fine-tune adapters adversarially", cmd_train},
        {"enhance", "Run the generator on TFRB grids", cmd_enhance},
        {"image", "Assemble and export range-instantaneous-Doppler frames", cmd_image},
        {"eval", "SNR sweep of ridge RMSE for STFT and enhanced TFRs", cmd_eval},
    };
    for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        Context ctx;
        if (!config_path.empty()) {
            ctx.config_path = config_path;
            ctx.config = config::load_config(config_path);
        }
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
            config::apply_setting(ctx.config, s.substr(0, eq), s.substr(eq + 1));
        }
        if (*seed_opt) ctx.config.seed = seed;
        if (threads > 0) ctx.config.threads = threads;
        ctx.config.finalize();
        ctx.config.validate();
        ctx.in = in;
        ctx.out = out;
        ctx.checkpoint = checkpoint;
        ctx.init = init;
        ctx.verbose = verbose;
        fs::create_directories(ctx.out);
        for (const auto& [name, help, fn] : commands) {
            if (!app.got_subcommand(name)) continue;
            const auto t0 = std::chrono::steady_clock::now();
            fn(ctx);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            Json t{{"command", name}, {"wall_clock_seconds", secs}};
            io::write_file(ctx.out / "timing.json", t.dump(2) + "\n");
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "ridlab: config error: " << e.what() << '\n';
        return 1;
    } catch (const PreconditionError& e) {
        std::cerr << "ridlab: invalid setting: " << e.what() << '\n';
        return 1;
    } catch (const MissingInputError& e) {
        std::cerr << "ridlab: missing input: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "ridlab: numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const DegeneracyError& e) {
        std::cerr << "ridlab: numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "ridlab: " << e.what() << '\n';
        return 1;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"ridlab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ridlab::cli
