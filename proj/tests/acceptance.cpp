// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "oracles.hpp"

#include "ridlab/cli/commands.hpp"
#include "ridlab/dataset.hpp"
#include "ridlab/eval.hpp"
#include "ridlab/io.hpp"
#include "ridlab/net/checkpoint.hpp"
#include "ridlab/net/pretrain.hpp"
#include "ridlab/rid.hpp"
#include "ridlab/seed.hpp"
#include "ridlab/sigmodel.hpp"
#include "ridlab/tfa.hpp"
#include "ridlab/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace ridlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

class Clock {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
    Clock clock;
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %-22s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
                clock.seconds(), o.detail.c_str());
    std::fflush(stdout);
}

// 1 ---------------------------------------------------------------------------------------

Outcome no_op_at_init() {
    Clock clock;
    net::ParameterStore store;
    net::GeneratorConfig cfg;
    cfg.input_size = 128;
    net::Generator gen(store, cfg, derive_seed(1, Stage::Init, 1), "gen");
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto x = oracle::random_tensor(1, 128, 128, rng);
        const auto a = gen.forward(x), b = gen.forward_base(x);
        for (std::size_t i = 0; i < a.data.size(); ++i) worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    }
    const double t = clock.seconds();
    return {worst <= 1e-6 && t < 10.0, format("max|G - G_base| = %.3g over 100 inputs, %.1fs", worst, t)};
}

// 2 ---------------------------------------------------------------------------------------

Outcome gradient_check() {
    net::ParameterStore store;
    net::GeneratorConfig g;
    g.input_size = 8;
    g.channels = {3, 4};
    g.residual_blocks = 1;
    g.lora_rank = 2;
    net::DiscriminatorConfig d;
    d.input_size = 8;
    d.channels = {2, 3, 3, 4};
    net::Generator gen(store, g, 21, "gen");
    net::Discriminator disc(store, d, 22, "disc");
    std::mt19937_64 rng(23);
    for (auto* p : store.trainable()) oracle::randomize(*p, 0.2, rng);
    const auto s = oracle::random_tensor(1, 8, 8, rng);
    const auto q = oracle::random_tensor(1, 8, 8, rng);
    const double beta = 0.5, eps = 1e-6;

    store.zero_grad();
    net::GeneratorTape gt;
    const auto out = gen.forward(s, &gt);
    net::DiscriminatorTape dt;
    const double p = disc.forward(out, &dt).prob;
    // d/dlogit of beta log(1 - sigmoid) is -beta p
    auto grad = disc.backward(dt, -beta * p);
    for (std::size_t i = 0; i < grad.data.size(); ++i) grad.data[i] += 2.0 * (out.data[i] - q.data[i]);
    gen.backward(gt, grad);

    auto loss = [&] {
        const auto o = gen.forward(s);
        return oracle::generator_objective({o}, {q}, {disc.forward(o).prob}, beta, eps);
    };
    const auto r = oracle::finite_difference(store.trainable("gen"), loss, 1e-4, 1e-2, 1e-4);
    return {r.failed == 0 && r.checked > 0,
            format("%zu scalars, worst relative error %.2e (%s 1e-4), h = 1e-4", r.checked, r.worst,
                   r.worst < 1e-4 ? "<" : ">=")};
}

// 3 ---------------------------------------------------------------------------------------

sigmodel::ComplexSeries tone(double f, double fs, std::size_t n) {
    sigmodel::ComplexSeries x;
    x.sample_rate = fs;
    for (std::size_t m = 0; m < n; ++m)
        x.samples.push_back(std::polar(1.0, 2.0 * sigmodel::kPi * f * static_cast<double>(m) / fs));
    return x;
}

Outcome stft_checks() {
    tfa::StftConfig cfg;
    cfg.nfft = 256;
    cfg.window_length = 64;
    const auto spec = tfa::spectrogram(tfa::stft(tone(100.0, 1000.0, 1000), cfg));
    std::size_t hits = 0;
    for (std::size_t c = 0; c < spec.cols(); ++c) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < spec.rows(); ++r)
            if (spec.at(r, c) > spec.at(best, c)) best = r;
        if (std::abs(spec.freq_axis.at(best) - 100.0) <= spec.freq_axis.step / 2) ++hits;
    }

    tfa::StftConfig rect;
    rect.window = tfa::WindowKind::Rect;
    rect.window_length = 48;
    rect.nfft = 48;
    rect.hop = 5;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n01(0.0, 1.0);
    sigmodel::ComplexSeries x;
    x.sample_rate = 1000.0;
    for (int m = 0; m < 700; ++m) x.samples.emplace_back(n01(rng), n01(rng));
    const auto p = tfa::spectrogram(tfa::stft(x, rect));
    double worst = 0.0;
    for (std::size_t c = 0; c < p.cols(); ++c) {
        double time_energy = 0.0, freq_energy = 0.0;
        for (int m = 0; m < rect.window_length; ++m)
            time_energy += std::norm(x.samples[c * static_cast<std::size_t>(rect.hop) + static_cast<std::size_t>(m)]);
        for (std::size_t r = 0; r < p.rows(); ++r) freq_energy += p.at(r, c);
        worst = std::max(worst, std::abs(freq_energy / rect.nfft - time_energy) / time_energy);
    }
    return {hits == spec.cols() && worst < 1e-6,
            format("argmax at +100 Hz in %zu/%zu columns; Parseval worst %.2e over %zu columns", hits,
                   spec.cols(), worst, p.cols())};
}

// 4 ---------------------------------------------------------------------------------------

Outcome kinematics_oracle() {
    constexpr double kFloorHz = 1.0;  // relative error is taken against max(|f|, 1 Hz)
    const double dt = 1e-6;
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> when(0.0, 2.0);
    std::size_t points = 0, checks = 0, failed = 0;
    double worst = 0.0;
    for (auto kind : {sigmodel::MotionKind::Spin, sigmodel::MotionKind::Precession, sigmodel::MotionKind::Nutation})
        for (const auto& motion : sigmodel::motion_grid(kind)) {
            ++points;
            sigmodel::TargetScenario s;
            s.motion = motion;
            const double lambda = s.radar.wavelength();
            for (int k = 0; k < 100; ++k) {
                const double t = when(rng);
                for (int i = 0; i < sigmodel::kScattererCount; ++i) {
                    const auto r = sigmodel::range_history(s, i, {t - dt, t + dt});
                    const double numeric = -(2.0 / lambda) * (r[1] - r[0]) / (2 * dt);
                    const double analytic = sigmodel::instantaneous_doppler(s, i, t);
                    const double rel = std::abs(analytic - numeric) / std::max(std::abs(numeric), kFloorHz);
                    worst = std::max(worst, rel);
                    ++checks;
                    if (rel >= 1e-3) ++failed;
                }
            }
        }
    return {failed == 0 && points == 68,
            format("%zu grid points, %zu checks, worst relative error %.2e (1 Hz floor)", points, checks, worst)};
}

// 5, 7, 8 -----------------------------------------------------------------------------------

constexpr std::uint64_t kRoot = 1;
constexpr int kRaster = 64;
constexpr int kEpochs = 30;

struct Study {
    dataset::DatasetConfig data;
    std::vector<dataset::ScenarioSignal> signals;
    std::vector<dataset::ScenarioSignal> test_signals;
    std::vector<train::TrainingPair> pairs;
    train::Split split;
    std::string init_checkpoint;
    double setup_seconds = 0.0;
};

struct Run {
    std::vector<train::HistoryRow> history;
    eval::SweepReport report;
    std::string frozen_before, frozen_after;
    std::size_t disc_trainable = 0;
    std::size_t disc_head_in = 0;
    double seconds = 0.0;
};

net::GeneratorConfig study_generator() {
    net::GeneratorConfig g;
    g.input_size = kRaster;
    return g;
}

net::DiscriminatorConfig study_discriminator() {
    net::DiscriminatorConfig d;
    d.input_size = kRaster;
    return d;
}

Study build_study() {
    Clock clock;
    Study st;
    st.data.raster = kRaster;
    auto pool = sigmodel::motion_grid(sigmodel::MotionKind::Spin,
                                      sigmodel::default_multiplicity(sigmodel::MotionKind::Spin));
    const auto pre = sigmodel::motion_grid(sigmodel::MotionKind::Precession,
                                           sigmodel::default_multiplicity(sigmodel::MotionKind::Precession));
    pool.insert(pool.end(), pre.begin(), pre.end());
    constexpr std::size_t kScenarios = 60;
    for (std::size_t i = 0; i < kScenarios; ++i) {
        sigmodel::TargetScenario s;
        s.motion = pool[i * pool.size() / kScenarios];
        st.signals.push_back(dataset::scenario_signal(s, st.data, "s" + std::to_string(i)));
    }
    const auto scenario_split = train::split_dataset(st.signals.size(), derive_seed(kRoot, Stage::Dataset, 0));
    const std::vector<double> snrs{0, 4, 8, 12};
    auto add = [&](std::size_t k, std::vector<std::size_t>& side) {
        for (std::size_t j = 0; j < snrs.size(); ++j) {
            const auto p = dataset::build_pair(st.signals[k], st.data, snrs[j],
                                               derive_seed(kRoot, Stage::Dataset, 1 + k * 1024 + j));
            train::TrainingPair tp;
            tp.s = net::Tensor(1, kRaster, kRaster);
            tp.q = net::Tensor(1, kRaster, kRaster);
            tp.s.data = p.s.values();
            tp.q.data = p.q.values();
            tp.scenario_id = st.signals[k].id;
            tp.snr_db = snrs[j];
            side.push_back(st.pairs.size());
            st.pairs.push_back(std::move(tp));
        }
    };
    for (std::size_t k : scenario_split.train) add(k, st.split.train);
    for (std::size_t k : scenario_split.test) {
        add(k, st.split.test);
        st.test_signals.push_back(st.signals[k]);
    }

    net::ParameterStore store;
    net::Generator gen(store, study_generator(), derive_seed(kRoot, Stage::Init, 1), "gen");
    net::Discriminator disc(store, study_discriminator(), derive_seed(kRoot, Stage::Init, 2), "disc");
    net::CorpusConfig cc;
    cc.size = kRaster;
    const auto corpus = net::make_generic_corpus(cc, derive_seed(kRoot, Stage::Pretrain, 0));
    net::PretrainConfig pc;
    net::pretrain_base(gen, store, corpus, pc, derive_seed(kRoot, Stage::Pretrain, 1));
    net::pretrain_discriminator(disc, store, corpus, pc, derive_seed(kRoot, Stage::Pretrain, 2));
    store.seal();
    st.init_checkpoint = net::encode_checkpoint(store);
    st.setup_seconds = clock.seconds();
    return st;
}

Run train_and_sweep(const Study& st, double beta) {
    Clock clock;
    net::ParameterStore store;
    net::Generator gen(store, study_generator(), 0, "gen");
    net::Discriminator disc(store, study_discriminator(), 0, "disc");
    net::apply_checkpoint(net::decode_checkpoint(st.init_checkpoint), store);
    store.seal();

    Run run;
    run.frozen_before = store.frozen_digest();
    for (const auto* p : store.trainable("disc")) run.disc_trainable += p->size();
    run.disc_head_in = static_cast<std::size_t>(disc.config().feature_dim());

    train::TrainConfig tc = train::TrainConfig::desk();
    tc.learning_rate = 1e-3;
    tc.epochs = kEpochs;
    tc.beta = beta;
    tc.seed = derive_seed(kRoot, Stage::Train, 0);
    train::Trainer trainer(gen, disc, store, tc);
    run.history = trainer.fit(st.pairs, st.split);
    run.frozen_after = store.frozen_digest();

    eval::SweepConfig sw;
    sw.snr_db = {0, 4, 8};
    sw.seeds = 10;
    sw.root_seed = derive_seed(kRoot, Stage::Eval, 0);
    sw.methods = {eval::Method::Stft, eval::Method::Enhanced};
    run.report = eval::snr_sweep(st.test_signals, st.data, sw, &gen);
    run.seconds = clock.seconds();
    return run;
}

std::string rmse_line(const eval::SweepReport& r) {
    std::string out;
    for (double snr : {0.0, 4.0, 8.0})
        out += format("%s%g dB stft %.1f / enhanced %.1f Hz", out.empty() ? "" : "; ", snr,
                      r.find(snr, eval::Method::Stft)->rmse_hz, r.find(snr, eval::Method::Enhanced)->rmse_hz);
    return out;
}

Outcome frozen_immutability(const Run& run) {
    const bool same = run.frozen_before == run.frozen_after;
    const bool head = run.disc_trainable == run.disc_head_in + 1;
    return {same && head && run.history.size() == kEpochs + 1,
            format("%d epochs, frozen SHA-256 %s (%.12s...); trainable disc scalars %zu = %zu + 1", kEpochs,
                   same ? "unchanged" : "CHANGED", run.frozen_after.c_str(), run.disc_trainable, run.disc_head_in)};
}

Outcome relative_performance(const Study& st, const Run& run) {
    bool better = true;
    for (double snr : {0.0, 4.0, 8.0})
        better = better && run.report.find(snr, eval::Method::Enhanced)->rmse_hz <
                               run.report.find(snr, eval::Method::Stft)->rmse_hz;
    const double l0 = run.history.front().gen_l2, l1 = run.history.back().gen_l2;
    const double total = st.setup_seconds + run.seconds;
    return {better && l1 < 0.5 * l0 && total < 480.0,
            format("%s; train L2 %.1f -> %.1f; %zu/%zu train/test pairs; %.0fs", rmse_line(run.report).c_str(), l0,
                   l1, st.split.train.size(), st.split.test.size(), total)};
}

Outcome ablation(const Run& with_adv, const Run& l2_only) {
    bool complete = with_adv.history.size() == kEpochs + 1 && l2_only.history.size() == kEpochs + 1;
    for (const auto* r : {&with_adv.report, &l2_only.report})
        for (double snr : {0.0, 4.0, 8.0}) complete = complete && r->find(snr, eval::Method::Enhanced);
    std::string d;
    for (double snr : {0.0, 4.0, 8.0})
        d += format("%s%g dB beta=0.5 %.1f / beta=0 %.1f Hz", d.empty() ? "" : "; ", snr,
                    with_adv.report.find(snr, eval::Method::Enhanced)->rmse_hz,
                    l2_only.report.find(snr, eval::Method::Enhanced)->rmse_hz);
    return {complete, d + format("; %.0fs", l2_only.seconds)};
}

// 6 ---------------------------------------------------------------------------------------

const char* kPipelineConfig =
    "seed = 5\n"
    "grid = spin,precession\n"
    "scenario_count = 10\n"
    "duration = 0.8\n"
    "raster = 16\n"
    "channels = 4,8\n"
    "disc_channels = 4,8,8,16\n"
    "corpus_count = 16\n"
    "pretrain_epochs = 2\n"
    "disc_pretrain_epochs = 1\n"
    "epochs = 5\n"
    "eval_seeds = 2\n"
    "dataset_snr_db = 0,8\n";

Outcome determinism() {
    const auto base = fs::temp_directory_path() / "ridlab_acceptance_determinism";
    fs::remove_all(base);
    const std::vector<std::string> stages{"simulate", "make-dataset", "train", "eval"};
    std::vector<std::vector<std::string>> manifests(2);
    for (int r = 0; r < 2; ++r) {
        const auto root = base / ("run" + std::to_string(r));
        fs::create_directories(root);
        io::write_file(root / "pipeline.cfg", kPipelineConfig);
        auto at = [&](const std::string& s) { return (root / s).string(); };
        const std::string cfg = at("pipeline.cfg");
        const std::vector<std::vector<std::string>> cmds{
            {"--config", cfg, "--out", at("sim"), "simulate"},
            {"--config", cfg, "--in", at("sim"), "--out", at("ds"), "make-dataset"},
            {"--config", cfg, "--in", at("ds"), "--out", at("tr"), "train"},
            {"--config", cfg, "--in", at("ds"), "--checkpoint", at("tr/final.lsdw"), "--out", at("ev"), "eval"}};
        for (std::size_t k = 0; k < cmds.size(); ++k) {
            const int code = cli::run(cmds[k]);
            if (code != 0) return {false, stages[k] + " exited with " + std::to_string(code)};
        }
        for (const char* dir : {"sim", "ds", "tr", "ev"})
            manifests[r].push_back(io::read_file(root / dir / "manifest.json"));
    }
    fs::remove_all(base);
    std::size_t same = 0;
    for (std::size_t k = 0; k < stages.size(); ++k) same += manifests[0][k] == manifests[1][k];
    return {same == stages.size(),
            format("%zu/%zu stage manifests byte-identical across two runs", same, stages.size())};
}

// 9 ---------------------------------------------------------------------------------------

struct Tracking {
    std::size_t hits = 0;
    std::size_t columns = 0;
    double fraction() const { return columns ? static_cast<double>(hits) / columns : 0.0; }
};

// Peak of every noise-free RID frame against the scatterer's folded true Doppler, in its own cell.
Tracking track_single_scatterer(sigmodel::MotionKind kind, int scatterer, int window_length) {
    sigmodel::TargetScenario s;
    s.motion = sigmodel::motion_grid(kind).front();
    s.amplitudes.fill(0.0);
    s.amplitudes[static_cast<std::size_t>(scatterer)] = 1.0;
    const std::size_t samples = 1000;
    tfa::StftConfig stft;
    stft.window_length = window_length;
    const auto echoes = rid::cell_echoes(s, samples);
    const auto stack = rid::assemble_rid_frames(rid::cell_spectrograms(echoes, stft, sigmodel::kNoNoise, 0),
                                                s.radar.range_resolution());
    const int cell = sigmodel::scatterer_cells(s, sigmodel::slow_times(s.radar.prf, samples))[static_cast<std::size_t>(scatterer)];
    Tracking t;
    for (std::size_t c = 0; c < stack.frames.size(); ++c) {
        const auto& f = stack.frames[c];
        const auto best = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
        const double truth = sigmodel::instantaneous_doppler(s, scatterer, stack.slow_time_axis.at(c));
        const double got = stack.doppler_axis.at(best % stack.doppler_count);
        const double miss = std::abs(sigmodel::alias_frequency(got - truth, s.radar.prf));
        const bool right_cell = static_cast<int>(best / stack.doppler_count) + stack.first_cell == cell;
        if (right_cell && miss <= stack.doppler_axis.step) ++t.hits;
        ++t.columns;
    }
    return t;
}

Outcome rid_tracking() {
    const auto apex = track_single_scatterer(sigmodel::MotionKind::Precession, 3, 64);
    const auto ring_short = track_single_scatterer(sigmodel::MotionKind::Spin, 0, 32);
    const auto ring_default = track_single_scatterer(sigmodel::MotionKind::Spin, 0, 64);
    return {apex.fraction() >= 0.95 && ring_short.fraction() >= 0.95,
            format("precession apex L=64 %.1f%%; spin ring L=32 %.1f%% (L=64 %.1f%%, reported only)",
                   100 * apex.fraction(), 100 * ring_short.fraction(), 100 * ring_default.fraction())};
}

// 10 --------------------------------------------------------------------------------------

Outcome split_check() {
    const auto a = train::split_dataset(100, 77);
    const auto b = train::split_dataset(100, 77);
    const auto c = train::split_dataset(100, 78);
    std::vector<std::size_t> all = a.train;
    all.insert(all.end(), a.test.begin(), a.test.end());
    std::sort(all.begin(), all.end());
    bool cover = all.size() == 100;
    for (std::size_t i = 0; cover && i < all.size(); ++i) cover = all[i] == i;
    const bool same = a.train == b.train && a.test == b.test;
    return {a.train.size() == 80 && a.test.size() == 20 && cover && same && c.train != a.train,
            format("%zu/%zu, disjoint cover %s, same seed identical %s", a.train.size(), a.test.size(),
                   cover ? "yes" : "no", same ? "yes" : "no")};
}

}  // namespace

int main() {
    Clock total;
    report(1, "no-op at init", no_op_at_init);
    report(2, "gradient check", gradient_check);
    report(3, "stft", stft_checks);
    report(4, "kinematics oracle", kinematics_oracle);

    Study study;
    Run adv, l2_only;
    bool study_ok = true;
    std::string study_error;
    try {
        study = build_study();
        adv = train_and_sweep(study, 0.5);
        l2_only = train_and_sweep(study, 0.0);
    } catch (const std::exception& e) {
        study_ok = false;
        study_error = e.what();
    }
    auto guarded = [&](auto f) {
        return [=]() -> Outcome { return study_ok ? f() : Outcome{false, "study failed: " + study_error}; };
    };
    report(5, "frozen immutability", guarded([&] { return frozen_immutability(adv); }));
    report(6, "determinism", determinism);
    report(7, "relative performance", guarded([&] { return relative_performance(study, adv); }));
    report(8, "adversarial ablation", guarded([&] { return ablation(adv, l2_only); }));
    report(9, "rid tracking", rid_tracking);
    report(10, "dataset split", split_check);
    std::printf("%d of 10 criteria failed; %.0fs total\n", failures, total.seconds());
    return failures == 0 ? 0 : 1;
}
