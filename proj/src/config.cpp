#include "ridlab/config.hpp"

#include "ridlab/errors.hpp"
#include "ridlab/io.hpp"
#include "ridlab/seed.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

namespace ridlab::config {

namespace {

constexpr double kDeg = sigmodel::kPi / 180.0;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& v) {
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
        throw PreconditionError("expected a number, got '" + v + "'");
    return x;
}

long long to_integer(const std::string& v) {
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw PreconditionError("expected an integer, got '" + v + "'");
    return x;
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
    return s;
}

struct Entry {
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
Entry real(std::string key, Access access, double scale = 1.0) {
    return {std::move(key),
            [=](RunConfig& c, const std::string& v) { access(c) = to_double(v) * scale; },
            [=](const RunConfig& c) { return fmt(access(const_cast<RunConfig&>(c)) / scale); }};
}

template <typename Access>
Entry integer(std::string key, Access access) {
    return {std::move(key),
            [=](RunConfig& c, const std::string& v) {
                using T = std::remove_reference_t<decltype(access(c))>;
                access(c) = static_cast<T>(to_integer(v));
            },
            [=](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

template <typename Access>
Entry real_list(std::string key, Access access) {
    return {std::move(key),
            [=](RunConfig& c, const std::string& v) {
                std::vector<double> out;
                for (const auto& s : split_list(v)) out.push_back(to_double(s));
                access(c) = out;
            },
            [=](const RunConfig& c) {
                return join<double>(access(const_cast<RunConfig&>(c)), [](const double& x) { return fmt(x); });
            }};
}

template <typename Access>
Entry int_list(std::string key, Access access) {
    return {std::move(key),
            [=](RunConfig& c, const std::string& v) {
                std::vector<int> out;
                for (const auto& s : split_list(v)) out.push_back(static_cast<int>(to_integer(s)));
                access(c) = out;
            },
            [=](const RunConfig& c) {
                return join<int>(access(const_cast<RunConfig&>(c)), [](const int& x) { return std::to_string(x); });
            }};
}

std::string window_name(tfa::WindowKind w) {
    switch (w) {
        case tfa::WindowKind::Hann: return "hann";
        case tfa::WindowKind::Rect: return "rect";
        case tfa::WindowKind::Gauss: return "gauss";
    }
    return "hann";
}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = [] {
        std::vector<Entry> e;
        e.push_back(integer("seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; }));
        e.push_back(integer("threads", [](RunConfig& c) -> int& { return c.threads; }));
        e.push_back({"grid",
                     [](RunConfig& c, const std::string& v) {
                         if (v != "single")
                             for (const auto& k : split_list(v)) sigmodel::motion_kind_from_string(k);
                         c.grid = v;
                     },
                     [](const RunConfig& c) { return c.grid; }});
        e.push_back(integer("multiplicity", [](RunConfig& c) -> int& { return c.multiplicity; }));
        e.push_back(integer("scenario_count", [](RunConfig& c) -> int& { return c.scenario_count; }));
        e.push_back(real("duration", [](RunConfig& c) -> double& { return c.duration; }));
        e.push_back({"motion",
                     [](RunConfig& c, const std::string& v) { c.scenario.motion.kind = sigmodel::motion_kind_from_string(v); },
                     [](const RunConfig& c) { return sigmodel::to_string(c.scenario.motion.kind); }});
        e.push_back(real("spin_frequency", [](RunConfig& c) -> double& { return c.scenario.motion.spin_frequency; }));
        e.push_back(real("coning_frequency", [](RunConfig& c) -> double& { return c.scenario.motion.coning_frequency; }));
        e.push_back(real("nutation_frequency", [](RunConfig& c) -> double& { return c.scenario.motion.nutation_frequency; }));
        e.push_back(real("precession_angle_deg", [](RunConfig& c) -> double& { return c.scenario.motion.precession_angle; }, kDeg));
        e.push_back(real("nutation_amplitude_deg", [](RunConfig& c) -> double& { return c.scenario.motion.nutation_amplitude; }, kDeg));
        e.push_back(real("spin_phase_deg", [](RunConfig& c) -> double& { return c.scenario.motion.spin_phase; }, kDeg));
        e.push_back(real("coning_phase_deg", [](RunConfig& c) -> double& { return c.scenario.motion.coning_phase; }, kDeg));
        e.push_back(real("nutation_phase_deg", [](RunConfig& c) -> double& { return c.scenario.motion.nutation_phase; }, kDeg));
        e.push_back(real("cone_height", [](RunConfig& c) -> double& { return c.scenario.geometry.height; }));
        e.push_back(real("base_radius", [](RunConfig& c) -> double& { return c.scenario.geometry.base_radius; }));
        e.push_back(real("ring_height_fraction", [](RunConfig& c) -> double& { return c.scenario.geometry.ring_height_fraction; }));
        e.push_back({"los_elevation_deg",
                     [](RunConfig& c, const std::string& v) { c.scenario.radar_los = sigmodel::los_from_elevation(to_double(v) * kDeg); },
                     [](const RunConfig& c) {
                         const auto& l = c.scenario.radar_los;
                         return fmt(std::atan2(l.z(), std::hypot(l.x(), l.y())) / kDeg);
                     }});
        e.push_back(real("standoff_range", [](RunConfig& c) -> double& { return c.scenario.standoff_range; }));
        e.push_back(real("carrier_frequency", [](RunConfig& c) -> double& { return c.scenario.radar.carrier_frequency; }));
        e.push_back(real("bandwidth", [](RunConfig& c) -> double& { return c.scenario.radar.bandwidth; }));
        e.push_back(real("prf", [](RunConfig& c) -> double& { return c.scenario.radar.prf; }));
        e.push_back({"amplitudes",
                     [](RunConfig& c, const std::string& v) {
                         const auto items = split_list(v);
                         if (items.size() != sigmodel::kScattererCount)
                             throw PreconditionError("amplitudes needs " + std::to_string(sigmodel::kScattererCount) + " values");
                         for (std::size_t i = 0; i < items.size(); ++i) c.scenario.amplitudes[i] = to_double(items[i]);
                     },
                     [](const RunConfig& c) {
                         std::string s;
                         for (std::size_t i = 0; i < c.scenario.amplitudes.size(); ++i)
                             s += (i ? "," : "") + fmt(c.scenario.amplitudes[i].real());
                         return s;
                     }});
        e.push_back(integer("raster", [](RunConfig& c) -> int& { return c.dataset.raster; }));
        e.push_back(real("dataset_dwell", [](RunConfig& c) -> double& { return c.dataset.dwell; }));
        e.push_back({"window",
                     [](RunConfig& c, const std::string& v) {
                         if (v == "hann") c.dataset.stft.window = tfa::WindowKind::Hann;
                         else if (v == "rect") c.dataset.stft.window = tfa::WindowKind::Rect;
                         else if (v == "gauss") c.dataset.stft.window = tfa::WindowKind::Gauss;
                         else throw PreconditionError("window must be hann, rect or gauss");
                     },
                     [](const RunConfig& c) { return window_name(c.dataset.stft.window); }});
        e.push_back(integer("window_length", [](RunConfig& c) -> int& { return c.dataset.stft.window_length; }));
        e.push_back(integer("hop", [](RunConfig& c) -> int& { return c.dataset.stft.hop; }));
        e.push_back(integer("nfft", [](RunConfig& c) -> int& { return c.dataset.stft.nfft; }));
        e.push_back(real("gauss_sigma", [](RunConfig& c) -> double& { return c.dataset.stft.gauss_sigma; }));
        e.push_back({"cell",
                     [](RunConfig& c, const std::string& v) { c.dataset.cell = dataset::CellChoice::parse(v); },
                     [](const RunConfig& c) { return c.dataset.cell.str(); }});
        e.push_back(real("q_spread", [](RunConfig& c) -> double& { return c.dataset.q_spread; }));
        e.push_back(real_list("dataset_snr_db", [](RunConfig& c) -> std::vector<double>& { return c.dataset_snr_db; }));
        e.push_back(int_list("channels", [](RunConfig& c) -> std::vector<int>& { return c.generator.channels; }));
        e.push_back(integer("residual_blocks", [](RunConfig& c) -> int& { return c.generator.residual_blocks; }));
        e.push_back(integer("lora_rank", [](RunConfig& c) -> int& { return c.generator.lora_rank; }));
        e.push_back(real("lora_scale", [](RunConfig& c) -> double& { return c.generator.lora_scale; }));
        e.push_back(real("lora_init_std", [](RunConfig& c) -> double& { return c.generator.lora_init_std; }));
        e.push_back(int_list("disc_channels", [](RunConfig& c) -> std::vector<int>& { return c.discriminator.channels; }));
        e.push_back(integer("corpus_count", [](RunConfig& c) -> int& { return c.corpus.count; }));
        e.push_back(integer("corpus_max_curves", [](RunConfig& c) -> int& { return c.corpus.max_curves; }));
        e.push_back(real("corpus_noise_max", [](RunConfig& c) -> double& { return c.corpus.noise_max; }));
        e.push_back(integer("pretrain_epochs", [](RunConfig& c) -> int& { return c.pretrain.epochs; }));
        e.push_back(integer("pretrain_batch_size", [](RunConfig& c) -> int& { return c.pretrain.batch_size; }));
        e.push_back(real("pretrain_learning_rate", [](RunConfig& c) -> double& { return c.pretrain.learning_rate; }));
        e.push_back(integer("disc_pretrain_epochs", [](RunConfig& c) -> int& { return c.pretrain.disc_epochs; }));
        e.push_back(real("disc_pretrain_learning_rate", [](RunConfig& c) -> double& { return c.pretrain.disc_learning_rate; }));
        e.push_back(real("alpha", [](RunConfig& c) -> double& { return c.train.alpha; }));
        e.push_back(real("beta", [](RunConfig& c) -> double& { return c.train.beta; }));
        e.push_back(real("learning_rate", [](RunConfig& c) -> double& { return c.train.learning_rate; }));
        e.push_back(real("weight_decay", [](RunConfig& c) -> double& { return c.train.weight_decay; }));
        e.push_back(integer("epochs", [](RunConfig& c) -> int& { return c.train.epochs; }));
        e.push_back(integer("batch_size", [](RunConfig& c) -> int& { return c.train.batch_size; }));
        e.push_back(real("clamp_eps", [](RunConfig& c) -> double& { return c.train.clamp_eps; }));
        e.push_back(integer("checkpoint_interval", [](RunConfig& c) -> int& { return c.checkpoint_interval; }));
        e.push_back(real_list("eval_snr_db", [](RunConfig& c) -> std::vector<double>& { return c.sweep.snr_db; }));
        e.push_back(integer("eval_seeds", [](RunConfig& c) -> int& { return c.sweep.seeds; }));
        e.push_back({"eval_methods",
                     [](RunConfig& c, const std::string& v) {
                         std::vector<eval::Method> m;
                         for (const auto& s : split_list(v)) m.push_back(eval::method_from_string(s));
                         c.sweep.methods = m;
                     },
                     [](const RunConfig& c) {
                         return join<eval::Method>(c.sweep.methods, [](const eval::Method& m) { return eval::to_string(m); });
                     }});
        e.push_back(real("ridge_gate_bins", [](RunConfig& c) -> double& { return c.sweep.ridge.gate_bins; }));
        e.push_back(real("crossing_bins", [](RunConfig& c) -> double& { return c.sweep.crossing_bins; }));
        e.push_back(real("image_snr_db", [](RunConfig& c) -> double& { return c.image_snr_db; }));
        e.push_back(integer("frame_stride", [](RunConfig& c) -> int& { return c.frame_stride; }));
        return e;
    }();
    return entries;
}

}  // namespace

void RunConfig::finalize() {
    generator.input_size = dataset.raster;
    discriminator.input_size = dataset.raster;
    corpus.size = dataset.raster;
    train.seed = derive_seed(seed, Stage::Train);
    sweep.root_seed = seed;
    sweep.threads = threads;
}

void RunConfig::validate() const {
    scenario.validate();
    dataset.validate();
    generator.validate();
    discriminator.validate();
    train.validate();
    require(threads >= 1, "threads must be at least 1");
    require(duration > 0.0, "duration must be positive");
    require(multiplicity >= 0 && scenario_count >= 0, "multiplicity and scenario_count must be non-negative");
    require(checkpoint_interval >= 0, "checkpoint_interval must be non-negative");
    require(frame_stride >= 1, "frame_stride must be at least 1");
    require(!dataset_snr_db.empty(), "dataset_snr_db must list at least one SNR");
    require(sweep.seeds >= 1, "eval_seeds must be at least 1");
}

std::vector<std::pair<std::string, std::string>> RunConfig::snapshot() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : registry()) out.emplace_back(e.key, e.get(*this));
    return out;
}

std::vector<std::string> known_keys() {
    std::vector<std::string> k;
    for (const auto& e : registry()) k.push_back(e.key);
    return k;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value, int line) {
    for (const auto& e : registry()) {
        if (e.key != key) continue;
        try {
            e.set(config, value);
        } catch (const std::exception& ex) {
            throw ConfigError(key + ": " + ex.what(), line);
        }
        return;
    }
    throw ConfigError("unknown key '" + key + "'", line);
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError("expected 'key = value'", line);
        apply_setting(base, key, value, line);
    }
    return base;
}

RunConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw MissingInputError("config file not found: " + path.string());
    return parse_config(io::read_file(path));
}

std::vector<NamedScenario> expand_scenarios(const RunConfig& config) {
    std::vector<NamedScenario> all;
    if (config.grid == "single") {
        all.push_back({"single", config.scenario});
    } else {
        for (const auto& name : split_list(config.grid)) {
            const auto kind = sigmodel::motion_kind_from_string(name);
            const int mult = config.multiplicity > 0 ? config.multiplicity : sigmodel::default_multiplicity(kind);
            const auto motions = sigmodel::motion_grid(kind, mult, config.scenario.motion);
            for (std::size_t i = 0; i < motions.size(); ++i) {
                NamedScenario s{name + "_" + std::to_string(i), config.scenario};
                s.scenario.motion = motions[i];
                all.push_back(std::move(s));
            }
        }
    }
    if (config.scenario_count == 0 || static_cast<std::size_t>(config.scenario_count) >= all.size()) return all;
    std::vector<NamedScenario> subset;
    const auto n = static_cast<std::size_t>(config.scenario_count);
    for (std::size_t i = 0; i < n; ++i) subset.push_back(all[i * all.size() / n]);
    return subset;
}

}  // namespace ridlab::config
