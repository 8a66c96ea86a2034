#pragma once

#include "ridlab/dataset.hpp"
#include "ridlab/eval.hpp"
#include "ridlab/net/discriminator.hpp"
#include "ridlab/net/generator.hpp"
#include "ridlab/net/pretrain.hpp"
#include "ridlab/sigmodel.hpp"
#include "ridlab/train.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ridlab::config {

/// Every tunable of the pipeline. Text form is one `key = value` per line, `#` starts a
/// comment, lists are comma separated, angles are given in degrees.
struct RunConfig {
    std::uint64_t seed = 0;
    int threads = 1;

    // simulate
    std::string grid = "single";  // single, or a comma list of spin/precession/nutation
    int multiplicity = 0;         // 0 = per-motion default
    int scenario_count = 0;       // 0 = every grid point, else an evenly spaced subset
    double duration = 2.0;        // seconds of slow time
    sigmodel::TargetScenario scenario;

    // make-dataset
    dataset::DatasetConfig dataset;
    std::vector<double> dataset_snr_db{0, 4, 8, 12, 16};

    // networks and pretraining
    net::GeneratorConfig generator;
    net::DiscriminatorConfig discriminator;
    net::CorpusConfig corpus;
    net::PretrainConfig pretrain;

    // train
    train::TrainConfig train = train::TrainConfig::desk();
    int checkpoint_interval = 0;  // epochs between intermediate checkpoints, 0 = none

    // eval
    eval::SweepConfig sweep;

    // image
    double image_snr_db = sigmodel::kNoNoise;
    int frame_stride = 1;

    /// Propagates shared values (raster size, seeds, threads) into the sub-configs.
    void finalize();
    void validate() const;
    /// Resolved key -> value text for every key, in registry order.
    std::vector<std::pair<std::string, std::string>> snapshot() const;
};

/// Applies one setting. Throws ConfigError (with `line`) for unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value, int line = 0);
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);
std::vector<std::string> known_keys();

struct NamedScenario {
    std::string id;
    sigmodel::TargetScenario scenario;
};

/// Scenarios selected by `grid`, `multiplicity` and `scenario_count`.
std::vector<NamedScenario> expand_scenarios(const RunConfig& config);

}  // namespace ridlab::config
