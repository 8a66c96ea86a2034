#pragma once

#include "ridlab/config.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ridlab::cli {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.1.0";

struct Context {
    config::RunConfig config;
    fs::path config_path;  // empty when running on defaults
    fs::path in;
    fs::path out;
    fs::path checkpoint;
    fs::path init;  // optional pretrained starting point for `train`
    bool verbose = false;
};

/// Digest record of one artifact. `masked` names content excluded from the digest.
struct Artifact {
    std::string path;
    std::string sha256;
    std::string masked;
};

/// Run record written as manifest.json next to the outputs. Wall-clock time goes to a
/// separate timing.json so the manifest itself is reproducible.
class RunManifest {
  public:
    RunManifest(std::string command, const Context& ctx);

    void add_input(const fs::path& root, const fs::path& file);
    void add_output(const fs::path& file);
    /// Digest computed over `digest_bytes` instead of the file content.
    void add_output(const fs::path& file, const std::string& digest_bytes, std::string masked);

    const std::vector<Artifact>& outputs() const { return outputs_; }
    std::string json() const;
    /// Writes manifest.json and timing.json into the output directory.
    void write(double elapsed_seconds) const;

  private:
    std::string command_;
    const Context& ctx_;
    std::vector<Artifact> inputs_;
    std::vector<Artifact> outputs_;
};

void cmd_simulate(const Context& ctx);
void cmd_make_dataset(const Context& ctx);
void cmd_train(const Context& ctx);
void cmd_enhance(const Context& ctx);
void cmd_image(const Context& ctx);
void cmd_eval(const Context& ctx);

/// Parses arguments and runs one subcommand. Returns the process exit status:
/// 0 success, 1 configuration or usage error, 2 missing input, 3 numerical failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace ridlab::cli
