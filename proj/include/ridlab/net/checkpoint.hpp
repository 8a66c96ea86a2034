#pragma once

#include "ridlab/net/params.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ridlab::net {

struct CheckpointBlob {
    std::string name;
    std::vector<int> shape;
    bool trainable = false;
    std::vector<float> values;
};

/// "LSDW" v1: magic, u32 version, u32 blob count, then per blob u32 name length, UTF-8 name,
/// u32 dimension count, u32 dims, u8 trainable flag, f32 payload. All little-endian.
/// Blobs appear in store insertion order; only names starting with `prefix` are written.
std::string encode_checkpoint(const ParameterStore& store, const std::string& prefix = "");
std::vector<CheckpointBlob> decode_checkpoint(const std::string& bytes,
                                              const std::string& source = "buffer");

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store,
                     const std::string& prefix = "");
/// Copies every blob into the matching store parameter. Throws PreconditionError when a
/// blob has no counterpart, a shape differs, or a store parameter under `prefix` is missing
/// from the file.
void load_checkpoint(const std::filesystem::path& path, ParameterStore& store,
                     const std::string& prefix = "");
void apply_checkpoint(const std::vector<CheckpointBlob>& blobs, ParameterStore& store,
                      const std::string& prefix = "");

}  // namespace ridlab::net
