#include "ridlab/net/checkpoint.hpp"

#include "ridlab/errors.hpp"
#include "ridlab/io.hpp"

#include <set>

namespace ridlab::net {

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

bool has_prefix(const std::string& name, const std::string& prefix) {
    return name.compare(0, prefix.size(), prefix) == 0;
}

}  // namespace

std::string encode_checkpoint(const ParameterStore& store, const std::string& prefix) {
    std::vector<const Parameter*> selected;
    for (const auto& p : store.all())
        if (has_prefix(p->name, prefix)) selected.push_back(p.get());
    io::ByteWriter w;
    w.bytes("LSDW");
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(selected.size()));
    for (const Parameter* p : selected) {
        w.u32(static_cast<std::uint32_t>(p->name.size()));
        w.bytes(p->name);
        w.u32(static_cast<std::uint32_t>(p->shape.size()));
        for (int d : p->shape) w.u32(static_cast<std::uint32_t>(d));
        w.u8(p->trainable ? 1 : 0);
        for (float v : p->value) w.f32(v);
    }
    return w.str();
}

std::vector<CheckpointBlob> decode_checkpoint(const std::string& bytes, const std::string& source) {
    io::ByteReader r(bytes, source);
    if (r.bytes(4) != "LSDW") throw MissingInputError(source + ": not an LSDW checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw MissingInputError(source + ": unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    std::vector<CheckpointBlob> blobs(count);
    for (auto& b : blobs) {
        b.name = r.bytes(r.u32());
        const std::uint32_t ndims = r.u32();
        std::size_t n = 1;
        for (std::uint32_t i = 0; i < ndims; ++i) {
            b.shape.push_back(static_cast<int>(r.u32()));
            n *= static_cast<std::size_t>(b.shape.back());
        }
        b.trainable = r.u8() != 0;
        b.values.resize(n);
        for (float& v : b.values) v = r.f32();
    }
    if (!r.at_end()) throw MissingInputError(source + ": trailing bytes after checkpoint");
    return blobs;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store,
                     const std::string& prefix) {
    io::write_file(path, encode_checkpoint(store, prefix));
}

void apply_checkpoint(const std::vector<CheckpointBlob>& blobs, ParameterStore& store,
                      const std::string& prefix) {
    std::set<std::string> seen;
    for (const auto& b : blobs) {
        if (!has_prefix(b.name, prefix)) continue;
        Parameter* p = store.find(b.name);
        if (!p) throw PreconditionError("checkpoint parameter " + b.name + " not present in network");
        if (p->shape != b.shape)
            throw PreconditionError("checkpoint parameter " + b.name + " has a different shape");
        p->value = b.values;
        seen.insert(b.name);
    }
    for (const auto& p : store.all())
        if (has_prefix(p->name, prefix) && !seen.count(p->name))
            throw PreconditionError("checkpoint lacks parameter " + p->name);
}

void load_checkpoint(const std::filesystem::path& path, ParameterStore& store,
                     const std::string& prefix) {
    apply_checkpoint(decode_checkpoint(io::read_file(path), path.string()), store, prefix);
}

}  // namespace ridlab::net
