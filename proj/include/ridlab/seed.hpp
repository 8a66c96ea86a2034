#pragma once

#include <cstdint>

namespace ridlab {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stage identifiers for per-stage seed expansion.
enum class Stage : std::uint64_t {
    Simulate = 1,
    Dataset = 2,
    Pretrain = 3,
    Train = 4,
    Eval = 5,
    Init = 6,
};

/// Child seed for (stage, counter) under a root seed:
/// mix64(mix64(root ^ (stage << 56)) + counter).
constexpr std::uint64_t derive_seed(std::uint64_t root, Stage stage, std::uint64_t counter = 0) {
    return mix64(mix64(root ^ (static_cast<std::uint64_t>(stage) << 56)) + counter);
}

}  // namespace ridlab
